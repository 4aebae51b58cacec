/* Copyright 2026 The nodulegan Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "nodulegan/dataset/pool.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "nodulegan/imgproc/image_io.hpp"
#include "nodulegan/imgproc/intensity.hpp"
#include "nodulegan/imgproc/resize.hpp"

namespace nodulegan::dataset {

namespace {

std::string join_ints(const std::vector<int>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(values[i]);
  }
  return out;
}

std::vector<int> split_ints(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ';')) {
    if (!token.empty()) out.push_back(std::stoi(token));
  }
  return out;
}

std::string format_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    rows.push_back(split_csv_line(line));
  }
  return rows;
}

std::string file_stem_for(const std::string& source_id) {
  std::string stem;
  for (char c : source_id) stem += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return stem;
}

}  // namespace

imgproc::Image load_patch_image(const std::filesystem::path& path, const LoaderOptions& options) {
  imgproc::Image img = imgproc::center_crop_resize(imgproc::to_real(imgproc::read_image(path)));
  if (options.diffusion) img = imgproc::perona_malik(img, *options.diffusion);
  for (double& v : img.pixels) v = std::clamp(imgproc::normalize_value(v), -1.0, 1.0);
  return img;
}

PatchLoader file_patch_loader(LoaderOptions options) {
  return [options](const NoduleAnnotation& a, NoduleClass label) {
    return ImagePatch(load_patch_image(a.patch_path, options).pixels, Provenance::kReal, label, a.nodule_id);
  };
}

void write_patch_set(const std::filesystem::path& dir, std::span<const ImagePatch> patches) {
  std::filesystem::create_directories(dir / "images");
  std::ofstream index(dir / "index.csv", std::ios::trunc);
  if (!index) throw DatasetError("cannot write " + (dir / "index.csv").string());
  index << "source_id,file,provenance,class,seed\n";
  std::map<std::string, int> used;
  for (const auto& p : patches) {
    std::string stem = file_stem_for(p.source_id());
    if (used[stem]++) stem += "_" + std::to_string(used[stem] - 1);
    const std::string file = "images/" + stem + ".png";
    imgproc::write_png(dir / file, imgproc::denormalize(p.image()));
    index << csv_field(p.source_id()) << ',' << file << ',' << to_string(p.provenance()) << ','
          << (p.label() ? std::string(to_string(*p.label())) : std::string()) << ','
          << (p.seed() ? std::to_string(*p.seed()) : std::string()) << '\n';
  }
}

std::vector<ImagePatch> read_patch_set(const std::filesystem::path& dir) {
  std::vector<ImagePatch> patches;
  for (const auto& row : read_csv(dir / "index.csv")) {
    if (row.size() != 5) throw DatasetError("malformed row in " + (dir / "index.csv").string());
    auto img = imgproc::normalize_to_model_range(imgproc::read_image(dir / row[1]));
    if (img.width != ImagePatch::kSide || img.height != ImagePatch::kSide) {
      img = imgproc::center_crop_resize(img);
    }
    std::optional<NoduleClass> label;
    if (!row[3].empty()) label = parse_nodule_class(row[3]);
    std::optional<std::uint64_t> seed;
    if (!row[4].empty()) seed = std::stoull(row[4]);
    patches.emplace_back(std::move(img.pixels), parse_provenance(row[2]), label, row[0], seed);
  }
  return patches;
}

void write_pool(const std::filesystem::path& dir, const FilterResult& result) {
  std::vector<ImagePatch> patches;
  patches.reserve(result.kept.size());
  for (const auto& n : result.kept) patches.push_back(n.patch);
  write_patch_set(dir, patches);

  std::ofstream consensus(dir / "consensus.csv", std::ios::trunc);
  consensus << "nodule_id,ratings,consensus,class\n";
  for (const auto& n : result.kept) {
    consensus << csv_field(n.nodule_id) << ',' << join_ints(n.ratings) << ','
              << format_real(n.consensus_rating) << ',' << to_string(n.label) << '\n';
  }
  std::ofstream exclusions(dir / "exclusions.csv", std::ios::trunc);
  exclusions << "nodule_id,diameter_mm,ratings,consensus,reasons\n";
  for (const auto& e : result.excluded) {
    std::string reasons;
    for (std::size_t i = 0; i < e.reasons.size(); ++i) {
      if (i) reasons += ';';
      reasons += to_string(e.reasons[i]);
    }
    exclusions << csv_field(e.annotation.nodule_id) << ',' << format_real(e.annotation.diameter_mm)
               << ',' << join_ints(e.annotation.ratings) << ',' << format_real(e.consensus) << ','
               << reasons << '\n';
  }
  if (!consensus || !exclusions) throw DatasetError("failed writing pool metadata under " + dir.string());
}

std::vector<LabeledNodule> read_pool(const std::filesystem::path& dir) {
  std::map<std::string, ImagePatch> patches;
  for (auto& p : read_patch_set(dir)) patches.emplace(p.source_id(), std::move(p));
  std::vector<LabeledNodule> pool;
  for (const auto& row : read_csv(dir / "consensus.csv")) {
    if (row.size() != 4) throw DatasetError("malformed row in " + (dir / "consensus.csv").string());
    auto it = patches.find(row[0]);
    if (it == patches.end()) throw DatasetError("pool has no patch for nodule '" + row[0] + "'");
    const NoduleClass label = parse_nodule_class(row[3]);
    const ImagePatch& src = it->second;
    pool.push_back({row[0], ImagePatch(src.pixels(), Provenance::kReal, label, row[0]), label,
                    std::stod(row[2]), split_ints(row[1])});
  }
  return pool;
}

std::vector<LabeledNodule> class_subset(std::span<const LabeledNodule> pool, ClassMode mode,
                                        std::uint64_t seed) {
  std::vector<LabeledNodule> subset;
  std::size_t benign = 0;
  std::size_t malignant = 0;
  const auto wanted = class_of(mode);
  for (const auto& n : pool) {
    (n.label == NoduleClass::kBenign ? benign : malignant)++;
    if (!wanted || n.label == *wanted) subset.push_back(n);
  }
  if (subset.empty()) {
    throw DatasetError("no nodules for class mode '" + std::string(to_string(mode)) + "' (pool has " +
                       std::to_string(benign) + " benign, " + std::to_string(malignant) + " malignant)");
  }
  std::mt19937_64 rng(seed);
  std::shuffle(subset.begin(), subset.end(), rng);
  return subset;
}

}  // namespace nodulegan::dataset
