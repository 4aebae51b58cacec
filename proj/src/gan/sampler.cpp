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

#include "nodulegan/gan/sampler.hpp"

#include <algorithm>
#include <random>

#include "nodulegan/gan/trainer.hpp"
#include "nodulegan/nn/checkpoint.hpp"

namespace nodulegan::gan {

namespace fs = std::filesystem;

namespace {

// One latent per forward: the projection product rounds differently for
// other batch shapes, and a patch must regenerate bit-exactly from its seed.
constexpr std::size_t kSampleBatch = 1;

fs::path latest_checkpoint(const fs::path& model_dir) {
  const fs::path dir = model_dir / "checkpoints";
  if (!fs::is_directory(dir)) throw GanError("no checkpoints directory in " + model_dir.string());
  std::vector<fs::path> found;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".nfck" && entry.path().stem().string().rfind("iter_", 0) == 0) {
      found.push_back(entry.path());
    }
  }
  if (found.empty()) throw GanError("no checkpoints in " + dir.string());
  // Zero-padded iteration numbers sort lexicographically.
  return *std::max_element(found.begin(), found.end());
}

std::uint64_t iteration_of(const fs::path& checkpoint) {
  const std::string stem = checkpoint.stem().string();
  if (stem.rfind("iter_", 0) != 0) return 0;
  try {
    return std::stoull(stem.substr(5));
  } catch (const std::exception&) {
    return 0;
  }
}

}  // namespace

LoadedGenerator load_generator(const fs::path& model_dir, const std::optional<fs::path>& checkpoint) {
  const ModelDescription desc = read_model_description(model_dir);
  const fs::path file = checkpoint ? *checkpoint : latest_checkpoint(model_dir);
  Generator g(desc.generator);
  // Checkpoints hold both networks; keep only the generator records.
  std::vector<nn::CheckpointRecord> records;
  for (auto& r : nn::read_checkpoint(file)) {
    if (r.name.rfind("g.", 0) == 0) records.push_back(std::move(r));
  }
  nn::load_into(records, g.state());
  return {std::move(g), desc.class_mode, file, iteration_of(file)};
}

nn::TensorPtr latent_batch(std::size_t z_dim, std::size_t count, std::uint64_t seed) {
  auto z = nn::make_tensor({count, z_dim});
  for (std::size_t i = 0; i < count; ++i) {
    std::mt19937_64 rng(seed + i);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t k = 0; k < z_dim; ++k) (*z)[i * z_dim + k] = normal(rng);
  }
  return z;
}

std::vector<dataset::ImagePatch> sample(const Generator& generator, std::size_t n, std::uint64_t seed,
                                        std::optional<dataset::NoduleClass> label) {
  if (n == 0) throw GanError("sample: n must be at least 1");
  const std::size_t z_dim = generator.config().z_dim;
  const std::size_t side = generator.config().output_size;
  if (side != dataset::ImagePatch::kSide) {
    throw GanError("sample: generator output " + std::to_string(side) + " is not a patch size");
  }
  std::vector<dataset::ImagePatch> out;
  out.reserve(n);
  nn::Tape tape;
  tape.set_recording(false);
  for (std::size_t start = 0; start < n; start += kSampleBatch) {
    const std::size_t count = std::min(kSampleBatch, n - start);
    auto images = generator.forward(tape, latent_batch(z_dim, count, seed + start), false);
    for (std::size_t i = 0; i < count; ++i) {
      const auto begin = images->data().begin() + static_cast<std::ptrdiff_t>(i * side * side);
      std::vector<double> pixels(begin, begin + static_cast<std::ptrdiff_t>(side * side));
      const std::uint64_t patch_seed = seed + start + i;
      out.emplace_back(std::move(pixels), dataset::Provenance::kGenerated, label,
                       "gen-" + std::to_string(patch_seed), patch_seed);
    }
  }
  return out;
}

}  // namespace nodulegan::gan
