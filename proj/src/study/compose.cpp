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

#include "nodulegan/study/compose.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <fstream>
#include <random>
#include <set>

#include "nodulegan/dataset/manifest.hpp"

namespace nodulegan::study {

using dataset::ClassMode;
using dataset::ImagePatch;
using dataset::NoduleClass;

namespace {

// Seeded shuffled pass over a pool. Items already used in the current
// experiment are deferred, never repeated within it.
class PoolCursor {
 public:
  PoolCursor(std::string name, std::vector<const ImagePatch*> items, std::mt19937_64& rng)
      : name_(std::move(name)), items_(std::move(items)), rng_(rng) {}

  const std::string& name() const { return name_; }
  std::size_t size() const { return items_.size(); }

  std::vector<const ImagePatch*> draw(std::size_t n) {
    std::vector<const ImagePatch*> out;
    std::set<const ImagePatch*> taken;
    std::deque<const ImagePatch*> deferred;
    while (out.size() < n) {
      if (pass_.empty()) refill();
      const ImagePatch* p = pass_.front();
      pass_.pop_front();
      if (taken.count(p)) {
        deferred.push_back(p);
        continue;
      }
      taken.insert(p);
      out.push_back(p);
    }
    pass_.insert(pass_.begin(), deferred.begin(), deferred.end());
    return out;
  }

 private:
  void refill() {
    std::vector<const ImagePatch*> order = items_;
    std::shuffle(order.begin(), order.end(), rng_);
    pass_.assign(order.begin(), order.end());
  }

  std::string name_;
  std::vector<const ImagePatch*> items_;
  std::deque<const ImagePatch*> pass_;
  std::mt19937_64& rng_;
};

std::string hex_id(std::mt19937_64& rng, std::set<std::string>& used) {
  for (;;) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
    if (used.insert(buf).second) return buf;
  }
}

std::string source_key(const ImagePatch& p) {
  return std::string(dataset::to_string(p.provenance())) + ":" + p.source_id();
}

}  // namespace

ComposedStudy compose_study(const StudyPools& pools, std::uint64_t seed, const std::string& study_id) {
  std::vector<const ImagePatch*> real_benign, real_malignant, real_any;
  // Mixed-class grids take their real cells half from each class cursor.
  const auto real_split = [](const ExperimentSpec& spec) {
    const std::size_t n = spec.real_cells();
    switch (spec.class_condition) {
      case ClassMode::kBenign: return std::pair<std::size_t, std::size_t>{n, 0};
      case ClassMode::kMalignant: return std::pair<std::size_t, std::size_t>{0, n};
      case ClassMode::kMixed: break;
    }
    return std::pair<std::size_t, std::size_t>{n - n / 2, n / 2};
  };
  for (const auto& p : pools.real) {
    if (p.provenance() != dataset::Provenance::kReal) {
      throw StudyError("real pool holds generated patch '" + p.source_id() + "'");
    }
    if (!p.label()) throw StudyError("real patch '" + p.source_id() + "' has no class label");
    (*p.label() == NoduleClass::kBenign ? real_benign : real_malignant).push_back(&p);
    real_any.push_back(&p);
  }
  auto generated_of = [&](ClassMode m) {
    std::vector<const ImagePatch*> out;
    auto it = pools.generated.find(m);
    if (it == pools.generated.end()) return out;
    for (const auto& p : it->second) {
      if (p.provenance() != dataset::Provenance::kGenerated) {
        throw StudyError("generated pool holds real patch '" + p.source_id() + "'");
      }
      out.push_back(&p);
    }
    return out;
  };

  const auto require_unique = [](const std::vector<const ImagePatch*>& pool, const std::string& name) {
    std::set<std::string> seen;
    for (const ImagePatch* p : pool) {
      if (!seen.insert(p->source_id()).second) {
        throw StudyError(name + " pool lists source '" + p->source_id() + "' twice");
      }
    }
  };
  require_unique(real_any, "real");
  for (ClassMode m : {ClassMode::kBenign, ClassMode::kMalignant, ClassMode::kMixed}) {
    require_unique(generated_of(m), "generated " + std::string(dataset::to_string(m)));
  }

  std::mt19937_64 rng(seed);
  std::map<ClassMode, PoolCursor> real_cursor, gen_cursor;
  real_cursor.emplace(ClassMode::kBenign, PoolCursor("real benign", real_benign, rng));
  real_cursor.emplace(ClassMode::kMalignant, PoolCursor("real malignant", real_malignant, rng));
  for (ClassMode m : {ClassMode::kBenign, ClassMode::kMalignant, ClassMode::kMixed}) {
    gen_cursor.emplace(m, PoolCursor("generated " + std::string(dataset::to_string(m)), generated_of(m), rng));
  }

  // Largest per-experiment demand on each pool versus its size.
  std::map<std::string, std::pair<std::size_t, int>> demand;
  for (const auto& spec : protocol()) {
    const auto need = [&](PoolCursor& c, std::size_t n) {
      auto& d = demand[c.name()];
      if (n > d.first) d = {n, spec.index};
    };
    const auto [benign, malignant] = real_split(spec);
    need(real_cursor.at(ClassMode::kBenign), benign);
    need(real_cursor.at(ClassMode::kMalignant), malignant);
    need(gen_cursor.at(spec.class_condition), spec.generated_cells());
  }
  std::string shortfall;
  for (auto* cursors : {&real_cursor, &gen_cursor}) {
    for (auto& [mode, cursor] : *cursors) {
      const auto [needed, index] = demand[cursor.name()];
      if (cursor.size() < needed) {
        if (!shortfall.empty()) shortfall += "; ";
        shortfall += cursor.name() + " pool has " + std::to_string(cursor.size()) + " patches, experiment " +
                     std::to_string(index) + " needs " + std::to_string(needed) + " (short by " +
                     std::to_string(needed - cursor.size()) + ")";
      }
    }
  }
  if (!shortfall.empty()) throw StudyError("insufficient pools: " + shortfall);

  ComposedStudy out;
  out.plan.study_id = study_id;
  out.plan.seed = seed;
  std::set<std::string> ids;
  std::set<std::string> shown;
  for (const auto& spec : protocol()) {
    std::vector<const ImagePatch*> chosen = gen_cursor.at(spec.class_condition).draw(spec.generated_cells());
    const auto [benign, malignant] = real_split(spec);
    for (const ImagePatch* p : real_cursor.at(ClassMode::kBenign).draw(benign)) chosen.push_back(p);
    for (const ImagePatch* p : real_cursor.at(ClassMode::kMalignant).draw(malignant)) chosen.push_back(p);

    ExperimentGrid grid;
    grid.spec = spec;
    grid.arrangement_seed = rng();
    std::mt19937_64 arrange(grid.arrangement_seed);
    std::shuffle(chosen.begin(), chosen.end(), arrange);

    std::vector<std::string> keys;
    for (std::size_t pos = 0; pos < chosen.size(); ++pos) {
      const ImagePatch& p = *chosen[pos];
      Cell cell;
      cell.cell_id = hex_id(rng, ids);
      cell.image_id = hex_id(rng, ids);
      cell.position = pos;
      cell.source_id = p.source_id();
      cell.provenance = p.provenance();
      cell.label = p.label();
      const std::string key = source_key(p);
      cell.reused = shown.count(key) > 0;
      keys.push_back(key);
      out.images.emplace(cell.image_id, p);
      grid.cells.push_back(std::move(cell));
    }
    shown.insert(keys.begin(), keys.end());
    out.plan.experiments.push_back(std::move(grid));
  }
  out.plan.validate();
  return out;
}

Curation read_curation(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw StudyError("cannot open curation manifest " + path.string());
  Curation out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = dataset::split_csv_line(line);
    if (line_no == 1 && !fields.empty() && fields[0] == "pool") continue;
    if (fields.size() != 2) {
      throw StudyError(path.string() + ":" + std::to_string(line_no) + ": expected pool,source_id");
    }
    try {
      out[dataset::parse_class_mode(fields[0])].push_back(fields[1]);
    } catch (const dataset::DatasetError& e) {
      throw StudyError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void apply_curation(StudyPools& pools, const Curation& curation) {
  for (const auto& [mode, ids] : curation) {
    auto& pool = pools.generated[mode];
    std::vector<ImagePatch> kept;
    for (const auto& id : ids) {
      auto it = std::find_if(pool.begin(), pool.end(), [&](const ImagePatch& p) { return p.source_id() == id; });
      if (it == pool.end()) {
        throw StudyError("curation lists '" + id + "' which is not in the generated " +
                         std::string(dataset::to_string(mode)) + " pool");
      }
      kept.push_back(*it);
    }
    pool = std::move(kept);
  }
}

}  // namespace nodulegan::study
