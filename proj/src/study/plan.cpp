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

#include "nodulegan/study/plan.hpp"

#include <set>

namespace nodulegan::study {

using dataset::ClassMode;
using nlohmann::json;

std::string_view to_string(Composition c) {
  switch (c) {
    case Composition::kAllGenerated: return "all_generated";
    case Composition::kAllReal: return "all_real";
    case Composition::kMixed: return "mixed";
  }
  return "?";
}

Composition parse_composition(std::string_view text) {
  for (auto c : {Composition::kAllGenerated, Composition::kAllReal, Composition::kMixed}) {
    if (to_string(c) == text) return c;
  }
  throw StudyError("unknown composition '" + std::string(text) + "'");
}

std::size_t ExperimentSpec::generated_cells() const {
  switch (composition) {
    case Composition::kAllGenerated: return kCellsPerGrid;
    case Composition::kAllReal: return 0;
    case Composition::kMixed: return kMixedGeneratedCells;
  }
  return 0;
}

const std::array<ExperimentSpec, kExperimentCount>& protocol() {
  static const auto table = [] {
    const ClassMode triples[6] = {ClassMode::kMixed,     ClassMode::kBenign, ClassMode::kMalignant,
                                  ClassMode::kMalignant, ClassMode::kBenign, ClassMode::kMixed};
    const Composition order[3] = {Composition::kAllGenerated, Composition::kAllReal, Composition::kMixed};
    std::array<ExperimentSpec, kExperimentCount> t{};
    for (int i = 0; i < kExperimentCount; ++i) {
      const ClassMode cls = triples[i / 3];
      t[i] = {i + 1, cls, order[i % 3], cls != ClassMode::kMixed};
    }
    return t;
  }();
  return table;
}

const ExperimentSpec& experiment_spec(int index) {
  if (index < 1 || index > kExperimentCount) {
    throw StudyError("experiment index " + std::to_string(index) + " outside 1.." + std::to_string(kExperimentCount));
  }
  return protocol()[static_cast<std::size_t>(index - 1)];
}

const Cell* ExperimentGrid::find(const std::string& cell_id) const {
  for (const auto& c : cells) {
    if (c.cell_id == cell_id) return &c;
  }
  return nullptr;
}

const ExperimentGrid& StudyPlan::experiment(int index) const {
  experiment_spec(index);
  if (experiments.size() != kExperimentCount) throw StudyError("plan does not hold 18 experiments");
  return experiments[static_cast<std::size_t>(index - 1)];
}

std::size_t StudyPlan::reused_cells() const {
  std::size_t n = 0;
  for (const auto& e : experiments)
    for (const auto& c : e.cells) n += c.reused;
  return n;
}

void StudyPlan::validate() const {
  if (experiments.size() != kExperimentCount) {
    throw StudyError("plan holds " + std::to_string(experiments.size()) + " experiments, expected 18");
  }
  std::set<std::string> ids;
  for (int i = 1; i <= kExperimentCount; ++i) {
    const auto& grid = experiments[static_cast<std::size_t>(i - 1)];
    const auto& spec = experiment_spec(i);
    const std::string where = "experiment " + std::to_string(i);
    if (grid.spec.index != i || grid.spec.composition != spec.composition ||
        grid.spec.class_condition != spec.class_condition) {
      throw StudyError(where + " does not follow the protocol");
    }
    if (grid.cells.size() != kCellsPerGrid) throw StudyError(where + " does not have 36 cells");
    std::set<std::string> sources;
    std::size_t generated = 0;
    for (std::size_t p = 0; p < grid.cells.size(); ++p) {
      const auto& c = grid.cells[p];
      if (c.position != p) throw StudyError(where + ": cells out of position order");
      const std::string key = std::string(dataset::to_string(c.provenance)) + ":" + c.source_id;
      if (!sources.insert(key).second) throw StudyError(where + ": source '" + c.source_id + "' repeats");
      if (!ids.insert(c.cell_id).second || !ids.insert(c.image_id).second) {
        throw StudyError(where + ": identifier collision");
      }
      generated += c.provenance == dataset::Provenance::kGenerated;
    }
    if (generated != spec.generated_cells()) throw StudyError(where + ": composition mismatch");
  }
}

json plan_to_json(const StudyPlan& plan) {
  json experiments = json::array();
  for (const auto& e : plan.experiments) {
    json cells = json::array();
    for (const auto& c : e.cells) {
      cells.push_back({{"cell_id", c.cell_id},
                       {"image_id", c.image_id},
                       {"position", c.position},
                       {"source_id", c.source_id},
                       {"provenance", dataset::to_string(c.provenance)},
                       {"class", c.label ? json(dataset::to_string(*c.label)) : json(nullptr)},
                       {"reused", c.reused}});
    }
    experiments.push_back({{"index", e.spec.index},
                           {"class_condition", dataset::to_string(e.spec.class_condition)},
                           {"composition", to_string(e.spec.composition)},
                           {"class_call_requested", e.spec.class_call_requested},
                           {"arrangement_seed", e.arrangement_seed},
                           {"cells", cells}});
  }
  return {{"study_id", plan.study_id},
          {"seed", plan.seed},
          {"reused_cells", plan.reused_cells()},
          {"experiments", experiments}};
}

StudyPlan plan_from_json(const json& j) {
  try {
    StudyPlan plan;
    plan.study_id = j.at("study_id").get<std::string>();
    plan.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& e : j.at("experiments")) {
      ExperimentGrid grid;
      grid.spec = experiment_spec(e.at("index").get<int>());
      grid.arrangement_seed = e.at("arrangement_seed").get<std::uint64_t>();
      for (const auto& c : e.at("cells")) {
        Cell cell;
        cell.cell_id = c.at("cell_id").get<std::string>();
        cell.image_id = c.at("image_id").get<std::string>();
        cell.position = c.at("position").get<std::size_t>();
        cell.source_id = c.at("source_id").get<std::string>();
        cell.provenance = dataset::parse_provenance(c.at("provenance").get<std::string>());
        if (!c.at("class").is_null()) cell.label = dataset::parse_nodule_class(c.at("class").get<std::string>());
        cell.reused = c.at("reused").get<bool>();
        grid.cells.push_back(std::move(cell));
      }
      plan.experiments.push_back(std::move(grid));
    }
    plan.validate();
    return plan;
  } catch (const json::exception& e) {
    throw StudyError(std::string("malformed plan: ") + e.what());
  } catch (const dataset::DatasetError& e) {
    throw StudyError(std::string("malformed plan: ") + e.what());
  }
}

}  // namespace nodulegan::study
