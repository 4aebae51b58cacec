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

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "nodulegan/dataset/image_patch.hpp"

namespace nodulegan::study {

class StudyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExperimentCount = 18;
inline constexpr std::size_t kGridSide = 6;
inline constexpr std::size_t kCellsPerGrid = kGridSide * kGridSide;
inline constexpr std::size_t kMixedGeneratedCells = 18;

enum class Composition { kAllGenerated, kAllReal, kMixed };
std::string_view to_string(Composition c);
Composition parse_composition(std::string_view text);

struct ExperimentSpec {
  int index = 0;  // 1-based
  dataset::ClassMode class_condition = dataset::ClassMode::kMixed;
  Composition composition = Composition::kMixed;
  bool class_call_requested = false;

  std::size_t generated_cells() const;
  std::size_t real_cells() const { return kCellsPerGrid - generated_cells(); }
};

/// The fixed 18-experiment protocol. Experiments come in class triples
/// (1-3 mixed, 4-6 benign, 7-9 and 10-12 malignant, 13-15 benign, 16-18
/// mixed); inside a triple the first grid is all generated, the second all
/// real and the third an 18/18 mixture. Class calls are requested wherever
/// the class condition is a single class.
const std::array<ExperimentSpec, kExperimentCount>& protocol();
const ExperimentSpec& experiment_spec(int index);

struct Cell {
  std::string cell_id;   // opaque, rater-facing
  std::string image_id;  // opaque, rater-facing
  std::size_t position = 0;  // row-major in the 6x6 grid
  // Hidden truth; never part of a rater-facing payload.
  std::string source_id;
  dataset::Provenance provenance = dataset::Provenance::kReal;
  std::optional<dataset::NoduleClass> label;
  bool reused = false;  // source already shown in an earlier experiment
};

struct ExperimentGrid {
  ExperimentSpec spec;
  std::uint64_t arrangement_seed = 0;
  std::vector<Cell> cells;  // kCellsPerGrid entries in position order

  const Cell* find(const std::string& cell_id) const;
};

struct StudyPlan {
  std::string study_id;
  std::uint64_t seed = 0;
  std::vector<ExperimentGrid> experiments;  // index i at position i - 1

  const ExperimentGrid& experiment(int index) const;
  std::size_t reused_cells() const;
  void validate() const;
};

/// Full plan including hidden truth (owner side only).
nlohmann::json plan_to_json(const StudyPlan& plan);
StudyPlan plan_from_json(const nlohmann::json& j);

}  // namespace nodulegan::study
