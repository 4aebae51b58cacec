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

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "nodulegan/dataset/image_patch.hpp"
#include "nodulegan/study/plan.hpp"

namespace nodulegan::study {

/// Inputs to composition. Real patches must carry a class label. Generated
/// pools are keyed by the class mode of the model that produced them.
struct StudyPools {
  std::vector<dataset::ImagePatch> real;
  std::map<dataset::ClassMode, std::vector<dataset::ImagePatch>> generated;
};

struct ComposedStudy {
  StudyPlan plan;
  std::map<std::string, dataset::ImagePatch> images;  // image_id -> patch
};

/// Fills the 18 protocol grids. Real cells of mixed-class grids are split
/// evenly between benign and malignant. Each pool is consumed in seeded shuffled
/// order and reshuffled when exhausted, so sources repeat across experiments
/// only after the whole pool has been shown; such cells are flagged `reused`.
/// Within one experiment all sources are distinct. A pool smaller than the
/// largest single-experiment demand is an error stating the shortfall.
ComposedStudy compose_study(const StudyPools& pools, std::uint64_t seed, const std::string& study_id);

/// Curation manifest: CSV with header `pool,source_id`, pool one of
/// benign/malignant/mixed. Keeps only the listed generated patches, in the
/// listed order. Pools without any listed id are left untouched.
using Curation = std::map<dataset::ClassMode, std::vector<std::string>>;
Curation read_curation(const std::filesystem::path& path);
void apply_curation(StudyPools& pools, const Curation& curation);

}  // namespace nodulegan::study
