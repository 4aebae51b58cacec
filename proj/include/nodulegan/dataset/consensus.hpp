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

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nodulegan/dataset/image_patch.hpp"
#include "nodulegan/dataset/manifest.hpp"

namespace nodulegan::dataset {

inline constexpr double kMinDiameterMm = 3.0;
inline constexpr std::size_t kMinReaders = 3;
inline constexpr double kIndeterminateRating = 3.0;

/// Median of the readers' ratings; with an even count, the mean of the two
/// middle values. This is the single place ratings are aggregated.
double consensus_rating(std::span<const int> ratings);

enum class ExclusionReason { kTooSmall, kTooFewReaders, kIndeterminate };
std::string_view to_string(ExclusionReason reason);

/// Outcome of the selection rules for one annotation, without touching pixels.
struct ConsensusDecision {
  double consensus = 0.0;
  std::optional<NoduleClass> label;       // set iff kept
  std::vector<ExclusionReason> reasons;   // empty iff kept
  bool kept() const { return reasons.empty(); }
};

ConsensusDecision decide(const NoduleAnnotation& annotation);

struct LabeledNodule {
  std::string nodule_id;
  ImagePatch patch;
  NoduleClass label;
  double consensus_rating;
  std::vector<int> ratings;
};

struct ExcludedNodule {
  NoduleAnnotation annotation;
  double consensus;
  std::vector<ExclusionReason> reasons;
};

struct FilterResult {
  std::vector<LabeledNodule> kept;       // sorted by nodule_id
  std::vector<ExcludedNodule> excluded;  // sorted by nodule_id
};

using PatchLoader = std::function<ImagePatch(const NoduleAnnotation&, NoduleClass)>;

/// Keeps a nodule iff diameter >= 3 mm, at least 3 readers rated it and the
/// consensus rating is not exactly 3; below 3 is benign, above is malignant.
/// Every excluded annotation carries all rules it failed.
FilterResult consensus_filter(std::span<const NoduleAnnotation> annotations, const PatchLoader& load);

}  // namespace nodulegan::dataset
