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

#include "nodulegan/dataset/consensus.hpp"

#include <algorithm>

namespace nodulegan::dataset {

double consensus_rating(std::span<const int> ratings) {
  if (ratings.empty()) throw DatasetError("consensus of an empty rating list");
  std::vector<int> sorted(ratings.begin(), ratings.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
}

std::string_view to_string(ExclusionReason reason) {
  switch (reason) {
    case ExclusionReason::kTooSmall:
      return "diameter_below_3mm";
    case ExclusionReason::kTooFewReaders:
      return "fewer_than_3_readers";
    case ExclusionReason::kIndeterminate:
      return "consensus_rating_3";
  }
  return "unknown";
}

ConsensusDecision decide(const NoduleAnnotation& annotation) {
  ConsensusDecision d;
  d.consensus = annotation.ratings.empty() ? 0.0 : consensus_rating(annotation.ratings);
  if (annotation.diameter_mm < kMinDiameterMm) d.reasons.push_back(ExclusionReason::kTooSmall);
  if (annotation.ratings.size() < kMinReaders) d.reasons.push_back(ExclusionReason::kTooFewReaders);
  if (d.consensus == kIndeterminateRating) d.reasons.push_back(ExclusionReason::kIndeterminate);
  if (d.kept()) d.label = d.consensus < kIndeterminateRating ? NoduleClass::kBenign : NoduleClass::kMalignant;
  return d;
}

FilterResult consensus_filter(std::span<const NoduleAnnotation> annotations, const PatchLoader& load) {
  FilterResult result;
  for (const auto& a : annotations) {
    ConsensusDecision d = decide(a);
    if (d.kept()) {
      result.kept.push_back({a.nodule_id, load(a, *d.label), *d.label, d.consensus, a.ratings});
    } else {
      result.excluded.push_back({a, d.consensus, std::move(d.reasons)});
    }
  }
  std::sort(result.kept.begin(), result.kept.end(),
            [](const auto& x, const auto& y) { return x.nodule_id < y.nodule_id; });
  std::sort(result.excluded.begin(), result.excluded.end(),
            [](const auto& x, const auto& y) { return x.annotation.nodule_id < y.annotation.nodule_id; });
  return result;
}

}  // namespace nodulegan::dataset
