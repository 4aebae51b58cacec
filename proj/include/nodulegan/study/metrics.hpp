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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "nodulegan/study/plan.hpp"

namespace nodulegan::study {

enum class Realness { kReal, kGenerated };
std::string_view to_string(Realness r);
Realness parse_realness(std::string_view text);

struct RaterResponse {
  std::string session_id;
  int experiment_index = 0;
  std::string cell_id;
  Realness realness = Realness::kReal;
  std::optional<dataset::NoduleClass> class_call;
  std::string timestamp;  // ISO-8601 UTC, set by the service
};

using Rational = boost::rational<std::int64_t>;

/// hits / total as an exact percentage.
struct Rate {
  std::int64_t hits = 0;
  std::int64_t total = 0;
  Rational percent() const { return Rational(100 * hits, total); }
  bool operator==(const Rate&) const = default;
};

/// Rounds half-up to two decimals and returns hundredths of a percent.
std::int64_t percent_hundredths(const Rational& percent);
/// "33.33", "100.00".
std::string format_percent(const Rational& percent);

/// Throws listing missing (and unknown or repeated) cell ids unless the
/// responses hold exactly one call for every cell of the grid.
void require_complete(std::span<const RaterResponse> responses, const ExperimentGrid& grid);

/// Fake nodules called fake over fake nodules shown. Absent without fakes.
std::optional<Rate> frr(std::span<const RaterResponse> responses, const ExperimentGrid& grid);
/// Real nodules called real over real nodules shown. Absent without reals.
std::optional<Rate> trr(std::span<const RaterResponse> responses, const ExperimentGrid& grid);

enum class AgreementDimension { kRealness, kClassCall };

/// Cells on which both raters gave the same call, pooled over every
/// experiment both covered (for class calls, only experiments that request
/// them). Coverage must match exactly. Absent when no cell is compared.
std::optional<Rate> interobserver_agreement(std::span<const RaterResponse> a, std::span<const RaterResponse> b,
                                            AgreementDimension dimension, const StudyPlan& plan);

/// Responses of one rater for one experiment.
std::vector<RaterResponse> responses_for(std::span<const RaterResponse> all, int experiment_index);

}  // namespace nodulegan::study
