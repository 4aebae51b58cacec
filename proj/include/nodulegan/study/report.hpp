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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nodulegan/study/metrics.hpp"

namespace nodulegan::study {

struct SessionRecord {
  std::string session_id;
  std::string rater_id;
  bool locked = false;
  std::vector<RaterResponse> responses;
};

struct ExperimentScore {
  int index = 0;
  std::optional<Rate> frr;
  std::optional<Rate> trr;
};

struct RaterScore {
  std::string session_id;
  std::string rater_id;
  std::vector<ExperimentScore> experiments;  // experiments this session covered
  std::optional<Rational> mean_frr;          // unweighted over defined experiments
  std::optional<Rational> mean_trr;
};

struct PairAgreement {
  std::string session_a;
  std::string session_b;
  std::optional<Rate> realness;
  std::optional<Rate> class_call;
};

/// Study-level figures: per-experiment rates pool every session's calls,
/// means are unweighted over experiments where the rate is defined, and the
/// agreement figures average the pairwise values over session pairs.
struct ScoreReport {
  std::string study_id;
  std::size_t sessions = 0;
  std::vector<ExperimentScore> experiments;
  std::optional<Rational> mean_frr;
  std::optional<Rational> mean_trr;
  std::optional<Rational> agreement_realness;
  std::optional<Rational> agreement_class;
  std::vector<PairAgreement> pairs;
  std::vector<RaterScore> raters;
};

/// Requires at least one session, every session locked and complete grids
/// for every experiment a session touched.
ScoreReport summarize(const StudyPlan& plan, std::span<const SessionRecord> sessions);

nlohmann::json report_to_json(const ScoreReport& report);
/// Pretty-printed JSON with sorted keys and a trailing newline.
std::string serialize_report(const ScoreReport& report);

}  // namespace nodulegan::study
