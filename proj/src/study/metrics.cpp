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

#include "nodulegan/study/metrics.hpp"

#include <map>
#include <set>

namespace nodulegan::study {

std::string_view to_string(Realness r) { return r == Realness::kReal ? "real" : "generated"; }

Realness parse_realness(std::string_view text) {
  if (text == "real") return Realness::kReal;
  if (text == "generated") return Realness::kGenerated;
  throw StudyError("realness must be 'real' or 'generated', got '" + std::string(text) + "'");
}

std::int64_t percent_hundredths(const Rational& percent) {
  if (percent < 0) throw StudyError("negative percentage");
  // floor(p * 100 + 1/2) with p = n / d.
  const std::int64_t n = percent.numerator();
  const std::int64_t d = percent.denominator();
  return (200 * n + d) / (2 * d);
}

std::string format_percent(const Rational& percent) {
  const std::int64_t h = percent_hundredths(percent);
  const std::int64_t frac = h % 100;
  return std::to_string(h / 100) + "." + (frac < 10 ? "0" : "") + std::to_string(frac);
}

std::vector<RaterResponse> responses_for(std::span<const RaterResponse> all, int experiment_index) {
  std::vector<RaterResponse> out;
  for (const auto& r : all) {
    if (r.experiment_index == experiment_index) out.push_back(r);
  }
  return out;
}

void require_complete(std::span<const RaterResponse> responses, const ExperimentGrid& grid) {
  std::set<std::string> seen;
  std::vector<std::string> problems;
  for (const auto& r : responses) {
    if (r.experiment_index != grid.spec.index) {
      problems.push_back("response for experiment " + std::to_string(r.experiment_index));
    } else if (!grid.find(r.cell_id)) {
      problems.push_back("unknown cell " + r.cell_id);
    } else if (!seen.insert(r.cell_id).second) {
      problems.push_back("repeated cell " + r.cell_id);
    }
  }
  std::string missing;
  for (const auto& c : grid.cells) {
    if (!seen.count(c.cell_id)) missing += (missing.empty() ? "" : ",") + c.cell_id;
  }
  if (!missing.empty()) problems.push_back("missing cells " + missing);
  if (!problems.empty()) {
    std::string msg = "experiment " + std::to_string(grid.spec.index) + " responses incomplete: ";
    for (std::size_t i = 0; i < problems.size(); ++i) msg += (i ? "; " : "") + problems[i];
    throw StudyError(msg);
  }
}

namespace {

std::optional<Rate> recognition_rate(std::span<const RaterResponse> responses, const ExperimentGrid& grid,
                                     dataset::Provenance truth, Realness call) {
  require_complete(responses, grid);
  Rate rate;
  for (const auto& r : responses) {
    if (grid.find(r.cell_id)->provenance != truth) continue;
    ++rate.total;
    rate.hits += r.realness == call;
  }
  if (rate.total == 0) return std::nullopt;
  return rate;
}

std::set<int> coverage(std::span<const RaterResponse> responses) {
  std::set<int> out;
  for (const auto& r : responses) out.insert(r.experiment_index);
  return out;
}

std::string join(const std::set<int>& s) {
  std::string out;
  for (int i : s) out += (out.empty() ? "" : ",") + std::to_string(i);
  return out.empty() ? "none" : out;
}

}  // namespace

std::optional<Rate> frr(std::span<const RaterResponse> responses, const ExperimentGrid& grid) {
  return recognition_rate(responses, grid, dataset::Provenance::kGenerated, Realness::kGenerated);
}

std::optional<Rate> trr(std::span<const RaterResponse> responses, const ExperimentGrid& grid) {
  return recognition_rate(responses, grid, dataset::Provenance::kReal, Realness::kReal);
}

std::optional<Rate> interobserver_agreement(std::span<const RaterResponse> a, std::span<const RaterResponse> b,
                                            AgreementDimension dimension, const StudyPlan& plan) {
  const auto cover_a = coverage(a);
  const auto cover_b = coverage(b);
  if (cover_a != cover_b) {
    throw StudyError("agreement needs matching grid coverage: experiments {" + join(cover_a) + "} vs {" +
                     join(cover_b) + "}");
  }
  Rate rate;
  for (int index : cover_a) {
    const auto& grid = plan.experiment(index);
    if (dimension == AgreementDimension::kClassCall && !grid.spec.class_call_requested) continue;
    const auto ra = responses_for(a, index);
    const auto rb = responses_for(b, index);
    require_complete(ra, grid);
    require_complete(rb, grid);
    std::map<std::string, const RaterResponse*> by_cell;
    for (const auto& r : rb) by_cell[r.cell_id] = &r;
    for (const auto& r : ra) {
      const RaterResponse& other = *by_cell.at(r.cell_id);
      bool same = false;
      if (dimension == AgreementDimension::kRealness) {
        same = r.realness == other.realness;
      } else {
        if (!r.class_call || !other.class_call) {
          throw StudyError("experiment " + std::to_string(index) + " cell " + r.cell_id + " lacks a class call");
        }
        same = *r.class_call == *other.class_call;
      }
      ++rate.total;
      rate.hits += same;
    }
  }
  if (rate.total == 0) return std::nullopt;
  return rate;
}

}  // namespace nodulegan::study
