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

#include "nodulegan/study/report.hpp"

#include <map>
#include <set>

namespace nodulegan::study {

using nlohmann::json;

namespace {

// Responses of `own` restricted to experiments `other` also answered.
std::vector<RaterResponse> shared_coverage(std::span<const RaterResponse> own,
                                           std::span<const RaterResponse> other) {
  std::set<int> theirs;
  for (const auto& r : other) theirs.insert(r.experiment_index);
  std::vector<RaterResponse> out;
  for (const auto& r : own)
    if (theirs.count(r.experiment_index)) out.push_back(r);
  return out;
}

std::optional<Rational> mean_of(const std::vector<Rational>& values) {
  if (values.empty()) return std::nullopt;
  Rational sum = 0;
  for (const auto& v : values) sum += v;
  return sum / static_cast<std::int64_t>(values.size());
}

std::optional<Rate> pooled(const std::vector<std::optional<Rate>>& rates) {
  Rate total;
  bool any = false;
  for (const auto& r : rates) {
    if (!r) continue;
    any = true;
    total.hits += r->hits;
    total.total += r->total;
  }
  if (!any) return std::nullopt;
  return total;
}

json percent_json(const std::optional<Rational>& p) {
  if (!p) return nullptr;
  return static_cast<double>(percent_hundredths(*p)) / 100.0;
}

json rate_json(const std::optional<Rate>& r) {
  if (!r) return nullptr;
  return {{"percent", percent_json(r->percent())}, {"hits", r->hits}, {"total", r->total}};
}

json experiments_json(const std::vector<ExperimentScore>& scores) {
  json out = json::array();
  for (const auto& s : scores) out.push_back({{"index", s.index}, {"frr", rate_json(s.frr)}, {"trr", rate_json(s.trr)}});
  return out;
}

}  // namespace

ScoreReport summarize(const StudyPlan& plan, std::span<const SessionRecord> sessions) {
  if (sessions.empty()) throw StudyError("study " + plan.study_id + " has no sessions to score");
  std::string unlocked;
  for (const auto& s : sessions) {
    if (!s.locked) unlocked += (unlocked.empty() ? "" : ", ") + s.session_id;
  }
  if (!unlocked.empty()) throw StudyError("unlocked sessions: " + unlocked);

  ScoreReport report;
  report.study_id = plan.study_id;
  report.sessions = sessions.size();

  std::map<int, std::vector<std::optional<Rate>>> frr_by_exp, trr_by_exp;
  for (const auto& s : sessions) {
    RaterScore rs;
    rs.session_id = s.session_id;
    rs.rater_id = s.rater_id;
    std::set<int> covered;
    for (const auto& r : s.responses) covered.insert(r.experiment_index);
    std::vector<Rational> frrs, trrs;
    for (int index : covered) {
      const auto& grid = plan.experiment(index);
      const auto responses = responses_for(s.responses, index);
      ExperimentScore es{index, frr(responses, grid), trr(responses, grid)};
      if (es.frr) frrs.push_back(es.frr->percent());
      if (es.trr) trrs.push_back(es.trr->percent());
      frr_by_exp[index].push_back(es.frr);
      trr_by_exp[index].push_back(es.trr);
      rs.experiments.push_back(es);
    }
    rs.mean_frr = mean_of(frrs);
    rs.mean_trr = mean_of(trrs);
    report.raters.push_back(std::move(rs));
  }

  std::vector<Rational> frrs, trrs;
  for (const auto& [index, rates] : frr_by_exp) {
    ExperimentScore es{index, pooled(rates), pooled(trr_by_exp[index])};
    if (es.frr) frrs.push_back(es.frr->percent());
    if (es.trr) trrs.push_back(es.trr->percent());
    report.experiments.push_back(es);
  }
  report.mean_frr = mean_of(frrs);
  report.mean_trr = mean_of(trrs);

  std::vector<Rational> real_agree, class_agree;
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    for (std::size_t j = i + 1; j < sessions.size(); ++j) {
      // Force-locked sessions may stop early; compare on grids both finished.
      const auto a = shared_coverage(sessions[i].responses, sessions[j].responses);
      const auto b = shared_coverage(sessions[j].responses, sessions[i].responses);
      PairAgreement pa{sessions[i].session_id, sessions[j].session_id,
                       interobserver_agreement(a, b, AgreementDimension::kRealness, plan),
                       interobserver_agreement(a, b, AgreementDimension::kClassCall, plan)};
      if (pa.realness) real_agree.push_back(pa.realness->percent());
      if (pa.class_call) class_agree.push_back(pa.class_call->percent());
      report.pairs.push_back(std::move(pa));
    }
  }
  report.agreement_realness = mean_of(real_agree);
  report.agreement_class = mean_of(class_agree);
  return report;
}

json report_to_json(const ScoreReport& report) {
  json raters = json::array();
  for (const auto& r : report.raters) {
    raters.push_back({{"session_id", r.session_id},
                      {"rater_id", r.rater_id},
                      {"experiments", experiments_json(r.experiments)},
                      {"mean_frr", percent_json(r.mean_frr)},
                      {"mean_trr", percent_json(r.mean_trr)}});
  }
  json pairs = json::array();
  for (const auto& p : report.pairs) {
    pairs.push_back({{"session_a", p.session_a},
                     {"session_b", p.session_b},
                     {"realness", rate_json(p.realness)},
                     {"class_call", rate_json(p.class_call)}});
  }
  return {{"study_id", report.study_id},
          {"sessions", report.sessions},
          {"experiments", experiments_json(report.experiments)},
          {"mean_frr", percent_json(report.mean_frr)},
          {"mean_trr", percent_json(report.mean_trr)},
          {"agreement_realness", percent_json(report.agreement_realness)},
          {"agreement_class", percent_json(report.agreement_class)},
          {"pairs", pairs},
          {"raters", raters}};
}

std::string serialize_report(const ScoreReport& report) { return report_to_json(report).dump(2) + "\n"; }

}  // namespace nodulegan::study
