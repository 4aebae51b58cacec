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

// Protocol layout, composition, recognition rates, agreement and reports.

#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "nodulegan/study/compose.hpp"
#include "nodulegan/study/metrics.hpp"
#include "nodulegan/study/report.hpp"
#include "score_oracle.hpp"
#include "temp_dir.hpp"

#include <fstream>

using namespace nodulegan;
using namespace nodulegan::study;
using dataset::ClassMode;
using dataset::NoduleClass;
using dataset::Provenance;

namespace {

dataset::ImagePatch patch(const std::string& id, Provenance p, std::optional<NoduleClass> c) {
  return dataset::ImagePatch(std::vector<double>(56 * 56, 0.0), p, c, id);
}

StudyPools make_pools(std::size_t real_per_class, std::size_t generated_per_pool) {
  StudyPools pools;
  for (std::size_t i = 0; i < real_per_class; ++i) {
    pools.real.push_back(patch("rb" + std::to_string(i), Provenance::kReal, NoduleClass::kBenign));
    pools.real.push_back(patch("rm" + std::to_string(i), Provenance::kReal, NoduleClass::kMalignant));
  }
  for (auto [mode, label] : {std::pair{ClassMode::kBenign, std::optional{NoduleClass::kBenign}},
                             std::pair{ClassMode::kMalignant, std::optional{NoduleClass::kMalignant}},
                             std::pair{ClassMode::kMixed, std::optional<NoduleClass>{}}}) {
    for (std::size_t i = 0; i < generated_per_pool; ++i) {
      pools.generated[mode].push_back(
          patch("g" + std::string(dataset::to_string(mode)) + std::to_string(i), Provenance::kGenerated, label));
    }
  }
  return pools;
}

// A hand-built grid with `generated` generated cells first.
ExperimentGrid grid_with(std::size_t generated, int index = 1) {
  ExperimentGrid g;
  g.spec = experiment_spec(index);
  for (std::size_t i = 0; i < kCellsPerGrid; ++i) {
    Cell c;
    c.cell_id = "c" + std::to_string(i);
    c.image_id = "i" + std::to_string(i);
    c.position = i;
    c.source_id = "s" + std::to_string(i);
    c.provenance = i < generated ? Provenance::kGenerated : Provenance::kReal;
    g.cells.push_back(c);
  }
  return g;
}

// Calls generated on the first `n_generated` cells, real on the rest.
std::vector<RaterResponse> calls(const ExperimentGrid& g, std::size_t n_generated) {
  std::vector<RaterResponse> out;
  for (std::size_t i = 0; i < g.cells.size(); ++i) {
    out.push_back({"s", g.spec.index, g.cells[i].cell_id, i < n_generated ? Realness::kGenerated : Realness::kReal,
                   std::nullopt, ""});
  }
  return out;
}

std::vector<RaterResponse> random_session(const StudyPlan& plan, const std::string& session, std::mt19937_64& rng,
                                          const std::set<int>& experiments) {
  std::bernoulli_distribution coin(0.5);
  std::vector<RaterResponse> out;
  for (int index : experiments) {
    const auto& g = plan.experiment(index);
    for (const auto& c : g.cells) {
      RaterResponse r{session, index, c.cell_id, coin(rng) ? Realness::kReal : Realness::kGenerated, std::nullopt,
                      "2026-01-01T00:00:00Z"};
      if (g.spec.class_call_requested) r.class_call = coin(rng) ? NoduleClass::kBenign : NoduleClass::kMalignant;
      out.push_back(r);
    }
  }
  return out;
}

std::set<int> all_experiments() {
  std::set<int> s;
  for (int i = 1; i <= kExperimentCount; ++i) s.insert(i);
  return s;
}

std::vector<testing::RawCall> raw(const std::vector<RaterResponse>& rs) {
  std::vector<testing::RawCall> out;
  for (const auto& r : rs) {
    out.push_back({r.session_id, r.experiment_index, r.cell_id, std::string(to_string(r.realness)),
                   r.class_call ? std::string(dataset::to_string(*r.class_call)) : ""});
  }
  return out;
}

}  // namespace

TEST_SUITE("protocol") {
  TEST_CASE("class conditions, compositions and class calls") {
    std::set<int> all_real, mixed_class, benign_class, malignant_class, class_calls;
    for (const auto& s : protocol()) {
      if (s.composition == Composition::kAllReal) all_real.insert(s.index);
      if (s.class_condition == ClassMode::kMixed) mixed_class.insert(s.index);
      if (s.class_condition == ClassMode::kBenign) benign_class.insert(s.index);
      if (s.class_condition == ClassMode::kMalignant) malignant_class.insert(s.index);
      if (s.class_call_requested) class_calls.insert(s.index);
      CHECK(s.generated_cells() + s.real_cells() == 36);
    }
    CHECK(all_real == std::set<int>{2, 5, 8, 11, 14, 17});
    CHECK(mixed_class == std::set<int>{1, 2, 3, 16, 17, 18});
    CHECK(benign_class == std::set<int>{4, 5, 6, 13, 14, 15});
    CHECK(malignant_class == std::set<int>{7, 8, 9, 10, 11, 12});
    CHECK(class_calls == std::set<int>{4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15});
    // Each class triple holds one grid of each composition.
    for (int t = 0; t < 6; ++t) {
      std::set<Composition> seen;
      for (int k = 1; k <= 3; ++k) seen.insert(experiment_spec(3 * t + k).composition);
      CHECK(seen.size() == 3);
    }
    CHECK(experiment_spec(3).generated_cells() == 18);
    CHECK_THROWS_AS(experiment_spec(19), StudyError);
  }
}

TEST_SUITE("compose") {
  TEST_CASE("valid pools give 18 grids of 36 following the protocol") {
    const auto pools = make_pools(162, 108);
    const auto study = compose_study(pools, 42, "s1");
    const auto& plan = study.plan;
    REQUIRE(plan.experiments.size() == 18);
    CHECK(plan.reused_cells() == 0);
    std::set<std::string> image_ids;
    for (const auto& g : plan.experiments) {
      REQUIRE(g.cells.size() == 36);
      std::size_t generated = 0;
      std::set<std::string> sources;
      for (const auto& c : g.cells) {
        generated += c.provenance == Provenance::kGenerated;
        sources.insert(c.source_id);
        image_ids.insert(c.image_id);
        CHECK(c.cell_id.size() == 16);
        CHECK(c.cell_id.find_first_not_of("0123456789abcdef") == std::string::npos);
        if (auto cls = dataset::class_of(g.spec.class_condition)) {
          CHECK(c.label == cls);
        }
        CHECK(study.images.at(c.image_id).source_id() == c.source_id);
      }
      CHECK(sources.size() == 36);
      CHECK(generated == g.spec.generated_cells());
    }
    CHECK(image_ids.size() == 18 * 36);
    std::size_t benign = 0;
    for (const auto& c : plan.experiment(2).cells) {
      CHECK(c.provenance == Provenance::kReal);
      benign += c.label == NoduleClass::kBenign;
    }
    CHECK(benign == 18);
    CHECK_NOTHROW(plan.validate());
  }

  TEST_CASE("same seed gives an identical plan, another seed does not") {
    const auto pools = make_pools(60, 60);
    const auto a = plan_to_json(compose_study(pools, 7, "s").plan);
    CHECK(a == plan_to_json(compose_study(pools, 7, "s").plan));
    CHECK(a != plan_to_json(compose_study(pools, 8, "s").plan));
  }

  TEST_CASE("plan JSON round trips") {
    const auto plan = compose_study(make_pools(40, 40), 3, "rt").plan;
    const auto back = plan_from_json(plan_to_json(plan));
    CHECK(plan_to_json(back) == plan_to_json(plan));
  }

  TEST_CASE("small pools are reused across experiments and flagged") {
    const auto plan = compose_study(make_pools(36, 36), 5, "r").plan;
    CHECK(plan.reused_cells() > 0);
    for (const auto& c : plan.experiment(1).cells) CHECK_FALSE(c.reused);
    CHECK_NOTHROW(plan.validate());
  }

  TEST_CASE("insufficient pools report the exact shortfall") {
    auto pools = make_pools(36, 36);
    pools.real.erase(std::remove_if(pools.real.begin(), pools.real.end(),
                                    [](const auto& p) {
                                      return p.label() == NoduleClass::kBenign && p.source_id().size() == 4 &&
                                             p.source_id() >= "rb30";
                                    }),
                     pools.real.end());
    auto& mixed = pools.generated[ClassMode::kMixed];
    mixed.erase(mixed.begin() + 20, mixed.end());
    try {
      compose_study(pools, 1, "x");
      FAIL("expected a shortfall");
    } catch (const StudyError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("real benign pool has 30 patches, experiment 5 needs 36 (short by 6)") != std::string::npos);
      CHECK(msg.find("generated mixed pool has 20 patches, experiment 1 needs 36 (short by 16)") != std::string::npos);
    }
  }

  TEST_CASE("curation keeps listed generated patches in order") {
    testing::TempDir dir;
    std::ofstream(dir / "cur.csv") << "pool,source_id\nbenign,gbenign3\nbenign,gbenign1\n";
    auto pools = make_pools(2, 5);
    apply_curation(pools, read_curation(dir / "cur.csv"));
    REQUIRE(pools.generated[ClassMode::kBenign].size() == 2);
    CHECK(pools.generated[ClassMode::kBenign][0].source_id() == "gbenign3");
    CHECK(pools.generated[ClassMode::kMalignant].size() == 5);
    std::ofstream(dir / "bad.csv") << "pool,source_id\nbenign,nope\n";
    CHECK_THROWS_AS(apply_curation(pools, read_curation(dir / "bad.csv")), StudyError);
  }
}

TEST_SUITE("rates") {
  TEST_CASE("FRR examples") {
    auto all_gen = grid_with(36);
    CHECK(format_percent(frr(calls(all_gen, 12), all_gen)->percent()) == "33.33");
    auto all_real = grid_with(0, 2);
    CHECK_FALSE(frr(calls(all_real, 5), all_real).has_value());
    auto mixed = grid_with(18, 3);
    CHECK(format_percent(frr(calls(mixed, 9), mixed)->percent()) == "50.00");
  }

  TEST_CASE("TRR examples") {
    auto all_real = grid_with(0, 2);
    CHECK(format_percent(trr(calls(all_real, 0), all_real)->percent()) == "100.00");
    auto all_gen = grid_with(36);
    CHECK_FALSE(trr(calls(all_gen, 0), all_gen).has_value());
    // Cells 18..35 are real; call the first 6 of them generated.
    auto mixed = grid_with(18, 3);
    CHECK(format_percent(trr(calls(mixed, 24), mixed)->percent()) == "66.67");
  }

  TEST_CASE("half-up rounding") {
    CHECK(format_percent(Rational(1, 8)) == "0.13");      // 0.125
    CHECK(format_percent(Rational(200, 3)) == "66.67");
    CHECK(format_percent(Rational(0)) == "0.00");
    CHECK(percent_hundredths(Rational(100)) == 10000);
  }

  TEST_CASE("incomplete responses are rejected listing missing cells") {
    auto g = grid_with(18, 3);
    auto rs = calls(g, 0);
    rs.erase(rs.begin() + 4);
    rs.erase(rs.begin() + 7);
    CHECK_THROWS_WITH_AS(frr(rs, g), doctest::Contains("missing cells c4,c8"), StudyError);
    rs = calls(g, 0);
    rs.push_back(rs[0]);
    CHECK_THROWS_WITH_AS(trr(rs, g), doctest::Contains("repeated cell c0"), StudyError);
  }

  TEST_CASE("definedness follows composition and calls partition the grid") {
    std::mt19937_64 rng(9);
    const auto plan = compose_study(make_pools(60, 60), 9, "d").plan;
    const auto rs = random_session(plan, "a", rng, all_experiments());
    for (const auto& g : plan.experiments) {
      const auto mine = responses_for(rs, g.spec.index);
      CHECK(frr(mine, g).has_value() == (g.spec.composition != Composition::kAllReal));
      CHECK(trr(mine, g).has_value() == (g.spec.composition != Composition::kAllGenerated));
      std::size_t called_real = 0, called_generated = 0;
      for (const auto& r : mine) (r.realness == Realness::kReal ? called_real : called_generated)++;
      CHECK(called_real + called_generated == 36);
    }
  }
}

TEST_SUITE("agreement") {
  TEST_CASE("identical, opposite and half agreement") {
    StudyPlan plan;
    plan.study_id = "a";
    for (int i = 1; i <= 18; ++i) plan.experiments.push_back(grid_with(18, i));
    // Unique cell ids per grid are not needed for these single-grid checks.
    const auto& g = plan.experiment(1);
    auto a = calls(g, 0);
    CHECK(format_percent(interobserver_agreement(a, a, AgreementDimension::kRealness, plan)->percent()) == "100.00");
    auto b = calls(g, 36);
    CHECK(format_percent(interobserver_agreement(a, b, AgreementDimension::kRealness, plan)->percent()) == "0.00");
    auto c = calls(g, 18);
    CHECK(format_percent(interobserver_agreement(a, c, AgreementDimension::kRealness, plan)->percent()) == "50.00");
    CHECK_FALSE(interobserver_agreement(a, c, AgreementDimension::kClassCall, plan).has_value());
  }

  TEST_CASE("symmetric, coverage-checked, order-invariant") {
    std::mt19937_64 rng(10);
    const auto plan = compose_study(make_pools(60, 60), 10, "sym").plan;
    for (int trial = 0; trial < 20; ++trial) {
      auto a = random_session(plan, "a", rng, all_experiments());
      auto b = random_session(plan, "b", rng, all_experiments());
      for (auto dim : {AgreementDimension::kRealness, AgreementDimension::kClassCall}) {
        const auto ab = interobserver_agreement(a, b, dim, plan);
        CHECK(ab == interobserver_agreement(b, a, dim, plan));
        std::shuffle(a.begin(), a.end(), rng);
        CHECK(ab == interobserver_agreement(a, b, dim, plan));
      }
      CHECK(interobserver_agreement(a, b, AgreementDimension::kClassCall, plan)->total == 12 * 36);
    }
    auto a = random_session(plan, "a", rng, {1, 2});
    auto b = random_session(plan, "b", rng, {1, 3});
    CHECK_THROWS_WITH_AS(interobserver_agreement(a, b, AgreementDimension::kRealness, plan),
                         doctest::Contains("{1,2} vs {1,3}"), StudyError);
  }
}

TEST_SUITE("summarize") {
  TEST_CASE("no sessions and unlocked sessions are rejected") {
    const auto plan = compose_study(make_pools(60, 60), 11, "u").plan;
    CHECK_THROWS_WITH_AS(summarize(plan, {}), doctest::Contains("no sessions"), StudyError);
    std::vector<SessionRecord> sessions = {{"s1", "r1", true, {}}, {"s2", "r2", false, {}}};
    CHECK_THROWS_WITH_AS(summarize(plan, sessions), doctest::Contains("unlocked sessions: s2"), StudyError);
  }

  TEST_CASE("single all-real experiment: FRR absent, TRR defined") {
    std::mt19937_64 rng(12);
    const auto plan = compose_study(make_pools(60, 60), 12, "one").plan;
    std::vector<SessionRecord> sessions = {{"s1", "r1", true, random_session(plan, "s1", rng, {2})}};
    const auto report = summarize(plan, sessions);
    CHECK_FALSE(report.mean_frr.has_value());
    CHECK(report.mean_trr.has_value());
    CHECK_FALSE(report.raters[0].mean_frr.has_value());
    CHECK(report.raters[0].mean_trr.has_value());
    CHECK(report.pairs.empty());
    CHECK_FALSE(report.agreement_realness.has_value());
  }

  TEST_CASE("two scripted raters match the brute-force recomputation byte for byte") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 10; ++trial) {
      const auto plan = compose_study(make_pools(50, 50), 100 + trial, "bf").plan;
      auto a = random_session(plan, "sa", rng, all_experiments());
      auto b = random_session(plan, "sb", rng, all_experiments());
      std::vector<SessionRecord> sessions = {{"sa", "ra", true, a}, {"sb", "rb", true, b}};
      const auto report = serialize_report(summarize(plan, sessions));
      auto all = raw(a);
      for (const auto& r : raw(b)) all.push_back(r);
      std::shuffle(all.begin(), all.end(), rng);
      const auto oracle = testing::brute_force_report(plan_to_json(plan), {{"sa", "ra"}, {"sb", "rb"}}, all);
      CHECK(report == oracle.dump(2) + "\n");

      // Submission order never changes a score.
      std::shuffle(a.begin(), a.end(), rng);
      std::vector<SessionRecord> shuffled = {{"sa", "ra", true, a}, {"sb", "rb", true, b}};
      CHECK(serialize_report(summarize(plan, shuffled)) == report);
    }
  }

  TEST_CASE("three raters average pairwise agreement") {
    std::mt19937_64 rng(14);
    const auto plan = compose_study(make_pools(50, 50), 14, "three").plan;
    std::vector<SessionRecord> sessions;
    std::vector<testing::RawCall> all;
    for (const char* s : {"x", "y", "z"}) {
      auto rs = random_session(plan, s, rng, all_experiments());
      for (const auto& r : raw(rs)) all.push_back(r);
      sessions.push_back({s, std::string("rater-") + s, true, rs});
    }
    const auto report = summarize(plan, sessions);
    CHECK(report.pairs.size() == 3);
    const auto oracle =
        testing::brute_force_report(plan_to_json(plan), {{"x", "rater-x"}, {"y", "rater-y"}, {"z", "rater-z"}}, all);
    CHECK(serialize_report(report) == oracle.dump(2) + "\n");
  }
}
