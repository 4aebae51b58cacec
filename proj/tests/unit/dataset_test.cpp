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

// Manifest parsing, consensus rules, pool I/O and class subsets.

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "nodulegan/dataset/consensus.hpp"
#include "nodulegan/dataset/manifest.hpp"
#include "nodulegan/dataset/pool.hpp"
#include "nodulegan/imgproc/image_io.hpp"
#include "manifest_fixture.hpp"
#include "temp_dir.hpp"

using namespace nodulegan::dataset;
namespace fs = std::filesystem;

namespace {

using nodulegan::testing::FixtureRow;
using nodulegan::testing::kTenRows;
using nodulegan::testing::ratings_text;

void write_fixture(const fs::path& dir, const std::vector<FixtureRow>& rows) {
  nodulegan::testing::write_manifest_fixture(dir, rows);
}

std::vector<NoduleAnnotation> annotations_of(const std::vector<FixtureRow>& rows) {
  std::vector<NoduleAnnotation> out;
  for (const auto& r : rows) out.push_back({r.id, fs::path(r.id) += ".png", r.diameter, r.ratings});
  return out;
}

ImagePatch blank_loader(const NoduleAnnotation& a, NoduleClass label) {
  return ImagePatch(std::vector<double>(56 * 56, 0.0), Provenance::kReal, label, a.nodule_id);
}

std::vector<std::pair<std::string, NoduleClass>> kept_summary(const FilterResult& r) {
  std::vector<std::pair<std::string, NoduleClass>> out;
  for (const auto& n : r.kept) out.emplace_back(n.nodule_id, n.label);
  return out;
}

LabeledNodule labeled(const std::string& id, NoduleClass c) {
  return {id, blank_loader({id, {}, 5.0, {}}, c), c, c == NoduleClass::kBenign ? 2.0 : 4.0, {}};
}

}  // namespace

TEST_SUITE("manifest") {
  TEST_CASE("empty manifest gives no annotations and no errors") {
    std::istringstream empty("");
    auto r = parse_annotations(empty, ".", false);
    CHECK(r.annotations.empty());
    CHECK(r.ok());
    std::istringstream header_only("nodule_id,patch_path,diameter_mm,ratings\n");
    CHECK(parse_annotations(header_only, ".", false).annotations.empty());
  }

  TEST_CASE("ten-row fixture parses to the authored annotations") {
    nodulegan::testing::TempDir dir;
    write_fixture(dir.path(), kTenRows);
    auto r = parse_annotations(dir / "manifest.csv");
    REQUIRE(r.ok());
    REQUIRE(r.annotations.size() == 10);
    for (std::size_t i = 0; i < 10; ++i) {
      CHECK(r.annotations[i].nodule_id == kTenRows[i].id);
      CHECK(r.annotations[i].diameter_mm == kTenRows[i].diameter);
      CHECK(r.annotations[i].ratings == kTenRows[i].ratings);
      CHECK(fs::exists(r.annotations[i].patch_path));
    }
  }

  TEST_CASE("rating 6 is a row error naming the field") {
    std::istringstream in("a,p.png,5,1;2;2\nb,q.png,5,4;6;4\n");
    auto r = parse_annotations(in, ".", false);
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].line == 2);
    CHECK(r.errors[0].field == "ratings");
    CHECK(r.annotations.size() == 1);
    CHECK(r.summary().find("ratings") != std::string::npos);
  }

  TEST_CASE("missing file, duplicate id and bad diameter are reported per row") {
    std::istringstream in(
        "nodule_id,patch_path,diameter_mm,ratings\n"
        "a,p.png,5,1;2;2\n"
        "b,p.png,-1,1;2;2\n"
        "c,p.png,4,1;2;2\n"
        "c,p.png,4,1;2;2\n"
        "d,p.png\n");
    auto r = parse_annotations(in, ".", false);
    REQUIRE(r.errors.size() == 3);
    CHECK(r.errors[0].line == 3);
    CHECK(r.errors[0].field == "diameter_mm");
    CHECK(r.errors[1].line == 5);
    CHECK(r.errors[1].message.find("duplicate") != std::string::npos);
    CHECK(r.errors[2].line == 6);
    CHECK(r.errors[2].field == "row");
    CHECK(r.annotations.size() == 2);

    nodulegan::testing::TempDir dir;
    std::istringstream missing("a,nope.png,5,1;2;2\n");
    auto m = parse_annotations(missing, dir.path(), true);
    REQUIRE(m.errors.size() == 1);
    CHECK(m.errors[0].field == "patch_path");
    CHECK(m.errors[0].line == 1);
  }
}

TEST_SUITE("consensus") {
  TEST_CASE("median with even counts averages the middle pair") {
    const int odd[] = {5, 1, 2};
    const int even[] = {4, 5, 4, 5};
    const int split[] = {2, 4};
    CHECK(consensus_rating(odd) == 2.0);
    CHECK(consensus_rating(even) == 4.5);
    CHECK(consensus_rating(split) == 3.0);
  }

  TEST_CASE("documented rule cases") {
    auto d = decide({"a", {}, 5.0, {1, 2, 2}});
    CHECK(d.kept());
    CHECK(d.label == NoduleClass::kBenign);
    d = decide({"b", {}, 10.0, {4, 5, 4, 5}});
    CHECK(d.label == NoduleClass::kMalignant);
    d = decide({"c", {}, 5.0, {3, 4, 3}});
    CHECK_FALSE(d.kept());
    CHECK(d.reasons == std::vector<ExclusionReason>{ExclusionReason::kIndeterminate});
    d = decide({"d", {}, 5.0, {2, 4}});
    CHECK_FALSE(d.kept());
    CHECK(std::count(d.reasons.begin(), d.reasons.end(), ExclusionReason::kTooFewReaders) == 1);
    d = decide({"e", {}, 2.5, {1, 1, 1}});
    CHECK(d.reasons == std::vector<ExclusionReason>{ExclusionReason::kTooSmall});
  }

  TEST_CASE("ten-row fixture yields the rule-forced partition") {
    auto result = consensus_filter(annotations_of(kTenRows), blank_loader);
    using C = NoduleClass;
    const std::vector<std::pair<std::string, NoduleClass>> expected = {
        {"n01", C::kBenign}, {"n02", C::kMalignant}, {"n06", C::kMalignant},
        {"n07", C::kBenign}, {"n08", C::kMalignant}, {"n09", C::kBenign}};
    CHECK(kept_summary(result) == expected);
    std::vector<std::string> excluded;
    for (const auto& e : result.excluded) excluded.push_back(e.annotation.nodule_id);
    CHECK(excluded == std::vector<std::string>{"n03", "n04", "n05", "n10"});
  }

  TEST_CASE("order independence over 50 permutations") {
    auto annotations = annotations_of(kTenRows);
    const auto reference = kept_summary(consensus_filter(annotations, blank_loader));
    std::mt19937_64 rng(31);
    for (int i = 0; i < 50; ++i) {
      std::shuffle(annotations.begin(), annotations.end(), rng);
      CHECK(kept_summary(consensus_filter(annotations, blank_loader)) == reference);
    }
  }

  TEST_CASE("random manifests: partition, idempotence and recomputable labels") {
    std::mt19937_64 rng(32);
    std::uniform_int_distribution<int> rating(1, 5), readers(1, 6);
    std::uniform_real_distribution<double> diameter(1.0, 30.0);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<NoduleAnnotation> in;
      for (int i = 0; i < 20; ++i) {
        NoduleAnnotation a{"x" + std::to_string(i), {}, diameter(rng), {}};
        for (int k = readers(rng); k > 0; --k) a.ratings.push_back(rating(rng));
        in.push_back(a);
      }
      auto r = consensus_filter(in, blank_loader);
      CHECK(r.kept.size() + r.excluded.size() == in.size());
      std::set<std::string> ids;
      for (const auto& n : r.kept) ids.insert(n.nodule_id);
      for (const auto& e : r.excluded) {
        CHECK_FALSE(e.reasons.empty());
        ids.insert(e.annotation.nodule_id);
      }
      CHECK(ids.size() == in.size());
      for (const auto& n : r.kept) {
        const double c = consensus_rating(n.ratings);
        CHECK(c != 3.0);
        CHECK(n.label == (c < 3.0 ? NoduleClass::kBenign : NoduleClass::kMalignant));
      }
      // Feeding the kept set back through the filter keeps all of it.
      std::vector<NoduleAnnotation> again;
      for (const auto& n : r.kept) {
        auto it = std::find_if(in.begin(), in.end(), [&](auto& a) { return a.nodule_id == n.nodule_id; });
        again.push_back(*it);
      }
      auto r2 = consensus_filter(again, blank_loader);
      CHECK(kept_summary(r2) == kept_summary(r));
      CHECK(r2.excluded.empty());
    }
  }
}

TEST_SUITE("pool") {
  TEST_CASE("class_subset counts and shuffling") {
    std::vector<LabeledNodule> pool = {labeled("b1", NoduleClass::kBenign), labeled("m1", NoduleClass::kMalignant),
                                       labeled("b2", NoduleClass::kBenign), labeled("m2", NoduleClass::kMalignant),
                                       labeled("b3", NoduleClass::kBenign)};
    CHECK(class_subset(pool, ClassMode::kBenign, 1).size() == 3);
    CHECK(class_subset(pool, ClassMode::kMalignant, 1).size() == 2);
    CHECK(class_subset(pool, ClassMode::kMixed, 1).size() == 5);
    auto ids = [](const std::vector<LabeledNodule>& v) {
      std::vector<std::string> out;
      for (const auto& n : v) out.push_back(n.nodule_id);
      return out;
    };
    CHECK(ids(class_subset(pool, ClassMode::kMixed, 9)) == ids(class_subset(pool, ClassMode::kMixed, 9)));
  }

  TEST_CASE("empty class subset reports per-class counts") {
    std::vector<LabeledNodule> pool = {labeled("b1", NoduleClass::kBenign), labeled("b2", NoduleClass::kBenign)};
    try {
      class_subset(pool, ClassMode::kMalignant, 1);
      FAIL("expected an error");
    } catch (const DatasetError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("2 benign") != std::string::npos);
      CHECK(msg.find("0 malignant") != std::string::npos);
    }
  }

  TEST_CASE("prepared pool round trips through disk") {
    nodulegan::testing::TempDir dir;
    write_fixture(dir / "src", kTenRows);
    auto parsed = parse_annotations(dir / "src" / "manifest.csv");
    REQUIRE(parsed.ok());
    auto result = consensus_filter(parsed.annotations, file_patch_loader());
    REQUIRE(result.kept.size() == 6);
    // Fixture levels 10, 30, ... map onto the model range.
    CHECK(result.kept[0].patch.pixels()[0] == doctest::Approx(10 / 127.5 - 1.0));

    write_pool(dir / "pool", result);
    CHECK(fs::exists(dir / "pool" / "exclusions.csv"));
    auto back = read_pool(dir / "pool");
    REQUIRE(back.size() == result.kept.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      CHECK(back[i].nodule_id == result.kept[i].nodule_id);
      CHECK(back[i].label == result.kept[i].label);
      CHECK(back[i].ratings == result.kept[i].ratings);
      CHECK(back[i].consensus_rating == result.kept[i].consensus_rating);
      CHECK(back[i].patch.pixels() == result.kept[i].patch.pixels());
    }
  }

  TEST_CASE("patch set keeps provenance, class and seed") {
    nodulegan::testing::TempDir dir;
    std::vector<ImagePatch> patches;
    patches.emplace_back(std::vector<double>(56 * 56, 1.0), Provenance::kGenerated, NoduleClass::kMalignant,
                         "g0", 77u);
    patches.emplace_back(std::vector<double>(56 * 56, -1.0), Provenance::kReal, std::nullopt, "r,0");
    write_patch_set(dir.path(), patches);
    auto back = read_patch_set(dir.path());
    REQUIRE(back.size() == 2);
    CHECK(back[0].provenance() == Provenance::kGenerated);
    CHECK(back[0].label() == NoduleClass::kMalignant);
    CHECK(back[0].seed() == std::optional<std::uint64_t>(77));
    CHECK(back[1].source_id() == "r,0");
    CHECK_FALSE(back[1].label().has_value());
    CHECK(back[1].pixels() == patches[1].pixels());
  }

  TEST_CASE("patches outside the model range are rejected") {
    CHECK_THROWS_AS(ImagePatch(std::vector<double>(56 * 56, 1.5), Provenance::kReal, std::nullopt, "x"),
                    DatasetError);
    CHECK_THROWS_AS(ImagePatch(std::vector<double>(10, 0.0), Provenance::kReal, std::nullopt, "x"), DatasetError);
  }
}
