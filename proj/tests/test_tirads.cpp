// Copyright 2026 The thyrex Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "thyrex/tirads.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>

#include "doctest.h"

using namespace thyrex;

namespace {

const PointTable& table() {
  static const PointTable instance = PointTable::load(THYREX_POINTS_TABLE);
  return instance;
}

// Builds a profile whose characteristics carry the given surface texts.
NoduleProfile profile_with(
    const std::vector<std::pair<Category, std::string>>& items) {
  NoduleProfile profile;
  profile.anchor = {"A1", Category::kThyroidNodule, {0, 6}, "nodule"};
  int next = 1;
  std::size_t pos = 10;
  for (const auto& [category, text] : items) {
    profile.characteristics[category].push_back(
        {"C" + std::to_string(next++), category,
         {pos, pos + text.size()}, text});
    pos += text.size() + 1;
  }
  return profile;
}

}  // namespace

TEST_CASE("normalize maps reported wordings onto canonical values") {
  CHECK(normalize(Category::kComposition, "solid").value == "solid");
  CHECK(normalize(Category::kComposition, "Mostly  Cystic").value == "mixed");
  CHECK(normalize(Category::kComposition, "purely cystic").value == "cystic");
  CHECK(normalize(Category::kEchogenicity, "very hypoechoic").value ==
        "very_hypoechoic");
  CHECK(normalize(Category::kEchogenicity, "can't determine").value ==
        "indeterminate");
  CHECK(normalize(Category::kShape, "oval").value == "wider_than_tall");
  CHECK(normalize(Category::kShape, "taller than wide").value ==
        "taller_than_wide");
  CHECK(normalize(Category::kMargins, "well circumscribed").value == "smooth");
  CHECK(normalize(Category::kMargins, "spiculated").value ==
        "lobulated_irregular");
  CHECK(normalize(Category::kEchogenicFoci, "microcalcifications").value ==
        "punctate");
  CHECK(normalize(Category::kEchogenicFoci, "comet tail artifacts").value ==
        "comet_tail");
  CHECK(normalize(Category::kVascularity, "increased vascularity").value ==
        "high");
}

TEST_CASE("normalize flags unrecognized surfaces and falls back safely") {
  const NormalizeResult unknown = normalize(Category::kComposition, "zzqq");
  CHECK_FALSE(unknown.recognized);
  CHECK(unknown.value == "indeterminate");
  const NormalizeResult shape = normalize(Category::kShape, "zzqq");
  CHECK_FALSE(shape.recognized);
  CHECK(shape.value == "absent");  // unknown shape must not add points
  CHECK(normalize(Category::kComposition, "solid").recognized);
}

TEST_CASE("normalize rejects categories without a scoring dimension") {
  CHECK_THROWS_AS(normalize(Category::kLaterality, "right lobe"), Error);
  CHECK_THROWS_AS(normalize(Category::kThyroidNodule, "nodule"), Error);
}

TEST_CASE("point table carries the published values") {
  CHECK(table().version() == "acr-tirads-2017");
  CHECK(table().points(kDimComposition, "cystic") == 0);
  CHECK(table().points(kDimComposition, "spongiform") == 0);
  CHECK(table().points(kDimComposition, "mixed") == 1);
  CHECK(table().points(kDimComposition, "solid") == 2);
  CHECK(table().points(kDimEchogenicity, "anechoic") == 0);
  CHECK(table().points(kDimEchogenicity, "isoechoic") == 1);
  CHECK(table().points(kDimEchogenicity, "hypoechoic") == 2);
  CHECK(table().points(kDimEchogenicity, "very_hypoechoic") == 3);
  CHECK(table().points(kDimShape, "wider_than_tall") == 0);
  CHECK(table().points(kDimShape, "taller_than_wide") == 3);
  CHECK(table().points(kDimMargin, "smooth") == 0);
  CHECK(table().points(kDimMargin, "lobulated_irregular") == 2);
  CHECK(table().points(kDimMargin, "extrathyroidal_extension") == 3);
  CHECK(table().points(kDimFoci, "comet_tail") == 0);
  CHECK(table().points(kDimFoci, "macrocalcification") == 1);
  CHECK(table().points(kDimFoci, "peripheral_rim") == 2);
  CHECK(table().points(kDimFoci, "punctate") == 3);
  CHECK_THROWS_AS(table().points(kDimShape, "nope"), Error);
  CHECK(table().has(kDimShape, "absent"));
  CHECK_FALSE(table().has(kDimShape, "nope"));
}

TEST_CASE("levels follow the greatest threshold at or below the total") {
  CHECK(table().level_for(0) == "TR1");
  CHECK(table().level_for(1) == "TR1");
  CHECK(table().level_for(2) == "TR2");
  CHECK(table().level_for(3) == "TR3");
  CHECK(table().level_for(4) == "TR4");
  CHECK(table().level_for(6) == "TR4");
  CHECK(table().level_for(7) == "TR5");
  CHECK(table().level_for(40) == "TR5");
}

TEST_CASE("a fully described benign nodule scores TR1") {
  const NoduleProfile profile = profile_with({
      {Category::kComposition, "spongiform"},
      {Category::kEchogenicity, "anechoic"},
      {Category::kShape, "wider than tall"},
      {Category::kMargins, "smooth"},
  });
  const TiradsResult result = score_profile(profile, table());
  CHECK(result.total_points == 0);
  CHECK(result.level == "TR1");
  CHECK(result.missing.empty() == false);  // foci still undocumented
  CHECK(result.conflicts.empty());
  CHECK(result.breakdown.at(kDimComposition) == 0);
}

TEST_CASE("a suspicious solid hypoechoic nodule with punctate foci is TR5") {
  const NoduleProfile profile = profile_with({
      {Category::kComposition, "solid"},
      {Category::kEchogenicity, "hypoechoic"},
      {Category::kEchogenicFoci, "punctate echogenic foci"},
  });
  const TiradsResult result = score_profile(profile, table());
  // 2 (solid) + 2 (hypoechoic) + 0 (shape absent) + 0 (margin absent)
  // + 3 (punctate) = 7.
  CHECK(result.total_points == 7);
  CHECK(result.level == "TR5");
  CHECK(std::find(result.missing.begin(), result.missing.end(), kDimShape) !=
        result.missing.end());
  CHECK(std::find(result.missing.begin(), result.missing.end(), kDimMargin) !=
        result.missing.end());
}

TEST_CASE("missing composition and echogenicity score their fallback points") {
  const NoduleProfile profile = profile_with({});
  const TiradsResult result = score_profile(profile, table());
  // absent composition 2 + absent echogenicity 1 = 3.
  CHECK(result.total_points == 3);
  CHECK(result.level == "TR3");
  CHECK(result.missing.size() == 5);
  CHECK(result.features.composition == "absent");
  CHECK(result.features.shape == "absent");
}

TEST_CASE("echogenic foci points are additive over distinct focus types") {
  const NoduleProfile profile = profile_with({
      {Category::kComposition, "cystic"},
      {Category::kEchogenicity, "anechoic"},
      {Category::kEchogenicFoci, "macrocalcifications"},
      {Category::kEchogenicFoci, "peripheral calcifications"},
      {Category::kEchogenicFoci, "punctate echogenic foci"},
  });
  const TiradsResult result = score_profile(profile, table());
  CHECK(result.total_points == 1 + 2 + 3);
  CHECK(result.features.foci.size() == 3);
  CHECK(result.breakdown.at(kDimFoci) == 6);
}

TEST_CASE("repeated foci of one type count once") {
  const NoduleProfile profile = profile_with({
      {Category::kComposition, "cystic"},
      {Category::kEchogenicity, "anechoic"},
      {Category::kEchogenicFoci, "microcalcifications"},
      {Category::kEchogenicFoci, "punctate echogenic foci"},
  });
  const TiradsResult result = score_profile(profile, table());
  CHECK(result.breakdown.at(kDimFoci) == 3);  // both normalize to punctate
}

TEST_CASE("conflicting mentions take the higher-point value and are flagged") {
  const NoduleProfile profile = profile_with({
      {Category::kComposition, "solid"},
      {Category::kComposition, "purely cystic"},
      {Category::kEchogenicity, "anechoic"},
  });
  const TiradsResult result = score_profile(profile, table());
  CHECK(result.features.composition == "solid");
  REQUIRE(result.conflicts.size() == 1);
  CHECK(result.conflicts[0] == kDimComposition);
}

TEST_CASE("unrecognized surfaces produce warnings, not points") {
  const NoduleProfile profile = profile_with({
      {Category::kComposition, "cystic"},
      {Category::kEchogenicity, "anechoic"},
      {Category::kShape, "banana-shaped"},
  });
  const TiradsResult result = score_profile(profile, table());
  CHECK(result.breakdown.at(kDimShape) == 0);
  CHECK_FALSE(result.warnings.empty());
}

TEST_CASE("bad point tables are rejected with diagnostics") {
  const std::string path = "/tmp/thyrex_bad_points.conf";
  const auto write = [&](const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    out << content;
  };
  // Missing required composition keys.
  write("[meta]\nversion = x\n[composition]\ncystic = 0\n");
  CHECK_THROWS_AS(PointTable::load(path), Error);
  // Thresholds that do not start at zero.
  write(
      "[meta]\nversion = x\n"
      "[composition]\ncystic=0\nspongiform=0\nmixed=1\nsolid=2\n"
      "indeterminate=2\nabsent=2\n"
      "[echogenicity]\nanechoic=0\nhyperechoic=1\nisoechoic=1\nhypoechoic=2\n"
      "very_hypoechoic=3\nindeterminate=1\nabsent=1\n"
      "[shape]\nwider_than_tall=0\ntaller_than_wide=3\nabsent=0\n"
      "[margin]\nsmooth=0\nill_defined=0\nlobulated_irregular=2\n"
      "extrathyroidal_extension=3\nindeterminate=0\nabsent=0\n"
      "[foci]\ncomet_tail=0\nmacrocalcification=1\nperipheral_rim=2\npunctate=3\n"
      "[thresholds]\n1 = TR1\n2 = TR2\n3 = TR3\n4 = TR4\n7 = TR5\n");
  CHECK_THROWS_AS(PointTable::load(path), Error);
  // Duplicate key inside a section.
  write("[composition]\ncystic = 0\ncystic = 1\n");
  CHECK_THROWS_AS(PointTable::load(path), ParseError);
  // Syntax garbage with a line number.
  write("[composition]\nwhat even is this line\n");
  try {
    PointTable::load(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  } catch (const Error&) {
    // Acceptable only if it still names the problem; prefer ParseError.
    FAIL("expected ParseError with a line number");
  }
  std::remove(path.c_str());
}

namespace {

AnnotatedDocument audit_doc(const std::string& documented) {
  AnnotatedDocument doc;
  doc.id = "d";
  doc.text = "A solid hypoechoic nodule; " + documented + ".";
  doc.mentions = {
      {"T1", Category::kComposition, {2, 7}, "solid"},
      {"T2", Category::kEchogenicity, {8, 18}, "hypoechoic"},
      {"T3", Category::kThyroidNodule, {19, 25}, "nodule"},
      {"T4", Category::kTiradsScore, {27, 27 + documented.size()}, documented},
  };
  doc.relations = {
      {"T1", "T3", kAttributeOfRelation},
      {"T2", "T3", kAttributeOfRelation},
      {"T4", "T3", kAttributeOfRelation},
  };
  return doc;
}

}  // namespace

TEST_CASE("audit reports documented levels that disagree with computed ones") {
  const AnnotatedDocument doc = audit_doc("TI-RADS 2");
  NoduleProfile profile;
  profile.anchor = doc.mentions[2];
  profile.characteristics[Category::kComposition].push_back(doc.mentions[0]);
  profile.characteristics[Category::kEchogenicity].push_back(doc.mentions[1]);
  profile.characteristics[Category::kTiradsScore].push_back(doc.mentions[3]);
  const TiradsResult result = score_profile(profile, table());
  CHECK(result.level == "TR4");  // 2 + 2 = 4
  const auto discrepancies = audit_consistency(doc, {profile}, {result});
  REQUIRE(discrepancies.size() == 1);
  CHECK(discrepancies[0].documented_level == "TR2");
  CHECK(discrepancies[0].computed_level == "TR4");
  CHECK_FALSE(discrepancies[0].parse_failure);
}

TEST_CASE("audit stays silent when documented and computed levels agree") {
  const AnnotatedDocument doc = audit_doc("TI-RADS 4");
  NoduleProfile profile;
  profile.anchor = doc.mentions[2];
  profile.characteristics[Category::kComposition].push_back(doc.mentions[0]);
  profile.characteristics[Category::kEchogenicity].push_back(doc.mentions[1]);
  profile.characteristics[Category::kTiradsScore].push_back(doc.mentions[3]);
  const TiradsResult result = score_profile(profile, table());
  const auto discrepancies = audit_consistency(doc, {profile}, {result});
  CHECK(discrepancies.empty());
}

TEST_CASE("audit flags unparseable documented scores") {
  AnnotatedDocument doc = audit_doc("TI-RADS high");
  NoduleProfile profile;
  profile.anchor = doc.mentions[2];
  profile.characteristics[Category::kTiradsScore].push_back(doc.mentions[3]);
  const TiradsResult result = score_profile(profile, table());
  const auto discrepancies = audit_consistency(doc, {profile}, {result});
  REQUIRE(discrepancies.size() == 1);
  CHECK(discrepancies[0].parse_failure);
}

TEST_CASE("audit requires profiles and results to align") {
  const AnnotatedDocument doc = audit_doc("TI-RADS 4");
  NoduleProfile profile;
  profile.anchor = doc.mentions[2];
  CHECK_THROWS_AS(audit_consistency(doc, {profile}, {}), Error);
}
