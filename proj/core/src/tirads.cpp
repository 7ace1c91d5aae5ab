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
#include <cctype>
#include <cstdlib>
#include <fstream>

namespace thyrex {

namespace {

// Lowercases, trims, and collapses whitespace runs so surface lookup
// keys are stable ("Purely  Cystic " -> "purely cystic").
std::string normalize_key(const std::string& text) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

using SurfaceMap = std::map<std::string, std::string>;

const SurfaceMap& composition_surfaces() {
  static const SurfaceMap map = {
      {"cystic", "cystic"},
      {"purely cystic", "cystic"},
      {"completely cystic", "cystic"},
      {"almost completely cystic", "cystic"},
      {"simple cyst", "cystic"},
      {"spongiform", "spongiform"},
      {"honeycomb", "spongiform"},
      {"mixed", "mixed"},
      {"mixed cystic and solid", "mixed"},
      {"mixed solid and cystic", "mixed"},
      {"solid and cystic", "mixed"},
      {"partially cystic", "mixed"},
      {"mostly cystic", "mixed"},
      {"predominantly cystic", "mixed"},
      {"solid", "solid"},
      {"mostly solid", "solid"},
      {"predominantly solid", "solid"},
      {"almost completely solid", "solid"},
      {"entirely solid", "solid"},
  };
  return map;
}

const SurfaceMap& echogenicity_surfaces() {
  static const SurfaceMap map = {
      {"anechoic", "anechoic"},
      {"hyperechoic", "hyperechoic"},
      {"isoechoic", "isoechoic"},
      {"hypoechoic", "hypoechoic"},
      {"hypoechogenic", "hypoechoic"},
      {"mildly hypoechoic", "hypoechoic"},
      {"very hypoechoic", "very_hypoechoic"},
      {"markedly hypoechoic", "very_hypoechoic"},
      {"profoundly hypoechoic", "very_hypoechoic"},
      {"can't determine", "indeterminate"},
      {"cannot determine", "indeterminate"},
  };
  return map;
}

const SurfaceMap& shape_surfaces() {
  static const SurfaceMap map = {
      {"wider than tall", "wider_than_tall"},
      {"wider-than-tall", "wider_than_tall"},
      {"wider than taller", "wider_than_tall"},
      {"oval", "wider_than_tall"},
      {"ovoid", "wider_than_tall"},
      {"round", "wider_than_tall"},
      {"taller than wide", "taller_than_wide"},
      {"taller than wider", "taller_than_wide"},
      {"taller-than-wide", "taller_than_wide"},
      {"taller than it is wide", "taller_than_wide"},
  };
  return map;
}

const SurfaceMap& margin_surfaces() {
  static const SurfaceMap map = {
      {"smooth", "smooth"},
      {"well defined", "smooth"},
      {"well-defined", "smooth"},
      {"well circumscribed", "smooth"},
      {"well-circumscribed", "smooth"},
      {"discrete", "smooth"},
      {"ill defined", "ill_defined"},
      {"ill-defined", "ill_defined"},
      {"poorly defined", "ill_defined"},
      {"indistinct", "ill_defined"},
      {"lobulated", "lobulated_irregular"},
      {"microlobulated", "lobulated_irregular"},
      {"irregular", "lobulated_irregular"},
      {"lobulated or irregular", "lobulated_irregular"},
      {"spiculated", "lobulated_irregular"},
      {"extra thyroidal extension", "extrathyroidal_extension"},
      {"extrathyroidal extension", "extrathyroidal_extension"},
      {"extra-thyroidal extension", "extrathyroidal_extension"},
  };
  return map;
}

const SurfaceMap& foci_surfaces() {
  static const SurfaceMap map = {
      {"comet tail artifact", "comet_tail"},
      {"comet tail artifacts", "comet_tail"},
      {"comet-tail artifact", "comet_tail"},
      {"comet tail", "comet_tail"},
      {"macrocalcification", "macrocalcification"},
      {"macrocalcifications", "macrocalcification"},
      {"macro calcification", "macrocalcification"},
      {"coarse calcification", "macrocalcification"},
      {"coarse calcifications", "macrocalcification"},
      {"peripheral calcification", "peripheral_rim"},
      {"peripheral calcifications", "peripheral_rim"},
      {"rim calcification", "peripheral_rim"},
      {"rim calcifications", "peripheral_rim"},
      {"peripheral rim calcification", "peripheral_rim"},
      {"eggshell calcification", "peripheral_rim"},
      {"punctate echogenic foci", "punctate"},
      {"punctate foci", "punctate"},
      {"microcalcifications", "punctate"},
      {"microcalcification", "punctate"},
      {"echogenic foci", "punctate"},
  };
  return map;
}

const SurfaceMap& vascularity_surfaces() {
  static const SurfaceMap map = {
      {"high", "high"},
      {"increased", "high"},
      {"high vascularity", "high"},
      {"increased vascularity", "high"},
      {"hypervascular", "high"},
      {"normal", "normal"},
      {"normal vascularity", "normal"},
      {"low", "low"},
      {"decreased", "low"},
      {"low vascularity", "low"},
      {"decreased vascularity", "low"},
      {"hypovascular", "low"},
  };
  return map;
}

}  // namespace

NormalizeResult normalize(Category category, const std::string& text) {
  const SurfaceMap* surfaces = nullptr;
  std::string fallback = "indeterminate";
  switch (category) {
    case Category::kComposition:
      surfaces = &composition_surfaces();
      break;
    case Category::kEchogenicity:
      surfaces = &echogenicity_surfaces();
      break;
    case Category::kShape:
      surfaces = &shape_surfaces();
      fallback = "absent";  // the shape value set has no indeterminate
      break;
    case Category::kMargins:
      surfaces = &margin_surfaces();
      break;
    case Category::kEchogenicFoci:
      surfaces = &foci_surfaces();
      break;
    case Category::kVascularity:
      surfaces = &vascularity_surfaces();
      break;
    default:
      throw Error("normalize: unsupported category " + render_category(category));
  }
  const auto it = surfaces->find(normalize_key(text));
  if (it == surfaces->end()) return {fallback, false};
  return {it->second, true};
}

// ---------------------------------------------------------------------------
// PointTable

PointTable PointTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open point table: " + path);

  PointTable table;
  std::string section;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    const std::string key_line = normalize_key(line);
    if (key_line.empty()) continue;
    if (key_line.front() == '[') {
      if (key_line.back() != ']')
        throw ParseError("unterminated section header", line_no);
      section = key_line.substr(1, key_line.size() - 2);
      continue;
    }
    const std::size_t eq = key_line.find('=');
    if (eq == std::string::npos || section.empty())
      throw ParseError("expected `key = value` inside a section", line_no);
    std::string key = key_line.substr(0, eq);
    std::string value = key_line.substr(eq + 1);
    while (!key.empty() && key.back() == ' ') key.pop_back();
    while (!value.empty() && value.front() == ' ') value.erase(value.begin());
    if (key.empty() || value.empty())
      throw ParseError("empty key or value", line_no);

    if (section == "meta") {
      if (key == "version") table.version_ = value;
      continue;
    }
    if (section == "thresholds") {
      char* end = nullptr;
      const long min_points = std::strtol(key.c_str(), &end, 10);
      if (end == nullptr || *end != '\0' || min_points < 0)
        throw ParseError("threshold key must be a non-negative integer", line_no);
      if (value.size() != 3 || value.compare(0, 2, "tr") != 0 || value[2] < '1' ||
          value[2] > '5')
        throw ParseError("threshold level must be TR1..TR5", line_no);
      const std::string level = "TR" + value.substr(2);
      if (!table.thresholds_.emplace(static_cast<int>(min_points), level).second)
        throw ParseError("duplicate threshold", line_no);
      continue;
    }
    char* end = nullptr;
    const long points = std::strtol(value.c_str(), &end, 10);
    if (end == nullptr || *end != '\0' || points < 0)
      throw ParseError("points must be a non-negative integer", line_no);
    if (!table.sections_[section].emplace(key, static_cast<int>(points)).second)
      throw ParseError("duplicate value in section " + section, line_no);
  }

  const std::map<std::string, std::vector<std::string>> required = {
      {kDimComposition, {"cystic", "spongiform", "mixed", "solid", "indeterminate", "absent"}},
      {kDimEchogenicity, {"anechoic", "hyperechoic", "isoechoic", "hypoechoic",
                          "very_hypoechoic", "indeterminate", "absent"}},
      {kDimShape, {"wider_than_tall", "taller_than_wide", "absent"}},
      {kDimMargin, {"smooth", "ill_defined", "lobulated_irregular",
                    "extrathyroidal_extension", "indeterminate", "absent"}},
      {kDimFoci, {"comet_tail", "macrocalcification", "peripheral_rim", "punctate"}},
  };
  for (const auto& [dimension, values] : required) {
    const auto sit = table.sections_.find(dimension);
    if (sit == table.sections_.end())
      throw Error("point table missing section [" + dimension + "]: " + path);
    for (const std::string& value : values) {
      if (sit->second.find(value) == sit->second.end())
        throw Error("point table missing " + dimension + "." + value + ": " + path);
    }
  }
  if (table.thresholds_.empty() || table.thresholds_.begin()->first != 0)
    throw Error("thresholds must start at 0 so every total maps to a level: " + path);
  int previous = 0;
  for (const auto& [min_points, level] : table.thresholds_) {
    const int index = level[2] - '0';
    if (index < previous)
      throw Error("threshold levels must be monotone in points: " + path);
    previous = index;
  }
  return table;
}

int PointTable::points(const std::string& dimension, const std::string& value) const {
  const auto sit = sections_.find(dimension);
  if (sit != sections_.end()) {
    const auto vit = sit->second.find(value);
    if (vit != sit->second.end()) return vit->second;
  }
  throw Error("point table has no entry " + dimension + "." + value);
}

bool PointTable::has(const std::string& dimension, const std::string& value) const {
  const auto sit = sections_.find(dimension);
  return sit != sections_.end() && sit->second.find(value) != sit->second.end();
}

std::string PointTable::level_for(int total_points) const {
  std::string level = thresholds_.begin()->second;
  for (const auto& [min_points, mapped] : thresholds_) {
    if (min_points > total_points) break;
    level = mapped;
  }
  return level;
}

// ---------------------------------------------------------------------------
// Scoring

namespace {

struct DimensionSpec {
  const char* name;
  Category category;
  std::string NoduleFeatureSet::* field;
};

const DimensionSpec kScalarDimensions[] = {
    {kDimComposition, Category::kComposition, &NoduleFeatureSet::composition},
    {kDimEchogenicity, Category::kEchogenicity, &NoduleFeatureSet::echogenicity},
    {kDimShape, Category::kShape, &NoduleFeatureSet::shape},
    {kDimMargin, Category::kMargins, &NoduleFeatureSet::margin},
};

}  // namespace

TiradsResult score_profile(const NoduleProfile& profile, const PointTable& table) {
  TiradsResult result;

  for (const DimensionSpec& dim : kScalarDimensions) {
    const auto it = profile.characteristics.find(dim.category);
    if (it == profile.characteristics.end() || it->second.empty()) {
      result.features.*dim.field = "absent";
      result.missing.push_back(dim.name);
      result.breakdown[dim.name] = table.points(dim.name, "absent");
      result.total_points += result.breakdown[dim.name];
      continue;
    }
    std::set<std::string> values;
    for (const EntityMention& mention : it->second) {
      const NormalizeResult normalized = normalize(dim.category, mention.text);
      if (!normalized.recognized)
        result.warnings.push_back(std::string(dim.name) + ": unrecognized \"" +
                                  mention.text + "\"");
      values.insert(normalized.value);
    }
    // Conflicting values take the highest-point reading.
    std::string chosen;
    int chosen_points = -1;
    for (const std::string& value : values) {
      const int p = table.points(dim.name, value);
      if (p > chosen_points) {
        chosen = value;
        chosen_points = p;
      }
    }
    if (values.size() > 1) result.conflicts.push_back(dim.name);
    result.features.*dim.field = chosen;
    result.breakdown[dim.name] = chosen_points;
    result.total_points += chosen_points;
  }

  int foci_points = 0;
  const auto foci_it = profile.characteristics.find(Category::kEchogenicFoci);
  if (foci_it == profile.characteristics.end() || foci_it->second.empty()) {
    result.missing.push_back(kDimFoci);
  } else {
    for (const EntityMention& mention : foci_it->second) {
      const NormalizeResult normalized = normalize(Category::kEchogenicFoci, mention.text);
      if (!normalized.recognized) {
        result.warnings.push_back(std::string(kDimFoci) + ": unrecognized \"" +
                                  mention.text + "\"");
        continue;  // no focus type identified, nothing to add
      }
      result.features.foci.insert(normalized.value);
    }
    for (const std::string& focus : result.features.foci)
      foci_points += table.points(kDimFoci, focus);
  }
  result.breakdown[kDimFoci] = foci_points;
  result.total_points += foci_points;

  result.level = table.level_for(result.total_points);
  return result;
}

// ---------------------------------------------------------------------------
// Consistency audit

namespace {

// "TI-RADS 4", "TIRADS: 3", "ACR-TIRADS 5", "TR4" all document a level
// via their first digit; risk phrases map through the ACR wording.
std::string documented_level(Category category, const std::string& text) {
  for (char c : text) {
    if (c >= '1' && c <= '5') return std::string("TR") + c;
  }
  if (category == Category::kTiradsRiskCategory) {
    static const SurfaceMap phrases = {
        {"benign", "TR1"},          {"not suspicious", "TR2"},
        {"mildly suspicious", "TR3"}, {"moderately suspicious", "TR4"},
        {"highly suspicious", "TR5"},
    };
    const auto it = phrases.find(normalize_key(text));
    if (it != phrases.end()) return it->second;
  }
  return "";
}

}  // namespace

std::vector<Discrepancy> audit_consistency(const AnnotatedDocument& doc,
                                           const std::vector<NoduleProfile>& profiles,
                                           const std::vector<TiradsResult>& results) {
  if (profiles.size() != results.size())
    throw Error("audit_consistency: profile/result count mismatch");

  std::vector<Discrepancy> discrepancies;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const NoduleProfile& profile = profiles[i];
    const TiradsResult& result = results[i];
    for (const Category category :
         {Category::kTiradsScore, Category::kTiradsRiskCategory}) {
      const auto it = profile.characteristics.find(category);
      if (it == profile.characteristics.end()) continue;
      for (const EntityMention& mention : it->second) {
        const std::string documented = documented_level(category, mention.text);
        if (documented == result.level) continue;
        Discrepancy record;
        record.doc_id = doc.id;
        record.anchor_id = profile.anchor.id;
        record.documented_text = mention.text;
        record.documented_level = documented;
        record.computed_level = result.level;
        record.parse_failure = documented.empty();
        record.missing = result.missing;
        discrepancies.push_back(std::move(record));
      }
    }
  }
  return discrepancies;
}

}  // namespace thyrex
