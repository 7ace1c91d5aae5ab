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

#ifndef THYREX_TIRADS_HPP_
#define THYREX_TIRADS_HPP_

#include <map>
#include <set>
#include <string>
#include <vector>

#include "thyrex/schema.hpp"

namespace thyrex {

// Point-table dimension names as they appear in the config file.
inline constexpr const char* kDimComposition = "composition";
inline constexpr const char* kDimEchogenicity = "echogenicity";
inline constexpr const char* kDimShape = "shape";
inline constexpr const char* kDimMargin = "margin";
inline constexpr const char* kDimFoci = "foci";

/// Maps a surface phrase of one characteristic category to its
/// canonical value (for example "purely cystic" -> "cystic",
/// "taller than wider" -> "taller_than_wide"). Unrecognized text falls
/// back to "indeterminate" ("absent" for SHAPE, whose value set has no
/// indeterminate) with recognized = false. Throws Error for categories
/// outside {COMPOSITION, ECHOGENICITY, SHAPE, MARGINS, ECHOGENIC_FOCI,
/// VASCULARITY}.
struct NormalizeResult {
  std::string value;
  bool recognized = false;
};
NormalizeResult normalize(Category category, const std::string& text);

/// Canonical per-nodule feature values, one per scalar dimension plus a
/// set of echogenic-focus types (whose points are additive).
struct NoduleFeatureSet {
  std::string composition = "absent";
  std::string echogenicity = "absent";
  std::string shape = "absent";
  std::string margin = "absent";
  std::set<std::string> foci;
};

/// Risk points per canonical value and the total-points -> level
/// thresholds, loaded from a config file. The numbers are data, not
/// code; the shipped default file carries the guideline citation they
/// are transcribed from.
class PointTable {
 public:
  /// Parses and validates a config file. Throws ParseError on syntax
  /// errors and Error on missing values or non-monotone thresholds.
  static PointTable load(const std::string& path);

  const std::string& version() const { return version_; }

  /// Points for a canonical value. Throws Error on unknown keys.
  int points(const std::string& dimension, const std::string& value) const;
  bool has(const std::string& dimension, const std::string& value) const;

  /// Level ("TR1".."TR5") of the greatest threshold <= total_points.
  std::string level_for(int total_points) const;

  const std::map<int, std::string>& thresholds() const { return thresholds_; }

 private:
  std::string version_;
  std::map<std::string, std::map<std::string, int>> sections_;
  std::map<int, std::string> thresholds_;  // min_points -> level
};

struct TiradsResult {
  int total_points = 0;
  std::string level;
  NoduleFeatureSet features;            // values the points were taken from
  std::map<std::string, int> breakdown;  // dimension -> points (foci summed)
  std::vector<std::string> missing;      // dimensions with no linked mention
  std::vector<std::string> conflicts;    // dimensions with disagreeing mentions
  std::vector<std::string> warnings;     // unrecognized surface forms
};

/// Scores one profile against `table`. Missing dimensions score the
/// table's "absent" entry and are flagged; conflicting values within a
/// dimension take the highest-point value and are flagged.
TiradsResult score_profile(const NoduleProfile& profile, const PointTable& table);

/// One documented-vs-computed disagreement found by audit_consistency.
struct Discrepancy {
  std::string doc_id;
  std::string anchor_id;
  std::string documented_text;
  std::string documented_level;  // empty when unparseable
  std::string computed_level;
  bool parse_failure = false;
  std::vector<std::string> missing;  // copied from the profile's result
};

/// Compares each profile's linked TIRADS_SCORE / TIRADS_RISK_CATEGORY
/// mentions against the computed level. Agreement produces no record;
/// mismatches and unparseable documented scores each produce one.
std::vector<Discrepancy> audit_consistency(const AnnotatedDocument& doc,
                                           const std::vector<NoduleProfile>& profiles,
                                           const std::vector<TiradsResult>& results);

}  // namespace thyrex

#endif  // THYREX_TIRADS_HPP_
