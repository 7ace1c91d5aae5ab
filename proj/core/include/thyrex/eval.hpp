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

#ifndef THYREX_EVAL_HPP_
#define THYREX_EVAL_HPP_

#include <map>
#include <string>
#include <vector>

#include "thyrex/schema.hpp"

namespace thyrex {

enum class MatchMode {
  kStrict,   // same category and identical character span
  kLenient,  // same category and >= 1 overlapping character
};

const std::string& render_match_mode(MatchMode mode);

/// Micro-average counts with derived scores. Zero denominators yield 0
/// so reports stay total.
struct PRF {
  long tp = 0;
  long fp = 0;
  long fn = 0;

  double precision() const {
    return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  double recall() const {
    return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
  double f1() const {
    const double p = precision();
    const double r = recall();
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }

  PRF& operator+=(const PRF& other) {
    tp += other.tp;
    fp += other.fp;
    fn += other.fn;
    return *this;
  }
};

/// One-to-one matching between a document's gold and predicted
/// mentions. Indices refer to the input vectors; OTHER mentions never
/// match and appear in neither list.
struct MatchResult {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (gold, pred)
  std::vector<std::size_t> unmatched_gold;
  std::vector<std::size_t> unmatched_pred;
};

/// STRICT pairs exact (category, span) duplicates in text order.
/// LENIENT first takes the exact pairs, then greedily matches the
/// remaining same-category overlaps by (largest overlap, earliest gold
/// start, earliest pred start).
MatchResult match_mentions(const std::vector<EntityMention>& gold,
                           const std::vector<EntityMention>& pred,
                           MatchMode mode);

struct CategoryScores {
  PRF strict;
  PRF lenient;
};

struct MatchRecord {
  std::string doc_id;
  MatchMode mode = MatchMode::kStrict;
  std::string gold_id;
  std::string pred_id;
};

struct EvalReport {
  std::map<Category, CategoryScores> per_category;  // all 16, canonical order
  CategoryScores overall;                           // micro-averaged sums
  std::vector<std::string> missing_documents;       // ids present on one side only
  std::vector<MatchRecord> matches;                 // audit trail
};

/// Span-level NER scoring over aligned document collections. Documents
/// missing on either side are listed and scored against an empty set,
/// unless `error_on_missing`. Micro-averaged; both modes in one pass.
EvalReport score_ner(const std::vector<AnnotatedDocument>& gold,
                     const std::vector<AnnotatedDocument>& pred,
                     bool error_on_missing = false);

/// Relation scoring: a predicted relation counts as TP iff both
/// endpoint mentions match gold mentions under `endpoint_mode` and a
/// gold relation joins those two gold mentions; each gold relation is
/// credited at most once. Throws Error on relations with dangling
/// mention ids.
PRF score_relations(const std::vector<AnnotatedDocument>& gold,
                    const std::vector<AnnotatedDocument>& pred,
                    MatchMode endpoint_mode = MatchMode::kStrict);

/// Fixed-width text table: one row per category in canonical order plus
/// Overall, strict and lenient column groups, 4-decimal scores. The
/// header states the match-mode definitions and the averaging.
std::string render_report(const EvalReport& report);

/// Machine-readable twin of render_report:
/// {mode: {CATEGORY: {tp,fp,fn,precision,recall,f1}, overall: {...}}}.
std::string report_to_json(const EvalReport& report);

}  // namespace thyrex

#endif  // THYREX_EVAL_HPP_
