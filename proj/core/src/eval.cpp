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

#include "thyrex/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <tuple>

#include "json.hpp"

namespace thyrex {

const std::string& render_match_mode(MatchMode mode) {
  static const std::string kStrictName = "strict";
  static const std::string kLenientName = "lenient";
  return mode == MatchMode::kStrict ? kStrictName : kLenientName;
}

namespace {

// Text order over indices into a mention vector.
std::vector<std::size_t> ordered_indices(const std::vector<EntityMention>& mentions) {
  std::vector<std::size_t> indices;
  for (std::size_t i = 0; i < mentions.size(); ++i) {
    if (mentions[i].category != Category::kOther) indices.push_back(i);
  }
  std::sort(indices.begin(), indices.end(), [&](std::size_t a, std::size_t b) {
    const EntityMention& ma = mentions[a];
    const EntityMention& mb = mentions[b];
    if (ma.span.start != mb.span.start) return ma.span.start < mb.span.start;
    if (ma.span.end != mb.span.end) return ma.span.end < mb.span.end;
    return a < b;
  });
  return indices;
}

std::size_t overlap_length(const Span& a, const Span& b) {
  const std::size_t lo = std::max(a.start, b.start);
  const std::size_t hi = std::min(a.end, b.end);
  return hi > lo ? hi - lo : 0;
}

}  // namespace

MatchResult match_mentions(const std::vector<EntityMention>& gold,
                           const std::vector<EntityMention>& pred,
                           MatchMode mode) {
  const std::vector<std::size_t> gold_order = ordered_indices(gold);
  const std::vector<std::size_t> pred_order = ordered_indices(pred);

  std::vector<bool> gold_used(gold.size(), false);
  std::vector<bool> pred_used(pred.size(), false);
  MatchResult result;

  // Exact (category, span) pairs first, in text order on both sides.
  std::map<std::tuple<int, std::size_t, std::size_t>, std::vector<std::size_t>> exact;
  for (const std::size_t g : gold_order) {
    exact[{static_cast<int>(gold[g].category), gold[g].span.start, gold[g].span.end}]
        .push_back(g);
  }
  for (const std::size_t p : pred_order) {
    const auto it = exact.find(
        {static_cast<int>(pred[p].category), pred[p].span.start, pred[p].span.end});
    if (it == exact.end() || it->second.empty()) continue;
    const std::size_t g = it->second.front();
    it->second.erase(it->second.begin());
    gold_used[g] = true;
    pred_used[p] = true;
    result.pairs.emplace_back(g, p);
  }

  if (mode == MatchMode::kLenient) {
    // Remaining same-category overlaps, largest overlap first.
    struct Overlap {
      std::size_t length;
      std::size_t g, p;
    };
    std::vector<Overlap> overlaps;
    for (const std::size_t g : gold_order) {
      if (gold_used[g]) continue;
      for (const std::size_t p : pred_order) {
        if (pred_used[p]) continue;
        if (gold[g].category != pred[p].category) continue;
        const std::size_t length = overlap_length(gold[g].span, pred[p].span);
        if (length > 0) overlaps.push_back({length, g, p});
      }
    }
    std::sort(overlaps.begin(), overlaps.end(), [&](const Overlap& a, const Overlap& b) {
      if (a.length != b.length) return a.length > b.length;
      if (gold[a.g].span.start != gold[b.g].span.start)
        return gold[a.g].span.start < gold[b.g].span.start;
      if (a.g != b.g) return a.g < b.g;
      if (pred[a.p].span.start != pred[b.p].span.start)
        return pred[a.p].span.start < pred[b.p].span.start;
      return a.p < b.p;
    });
    for (const Overlap& overlap : overlaps) {
      if (gold_used[overlap.g] || pred_used[overlap.p]) continue;
      gold_used[overlap.g] = true;
      pred_used[overlap.p] = true;
      result.pairs.emplace_back(overlap.g, overlap.p);
    }
  }

  std::sort(result.pairs.begin(), result.pairs.end());
  for (const std::size_t g : gold_order) {
    if (!gold_used[g]) result.unmatched_gold.push_back(g);
  }
  for (const std::size_t p : pred_order) {
    if (!pred_used[p]) result.unmatched_pred.push_back(p);
  }
  return result;
}

namespace {

std::map<std::string, const AnnotatedDocument*> index_by_id(
    const std::vector<AnnotatedDocument>& docs, const char* side) {
  std::map<std::string, const AnnotatedDocument*> index;
  for (const AnnotatedDocument& doc : docs) {
    if (!index.emplace(doc.id, &doc).second)
      throw Error(std::string("duplicate document id in ") + side + ": " + doc.id);
  }
  return index;
}

// Union of ids: gold order first, then pred-only ids in pred order.
std::vector<std::string> aligned_ids(const std::vector<AnnotatedDocument>& gold,
                                     const std::vector<AnnotatedDocument>& pred) {
  std::vector<std::string> ids;
  std::map<std::string, bool> seen;
  for (const AnnotatedDocument& doc : gold) {
    ids.push_back(doc.id);
    seen[doc.id] = true;
  }
  for (const AnnotatedDocument& doc : pred) {
    if (!seen[doc.id]) ids.push_back(doc.id);
  }
  return ids;
}

}  // namespace

EvalReport score_ner(const std::vector<AnnotatedDocument>& gold,
                     const std::vector<AnnotatedDocument>& pred,
                     bool error_on_missing) {
  const auto gold_index = index_by_id(gold, "gold");
  const auto pred_index = index_by_id(pred, "pred");

  EvalReport report;
  for (const Category category : taggable_categories())
    report.per_category[category] = {};

  static const std::vector<EntityMention> kNoMentions;
  for (const std::string& id : aligned_ids(gold, pred)) {
    const auto git = gold_index.find(id);
    const auto pit = pred_index.find(id);
    if (git == gold_index.end() || pit == pred_index.end()) {
      const std::string note =
          id + (git == gold_index.end() ? " (no gold)" : " (no prediction)");
      if (error_on_missing) throw Error("document mismatch: " + note);
      report.missing_documents.push_back(note);
    }
    const std::vector<EntityMention>& gold_mentions =
        git == gold_index.end() ? kNoMentions : git->second->mentions;
    const std::vector<EntityMention>& pred_mentions =
        pit == pred_index.end() ? kNoMentions : pit->second->mentions;

    for (const MatchMode mode : {MatchMode::kStrict, MatchMode::kLenient}) {
      const MatchResult matched = match_mentions(gold_mentions, pred_mentions, mode);
      const auto bucket = [&](Category category) -> PRF& {
        CategoryScores& scores = report.per_category[category];
        return mode == MatchMode::kStrict ? scores.strict : scores.lenient;
      };
      for (const auto& [g, p] : matched.pairs) {
        bucket(gold_mentions[g].category).tp += 1;
        report.matches.push_back(
            {id, mode, gold_mentions[g].id, pred_mentions[p].id});
      }
      for (const std::size_t g : matched.unmatched_gold)
        bucket(gold_mentions[g].category).fn += 1;
      for (const std::size_t p : matched.unmatched_pred)
        bucket(pred_mentions[p].category).fp += 1;
    }
  }

  for (const auto& [category, scores] : report.per_category) {
    report.overall.strict += scores.strict;
    report.overall.lenient += scores.lenient;
  }
  return report;
}

PRF score_relations(const std::vector<AnnotatedDocument>& gold,
                    const std::vector<AnnotatedDocument>& pred,
                    MatchMode endpoint_mode) {
  const auto gold_index = index_by_id(gold, "gold");
  const auto pred_index = index_by_id(pred, "pred");

  PRF prf;
  static const AnnotatedDocument kEmptyDoc;
  for (const std::string& id : aligned_ids(gold, pred)) {
    const auto git = gold_index.find(id);
    const auto pit = pred_index.find(id);
    const AnnotatedDocument& gold_doc =
        git == gold_index.end() ? kEmptyDoc : *git->second;
    const AnnotatedDocument& pred_doc =
        pit == pred_index.end() ? kEmptyDoc : *pit->second;

    std::map<std::string, std::size_t> gold_pos, pred_pos;
    for (std::size_t i = 0; i < gold_doc.mentions.size(); ++i)
      gold_pos[gold_doc.mentions[i].id] = i;
    for (std::size_t i = 0; i < pred_doc.mentions.size(); ++i)
      pred_pos[pred_doc.mentions[i].id] = i;

    const MatchResult matched =
        match_mentions(gold_doc.mentions, pred_doc.mentions, endpoint_mode);
    std::map<std::size_t, std::size_t> gold_of_pred;
    for (const auto& [g, p] : matched.pairs) gold_of_pred[p] = g;

    struct GoldRelation {
      const Relation* relation;
      bool credited = false;
    };
    std::vector<GoldRelation> gold_relations;
    for (const Relation& relation : gold_doc.relations) {
      if (gold_pos.find(relation.head_id) == gold_pos.end() ||
          gold_pos.find(relation.tail_id) == gold_pos.end())
        throw Error("gold relation references unknown mention in doc " + id);
      gold_relations.push_back({&relation, false});
    }

    for (const Relation& relation : pred_doc.relations) {
      const auto hit = pred_pos.find(relation.head_id);
      const auto tit = pred_pos.find(relation.tail_id);
      if (hit == pred_pos.end() || tit == pred_pos.end())
        throw Error("predicted relation references unknown mention in doc " + id);
      const auto gh = gold_of_pred.find(hit->second);
      const auto gt = gold_of_pred.find(tit->second);
      bool credited = false;
      if (gh != gold_of_pred.end() && gt != gold_of_pred.end()) {
        const std::string& gold_head = gold_doc.mentions[gh->second].id;
        const std::string& gold_tail = gold_doc.mentions[gt->second].id;
        for (GoldRelation& candidate : gold_relations) {
          if (candidate.credited) continue;
          if (candidate.relation->head_id == gold_head &&
              candidate.relation->tail_id == gold_tail &&
              candidate.relation->type == relation.type) {
            candidate.credited = true;
            credited = true;
            break;
          }
        }
      }
      if (credited) {
        prf.tp += 1;
      } else {
        prf.fp += 1;
      }
    }
    for (const GoldRelation& candidate : gold_relations) {
      if (!candidate.credited) prf.fn += 1;
    }
  }
  return prf;
}

namespace {

std::string four(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.4f", value);
  return buffer;
}

}  // namespace

std::string render_report(const EvalReport& report) {
  std::string out;
  out += "Span-level scores, micro-averaged\n";
  out +=
      "strict = same category and identical span; "
      "lenient = same category and >=1 overlapping character\n\n";
  char line[256];
  std::snprintf(line, sizeof(line), "%-23s  %26s  %26s\n", "", "strict", "lenient");
  out += line;
  std::snprintf(line, sizeof(line), "%-23s  %8s %8s %8s  %8s %8s %8s\n", "Category",
                "P", "R", "F1", "P", "R", "F1");
  out += line;
  const auto row = [&](const std::string& name, const CategoryScores& scores) {
    std::snprintf(line, sizeof(line), "%-23s  %8s %8s %8s  %8s %8s %8s\n",
                  name.c_str(), four(scores.strict.precision()).c_str(),
                  four(scores.strict.recall()).c_str(), four(scores.strict.f1()).c_str(),
                  four(scores.lenient.precision()).c_str(),
                  four(scores.lenient.recall()).c_str(),
                  four(scores.lenient.f1()).c_str());
    out += line;
  };
  for (const Category category : taggable_categories()) {
    const auto it = report.per_category.find(category);
    row(render_category(category), it == report.per_category.end() ? CategoryScores{}
                                                                   : it->second);
  }
  row("Overall", report.overall);
  if (!report.missing_documents.empty()) {
    out += "\nDocuments scored against an empty counterpart:\n";
    for (const std::string& note : report.missing_documents)
      out += "  " + note + "\n";
  }
  return out;
}

std::string report_to_json(const EvalReport& report) {
  using nlohmann::ordered_json;
  const auto prf_json = [](const PRF& prf) {
    return ordered_json{{"tp", prf.tp},
                        {"fp", prf.fp},
                        {"fn", prf.fn},
                        {"precision", prf.precision()},
                        {"recall", prf.recall()},
                        {"f1", prf.f1()}};
  };
  ordered_json root;
  root["definitions"] = {
      {"strict", "same category and identical character span"},
      {"lenient", "same category and >=1 overlapping character"},
      {"averaging", "micro"}};
  for (const MatchMode mode : {MatchMode::kStrict, MatchMode::kLenient}) {
    ordered_json block;
    for (const Category category : taggable_categories()) {
      const auto it = report.per_category.find(category);
      const CategoryScores scores =
          it == report.per_category.end() ? CategoryScores{} : it->second;
      block[render_category(category)] =
          prf_json(mode == MatchMode::kStrict ? scores.strict : scores.lenient);
    }
    block["overall"] = prf_json(mode == MatchMode::kStrict ? report.overall.strict
                                                           : report.overall.lenient);
    root[render_match_mode(mode)] = block;
  }
  root["missing_documents"] = report.missing_documents;
  return root.dump(2);
}

}  // namespace thyrex
