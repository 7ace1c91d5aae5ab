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

#include "thyrex/linker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "thyrex/rng.hpp"
#include "thyrex/utf8.hpp"

namespace thyrex {

namespace {

bool text_order(const EntityMention& a, const EntityMention& b) {
  if (a.span.start != b.span.start) return a.span.start < b.span.start;
  if (a.span.end != b.span.end) return a.span.end < b.span.end;
  return a.id < b.id;
}

std::string distance_bin(int d) {
  const int a = std::abs(d);
  std::string magnitude;
  if (a <= 5) {
    magnitude = std::to_string(a);
  } else if (a <= 10) {
    magnitude = "6-10";
  } else if (a <= 20) {
    magnitude = "11-20";
  } else {
    magnitude = ">20";
  }
  return (d < 0 ? "-" : "+") + magnitude;
}

struct Placed {
  EntityMention mention;
  TokenRange range;
  int sentence = 0;
};

}  // namespace

std::vector<CandidatePair> generate_candidates(const AnnotatedDocument& doc,
                                               const std::vector<Token>& tokens,
                                               const std::vector<Sentence>& sentences,
                                               const LinkerConfig& config) {
  std::vector<CandidatePair> candidates;
  if (tokens.empty() || doc.mentions.empty()) return candidates;

  const MentionAlignment alignment = align_mentions(doc, tokens);
  std::vector<int> token_sentence(tokens.size(), 0);
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    for (int t = sentences[s].first; t <= sentences[s].last; ++t)
      token_sentence[t] = static_cast<int>(s);
  }

  std::vector<Placed> anchors, heads;
  for (const EntityMention& mention : doc.mentions) {
    const auto it = alignment.ranges.find(mention.id);
    if (it == alignment.ranges.end()) continue;
    const Placed placed{mention, it->second, token_sentence[it->second.first]};
    if (is_anchor_category(mention.category)) {
      anchors.push_back(placed);
    } else if (is_characteristic_category(mention.category)) {
      heads.push_back(placed);
    }
  }
  const auto placed_order = [](const Placed& a, const Placed& b) {
    return text_order(a.mention, b.mention);
  };
  std::sort(anchors.begin(), anchors.end(), placed_order);
  std::sort(heads.begin(), heads.end(), placed_order);

  // Signed token distance between nearest edges; positive when the
  // anchor follows the head, zero on overlap.
  const auto token_distance = [](const Placed& head, const Placed& tail) {
    if (tail.range.first > head.range.last) return tail.range.first - head.range.last;
    if (tail.range.last < head.range.first) return tail.range.last - head.range.first;
    return 0;
  };

  for (const Placed& head : heads) {
    struct Scored {
      const Placed* tail;
      int distance;
    };
    std::vector<Scored> in_scope;
    for (const Placed& anchor : anchors) {
      if (std::abs(anchor.sentence - head.sentence) > config.scope) continue;
      in_scope.push_back({&anchor, token_distance(head, anchor)});
    }
    if (in_scope.empty()) continue;
    std::sort(in_scope.begin(), in_scope.end(), [](const Scored& a, const Scored& b) {
      if (std::abs(a.distance) != std::abs(b.distance))
        return std::abs(a.distance) < std::abs(b.distance);
      return a.tail->mention.span.start < b.tail->mention.span.start;
    });
    if (static_cast<int>(in_scope.size()) > config.max_candidates_per_head)
      in_scope.resize(config.max_candidates_per_head);
    const int min_distance = std::abs(in_scope.front().distance);

    for (const Scored& scored : in_scope) {
      const Placed& tail = *scored.tail;
      CandidatePair pair;
      pair.head = head.mention;
      pair.tail = tail.mention;
      pair.token_distance = scored.distance;
      pair.sentence_distance = tail.sentence - head.sentence;
      pair.nearest = std::abs(scored.distance) == min_distance;

      int intervening = 0;
      const int gap_first = scored.distance > 0 ? head.range.last : tail.range.last;
      const int gap_last = scored.distance > 0 ? tail.range.first : head.range.first;
      for (const Placed& other : anchors) {
        if (&other == &tail) continue;
        if (other.range.first > gap_first && other.range.last < gap_last) ++intervening;
      }

      const std::string direction = scored.distance > 0   ? "after"
                                    : scored.distance < 0 ? "before"
                                                          : "overlap";
      const std::string hc = "hc=" + render_category(head.mention.category);
      const std::string sd = "sd=" + std::to_string(pair.sentence_distance);
      pair.features.push_back("td=" + distance_bin(scored.distance));
      pair.features.push_back(sd);
      pair.features.push_back("ia=" + (intervening >= 3 ? std::string("3+")
                                                        : std::to_string(intervening)));
      pair.features.push_back(hc);
      pair.features.push_back("tc=" + render_category(tail.mention.category));
      pair.features.push_back("dir=" + direction);
      const std::size_t gap_start = std::min(head.mention.span.end, tail.mention.span.end);
      const std::size_t gap_end = std::max(head.mention.span.start, tail.mention.span.start);
      const bool same_list =
          gap_start >= gap_end ||
          utf8::substr(doc.text, gap_start, gap_end).find('\n') == std::string::npos;
      if (same_list) pair.features.push_back("samelist");
      if (pair.nearest) pair.features.push_back("nearest");
      pair.features.push_back(hc + "|dir=" + direction);
      pair.features.push_back(hc + "|" + sd);
      candidates.push_back(std::move(pair));
    }
  }
  return candidates;
}

// ---------------------------------------------------------------------------
// LinkerModel

double LinkerModel::weight(const std::string& feature) const {
  const auto it = weights_.find(feature);
  return it == weights_.end() ? 0.0 : it->second;
}

void LinkerModel::add_weight(const std::string& feature, double delta) {
  weights_[feature] += delta;
}

double LinkerModel::score(const std::vector<std::string>& features) const {
  double total = 0.0;
  for (const std::string& feature : features) total += weight(feature);
  return total;
}

namespace {

std::string hex_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%a", value);
  return buffer;
}

}  // namespace

void LinkerModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model file: " + path);
  out << "thyrex linker 1\n";
  out << "epochs " << epochs_ << "\n";
  out << "seed " << seed_ << "\n";
  std::size_t rows = 0;
  for (const auto& [feature, value] : weights_) {
    if (value != 0.0) ++rows;
  }
  out << "features " << rows << "\n";
  for (const auto& [feature, value] : weights_) {
    if (value == 0.0) continue;
    if (feature.find_first_of("\t\n") != std::string::npos)
      throw Error("feature contains separator bytes: " + feature);
    out << feature << "\t" << hex_double(value) << "\n";
  }
  if (!out) throw Error("write failed: " + path);
}

LinkerModel LinkerModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file: " + path);
  int line_no = 0;
  std::string line;
  const auto next_line = [&]() {
    if (!std::getline(in, line)) throw ParseError("unexpected end of model file", line_no);
    ++line_no;
  };

  next_line();
  if (line != "thyrex linker 1")
    throw ParseError("not a linker model file (bad magic)", line_no);
  next_line();
  if (line.rfind("epochs ", 0) != 0) throw ParseError("expected epochs line", line_no);
  const int epochs = std::atoi(line.c_str() + 7);
  next_line();
  if (line.rfind("seed ", 0) != 0) throw ParseError("expected seed line", line_no);
  const std::uint64_t seed = std::strtoull(line.c_str() + 5, nullptr, 10);
  next_line();
  if (line.rfind("features ", 0) != 0) throw ParseError("expected features line", line_no);
  const long rows = std::atol(line.c_str() + 9);

  LinkerModel model;
  model.set_metadata(epochs, seed);
  for (long r = 0; r < rows; ++r) {
    next_line();
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("feature row needs a tab", line_no);
    char* end = nullptr;
    const double value = std::strtod(line.c_str() + tab + 1, &end);
    if (end == nullptr || *end != '\0')
      throw ParseError("bad weight value", line_no);
    model.add_weight(line.substr(0, tab), value);
  }
  if (std::getline(in, line)) throw ParseError("trailing content", line_no + 1);
  return model;
}

// ---------------------------------------------------------------------------
// Training

LinkerModel train_linker(const std::vector<AnnotatedDocument>& corpus,
                         int epochs, std::uint64_t seed,
                         const LinkerConfig& config,
                         LinkerTrainStats* stats) {
  struct Example {
    std::vector<std::string> features;
    bool positive = false;
  };
  std::vector<Example> examples;
  int unreachable = 0;

  for (const AnnotatedDocument& doc : corpus) {
    const std::vector<Token> tokens = tokenize(doc.text);
    const std::vector<Sentence> sentences = segment_sentences(tokens, doc.text);
    const std::vector<CandidatePair> candidates =
        generate_candidates(doc, tokens, sentences, config);
    std::set<std::pair<std::string, std::string>> covered;
    for (const CandidatePair& pair : candidates) {
      const bool positive =
          std::any_of(doc.relations.begin(), doc.relations.end(),
                      [&](const Relation& rel) {
                        return rel.head_id == pair.head.id &&
                               rel.tail_id == pair.tail.id &&
                               rel.type == kAttributeOfRelation;
                      });
      if (positive) covered.insert({pair.head.id, pair.tail.id});
      examples.push_back({pair.features, positive});
    }
    for (const Relation& rel : doc.relations) {
      if (rel.type == kAttributeOfRelation &&
          covered.find({rel.head_id, rel.tail_id}) == covered.end())
        ++unreachable;
    }
  }
  if (examples.empty()) throw Error("train_linker: no candidate pairs in corpus");
  if (epochs < 0) throw Error("train_linker: negative epoch count");

  std::map<std::string, double> w, u;
  double counter = 1.0;
  const auto raw_score = [&](const std::vector<std::string>& features) {
    double total = 0.0;
    for (const std::string& feature : features) {
      const auto it = w.find(feature);
      if (it != w.end()) total += it->second;
    }
    return total;
  };

  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);

  if (stats != nullptr) {
    stats->candidate_count = static_cast<int>(examples.size());
    stats->positive_count = static_cast<int>(
        std::count_if(examples.begin(), examples.end(),
                      [](const Example& e) { return e.positive; }));
    stats->unreachable_gold = unreachable;
    stats->epoch_accuracy.clear();
  }

  for (int epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    for (const std::size_t index : order) {
      const Example& example = examples[index];
      const bool predicted = raw_score(example.features) > 0.0;
      if (predicted != example.positive) {
        const double y = example.positive ? 1.0 : -1.0;
        for (const std::string& feature : example.features) {
          w[feature] += y;
          u[feature] += counter * y;
        }
      }
      counter += 1.0;
    }
    if (stats != nullptr) {
      long correct = 0;
      for (const Example& example : examples) {
        if ((raw_score(example.features) > 0.0) == example.positive) ++correct;
      }
      stats->epoch_accuracy.push_back(static_cast<double>(correct) /
                                      static_cast<double>(examples.size()));
    }
  }

  LinkerModel model;
  model.set_metadata(epochs, seed);
  for (const auto& [feature, raw] : w) {
    const auto uit = u.find(feature);
    const double averaged = raw - (uit == u.end() ? 0.0 : uit->second) / counter;
    if (averaged != 0.0) model.add_weight(feature, averaged);
  }
  return model;
}

std::vector<Relation> link(const AnnotatedDocument& doc,
                           const LinkerModel& model,
                           const LinkerConfig& config) {
  const std::vector<Token> tokens = tokenize(doc.text);
  const std::vector<Sentence> sentences = segment_sentences(tokens, doc.text);
  const std::vector<CandidatePair> candidates =
      generate_candidates(doc, tokens, sentences, config);

  std::vector<Relation> relations;
  std::size_t i = 0;
  while (i < candidates.size()) {
    std::size_t j = i;
    const CandidatePair* best = nullptr;
    double best_score = 0.0;
    while (j < candidates.size() && candidates[j].head.id == candidates[i].head.id) {
      const CandidatePair& pair = candidates[j];
      const double s = model.score(pair.features);
      if (s > config.score_threshold) {
        const bool wins =
            best == nullptr || s > best_score ||
            (s == best_score &&
             (std::abs(pair.token_distance) < std::abs(best->token_distance) ||
              (std::abs(pair.token_distance) == std::abs(best->token_distance) &&
               pair.tail.span.start < best->tail.span.start)));
        if (wins) {
          best = &pair;
          best_score = s;
        }
      }
      ++j;
    }
    if (best != nullptr)
      relations.push_back({best->head.id, best->tail.id, kAttributeOfRelation});
    i = j;
  }
  return relations;
}

ProfileAssembly assemble_profiles(const std::vector<EntityMention>& mentions,
                                  const std::vector<Relation>& relations) {
  std::vector<EntityMention> ordered = mentions;
  std::sort(ordered.begin(), ordered.end(), text_order);

  std::map<std::string, const EntityMention*> by_id;
  for (const EntityMention& mention : ordered) by_id[mention.id] = &mention;

  std::map<std::string, std::string> linked_to;  // head id -> tail id
  for (const Relation& relation : relations) {
    if (by_id.find(relation.head_id) == by_id.end() ||
        by_id.find(relation.tail_id) == by_id.end())
      throw Error("relation references unknown mention: " + relation.head_id +
                  "->" + relation.tail_id);
    linked_to.emplace(relation.head_id, relation.tail_id);
  }

  ProfileAssembly assembly;
  std::map<std::string, std::size_t> profile_of;  // anchor id -> index
  for (const EntityMention& mention : ordered) {
    if (!is_anchor_category(mention.category)) continue;
    profile_of[mention.id] = assembly.profiles.size();
    assembly.profiles.push_back({mention, {}});
  }
  for (const EntityMention& mention : ordered) {
    if (!is_characteristic_category(mention.category)) continue;
    const auto link_it = linked_to.find(mention.id);
    if (link_it == linked_to.end()) {
      assembly.orphans.push_back(mention);
      continue;
    }
    const auto profile_it = profile_of.find(link_it->second);
    if (profile_it == profile_of.end())
      throw Error("relation tail is not an anchor: " + link_it->second);
    assembly.profiles[profile_it->second].characteristics[mention.category].push_back(
        mention);
  }
  return assembly;
}

}  // namespace thyrex
