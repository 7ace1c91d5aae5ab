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

#include "thyrex/tagger.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "thyrex/rng.hpp"
#include "thyrex/utf8.hpp"

namespace thyrex {

namespace {

std::string ascii_lower(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

// Collapsed case/digit pattern: "Hypoechoic" -> "Aa", "2.2" -> "0_0".
std::string word_shape(const std::string& word) {
  std::string shape;
  for (char32_t cp : utf8::decode(word)) {
    char cls;
    if (cp >= U'A' && cp <= U'Z') {
      cls = 'A';
    } else if (cp >= U'a' && cp <= U'z') {
      cls = 'a';
    } else if (cp >= U'0' && cp <= U'9') {
      cls = '0';
    } else {
      cls = '_';
    }
    if (shape.empty() || shape.back() != cls) shape.push_back(cls);
  }
  return shape;
}

bool is_numeric_token(const std::string& word) {
  bool digit_seen = false;
  for (unsigned char c : word) {
    if (std::isdigit(c)) {
      digit_seen = true;
    } else if (c != '.') {
      return false;
    }
  }
  return digit_seen;
}

const std::string kStartSentinel = "<s>";
const std::string kEndSentinel = "</s>";

std::string neighbor(const std::vector<std::string>& sentence, int position) {
  if (position < 0) return kStartSentinel;
  if (position >= static_cast<int>(sentence.size())) return kEndSentinel;
  return ascii_lower(sentence[position]);
}

}  // namespace

std::vector<std::string> extract_features(const std::vector<std::string>& sentence,
                                          int position) {
  const std::string& word = sentence[position];
  const std::string lower = ascii_lower(word);
  std::vector<std::string> features;
  features.reserve(10);
  features.push_back("w=" + lower);
  features.push_back("shape=" + word_shape(word));
  const std::size_t n = utf8::length(lower);
  features.push_back("pre=" + (n <= 3 ? lower : utf8::substr(lower, 0, 3)));
  features.push_back("suf=" + (n <= 3 ? lower : utf8::substr(lower, n - 3, n)));
  features.push_back("w-2=" + neighbor(sentence, position - 2));
  features.push_back("w-1=" + neighbor(sentence, position - 1));
  features.push_back("w+1=" + neighbor(sentence, position + 1));
  features.push_back("w+2=" + neighbor(sentence, position + 2));
  if (is_numeric_token(word)) features.push_back("isnum");
  if (lower == "cm" || lower == "mm") features.push_back("isunit");
  return features;
}

std::vector<TagId> viterbi_decode(const TokenScoreMatrix& scores,
                                  const TransitionConstraints& constraints,
                                  const TransitionWeights& transitions) {
  const int n = scores.token_count;
  const int k = scores.tag_count;
  if (n == 0) return {};
  if (constraints.tag_count != k || transitions.tag_count != k)
    throw Error("viterbi_decode: tag count mismatch");

  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  // beta[t][j] = best score of positions t+1..n-1 given tag j at t.
  // Decoding forward against beta picks, at each step, the smallest tag
  // that still attains the optimum, which yields the lexicographically
  // smallest optimal sequence in canonical tag order.
  std::vector<double> beta(static_cast<std::size_t>(n) * k, 0.0);
  for (int t = n - 2; t >= 0; --t) {
    for (int j = 0; j < k; ++j) {
      double best = kNegInf;
      for (int m = 0; m < k; ++m) {
        if (!constraints.is_allowed(j, m)) continue;
        const double v = transitions.between(j, m) + scores.at(t + 1, m) +
                         beta[static_cast<std::size_t>(t + 1) * k + m];
        if (v > best) best = v;
      }
      beta[static_cast<std::size_t>(t) * k + j] = best;
    }
  }

  double best_total = kNegInf;
  int current = 0;
  for (int j = 0; j < k; ++j) {
    if (constraints.start_allowed[j] == 0) continue;
    const double v = transitions.start[j] + scores.at(0, j) + beta[j];
    if (v > best_total) {
      best_total = v;
      current = j;
    }
  }

  std::vector<TagId> out(n);
  out[0] = current;
  for (int t = 0; t + 1 < n; ++t) {
    // The comparison below re-evaluates the exact expression that
    // produced beta[t][current], so equality holds without tolerance.
    const double target = beta[static_cast<std::size_t>(t) * k + current];
    for (int m = 0; m < k; ++m) {
      if (!constraints.is_allowed(current, m)) continue;
      const double v = transitions.between(current, m) + scores.at(t + 1, m) +
                       beta[static_cast<std::size_t>(t + 1) * k + m];
      if (v == target) {
        current = m;
        break;
      }
    }
    out[t + 1] = current;
  }
  return out;
}

// ---------------------------------------------------------------------------
// TaggerModel

TaggerModel::TaggerModel() : TaggerModel(TagSet::full()) {}

TaggerModel::TaggerModel(TagSet tags)
    : tags_(std::move(tags)),
      constraints_(TransitionConstraints::from(tags_)),
      transitions_(tags_.size()) {}

double TaggerModel::weight(const std::string& feature, TagId tag) const {
  const auto it = weights_.find(feature);
  return it == weights_.end() ? 0.0 : it->second[tag];
}

void TaggerModel::add_weight(const std::string& feature, TagId tag, double delta) {
  auto it = weights_.find(feature);
  if (it == weights_.end()) {
    it = weights_.emplace(feature, std::vector<double>(tags_.size(), 0.0)).first;
  }
  it->second[tag] += delta;
}

TokenScoreMatrix TaggerModel::score_sentence(
    const std::vector<std::string>& words) const {
  const int k = tags_.size();
  TokenScoreMatrix scores(static_cast<int>(words.size()), k);
  for (int t = 0; t < static_cast<int>(words.size()); ++t) {
    for (const std::string& feature : extract_features(words, t)) {
      const auto it = weights_.find(feature);
      if (it == weights_.end()) continue;
      for (int j = 0; j < k; ++j) scores.at(t, j) += it->second[j];
    }
  }
  return scores;
}

std::vector<TagId> TaggerModel::tag_sentence(
    const std::vector<std::string>& words) const {
  return viterbi_decode(score_sentence(words), constraints_, transitions_);
}

namespace {

std::string hex_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%a", value);
  return buffer;
}

void write_row(std::ostream& out, const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    out << (i == 0 ? "" : " ") << hex_double(values[i]);
  }
  out << "\n";
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> parts;
  std::string part;
  while (in >> part) parts.push_back(part);
  return parts;
}

std::vector<double> parse_row(const std::string& text, int expected, int line_no) {
  const std::vector<std::string> parts = split_ws(text);
  if (static_cast<int>(parts.size()) != expected)
    throw ParseError("expected " + std::to_string(expected) + " weights", line_no);
  std::vector<double> values;
  values.reserve(parts.size());
  for (const std::string& part : parts) {
    char* end = nullptr;
    const double v = std::strtod(part.c_str(), &end);
    if (end == nullptr || *end != '\0')
      throw ParseError("bad weight value: " + part, line_no);
    values.push_back(v);
  }
  return values;
}

}  // namespace

void TaggerModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model file: " + path);
  const int k = tags_.size();
  out << "thyrex tagger 1\n";
  out << "templates " << kFeatureTemplateId << "\n";
  out << "epochs " << epochs_ << "\n";
  out << "seed " << seed_ << "\n";
  out << "tags " << k << "\n";
  for (int j = 0; j < k; ++j) out << (j == 0 ? "" : " ") << tags_.name(j);
  out << "\n";

  std::size_t rows = 0;
  for (const auto& [feature, values] : weights_) {
    if (std::any_of(values.begin(), values.end(), [](double v) { return v != 0.0; }))
      ++rows;
  }
  out << "features " << rows << "\n";
  for (const auto& [feature, values] : weights_) {
    if (std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; }))
      continue;
    if (feature.find_first_of("\t\n") != std::string::npos)
      throw Error("feature contains separator bytes: " + feature);
    out << feature << "\t";
    write_row(out, values);
  }

  out << "transitions\n";
  out << "start\t";
  write_row(out, transitions_.start);
  for (int j = 0; j < k; ++j) {
    out << tags_.name(j) << "\t";
    std::vector<double> row(transitions_.bigram.begin() + static_cast<std::ptrdiff_t>(j) * k,
                            transitions_.bigram.begin() + static_cast<std::ptrdiff_t>(j + 1) * k);
    write_row(out, row);
  }
  if (!out) throw Error("write failed: " + path);
}

TaggerModel TaggerModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file: " + path);
  int line_no = 0;
  std::string line;
  const auto next_line = [&]() {
    if (!std::getline(in, line)) throw ParseError("unexpected end of model file", line_no);
    ++line_no;
  };

  next_line();
  if (line != "thyrex tagger 1")
    throw ParseError("not a tagger model file (bad magic)", line_no);
  next_line();
  if (line.rfind("templates ", 0) != 0) throw ParseError("expected templates line", line_no);
  const std::string template_id = line.substr(10);
  if (template_id != kFeatureTemplateId)
    throw Error("model uses feature templates '" + template_id +
                "' but this build implements '" + kFeatureTemplateId + "'");
  next_line();
  if (line.rfind("epochs ", 0) != 0) throw ParseError("expected epochs line", line_no);
  const int epochs = std::atoi(line.c_str() + 7);
  next_line();
  if (line.rfind("seed ", 0) != 0) throw ParseError("expected seed line", line_no);
  const std::uint64_t seed = std::strtoull(line.c_str() + 5, nullptr, 10);
  next_line();
  if (line.rfind("tags ", 0) != 0) throw ParseError("expected tags line", line_no);
  const int k = std::atoi(line.c_str() + 5);
  if (k < 1 || k % 2 == 0) throw ParseError("tag count must be odd and positive", line_no);

  next_line();
  const std::vector<std::string> names = split_ws(line);
  if (static_cast<int>(names.size()) != k)
    throw ParseError("expected " + std::to_string(k) + " tag names", line_no);
  if (names[0] != "O") throw ParseError("first tag must be O", line_no);
  std::vector<Category> categories;
  for (int j = 1; j < k; j += 2) {
    if (names[j].rfind("B-", 0) != 0 || names[j + 1].rfind("I-", 0) != 0 ||
        names[j].substr(2) != names[j + 1].substr(2))
      throw ParseError("tags must come as B-X I-X pairs", line_no);
    try {
      categories.push_back(parse_category(names[j].substr(2)));
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    }
  }

  TaggerModel model{TagSet(categories)};
  model.set_metadata(epochs, seed);

  next_line();
  if (line.rfind("features ", 0) != 0) throw ParseError("expected features line", line_no);
  const long feature_rows = std::atol(line.c_str() + 9);
  for (long r = 0; r < feature_rows; ++r) {
    next_line();
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("feature row needs a tab", line_no);
    const std::string feature = line.substr(0, tab);
    const std::vector<double> values = parse_row(line.substr(tab + 1), k, line_no);
    for (int j = 0; j < k; ++j) {
      if (values[j] != 0.0) model.add_weight(feature, j, values[j]);
    }
  }

  next_line();
  if (line != "transitions") throw ParseError("expected transitions line", line_no);
  next_line();
  if (line.rfind("start\t", 0) != 0) throw ParseError("expected start row", line_no);
  model.transitions().start = parse_row(line.substr(6), k, line_no);
  for (int j = 0; j < k; ++j) {
    next_line();
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || line.substr(0, tab) != model.tag_set().name(j))
      throw ParseError("expected transition row for " + model.tag_set().name(j), line_no);
    const std::vector<double> values = parse_row(line.substr(tab + 1), k, line_no);
    for (int m = 0; m < k; ++m) model.transitions().between(j, m) = values[m];
  }
  if (std::getline(in, line))
    throw ParseError("trailing content after transitions", line_no + 1);
  return model;
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct TrainSentence {
  std::vector<std::string> words;
  std::vector<TagId> gold;
  std::vector<std::vector<std::string>> features;  // per position
};

std::vector<TrainSentence> build_sentences(const std::vector<AnnotatedDocument>& corpus,
                                           const TagSet& tags,
                                           std::vector<std::string>* warnings) {
  std::vector<TrainSentence> data;
  for (const AnnotatedDocument& doc : corpus) {
    const std::vector<Token> tokens = tokenize(doc.text);
    if (tokens.empty()) continue;
    const std::vector<Sentence> sentences = segment_sentences(tokens, doc.text);
    const MentionAlignment alignment = align_mentions(doc, tokens);
    const BioEncoding encoding = spans_to_bio(doc, tokens, alignment, tags);
    if (warnings != nullptr) {
      for (const std::string& w : alignment.warnings)
        warnings->push_back(doc.id + ": " + w);
      for (const std::string& w : encoding.warnings)
        warnings->push_back(doc.id + ": " + w);
    }
    for (const Sentence& sentence : sentences) {
      TrainSentence ts;
      for (int t = sentence.first; t <= sentence.last; ++t) {
        ts.words.push_back(tokens[t].text);
        ts.gold.push_back(encoding.tags[t]);
      }
      ts.features.reserve(ts.words.size());
      for (int t = 0; t < static_cast<int>(ts.words.size()); ++t)
        ts.features.push_back(extract_features(ts.words, t));
      data.push_back(std::move(ts));
    }
  }
  return data;
}

}  // namespace

TaggerModel train_tagger(const std::vector<AnnotatedDocument>& corpus,
                         int epochs, std::uint64_t seed,
                         TaggerTrainStats* stats) {
  const TagSet& tags = TagSet::full();
  const int k = tags.size();
  const TransitionConstraints constraints = TransitionConstraints::from(tags);

  std::vector<std::string> warnings;
  std::vector<TrainSentence> data = build_sentences(corpus, tags, &warnings);
  if (data.empty()) throw Error("train_tagger: empty corpus");
  if (epochs < 0) throw Error("train_tagger: negative epoch count");

  // Averaged perceptron: raw weights w plus an update accumulator u
  // weighted by the example counter; the average is w - u / counter.
  std::map<std::string, std::vector<double>> w, u;
  TransitionWeights tw(k), tu(k);
  double counter = 1.0;

  const auto touch = [k](std::map<std::string, std::vector<double>>& table,
                         const std::string& feature) -> std::vector<double>& {
    auto it = table.find(feature);
    if (it == table.end())
      it = table.emplace(feature, std::vector<double>(k, 0.0)).first;
    return it->second;
  };

  const auto score_sentence = [&](const TrainSentence& ts) {
    TokenScoreMatrix scores(static_cast<int>(ts.words.size()), k);
    for (int t = 0; t < static_cast<int>(ts.words.size()); ++t) {
      for (const std::string& feature : ts.features[t]) {
        const auto it = w.find(feature);
        if (it == w.end()) continue;
        for (int j = 0; j < k; ++j) scores.at(t, j) += it->second[j];
      }
    }
    return scores;
  };

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);

  if (stats != nullptr) {
    stats->sentence_count = static_cast<int>(data.size());
    stats->warnings = warnings;
    stats->epoch_accuracy.clear();
  }

  for (int epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    for (const std::size_t index : order) {
      const TrainSentence& ts = data[index];
      const std::vector<TagId> pred =
          viterbi_decode(score_sentence(ts), constraints, tw);
      if (pred != ts.gold) {
        const int n = static_cast<int>(ts.words.size());
        for (int t = 0; t < n; ++t) {
          if (pred[t] == ts.gold[t]) continue;
          for (const std::string& feature : ts.features[t]) {
            auto& wr = touch(w, feature);
            auto& ur = touch(u, feature);
            wr[ts.gold[t]] += 1.0;
            wr[pred[t]] -= 1.0;
            ur[ts.gold[t]] += counter;
            ur[pred[t]] -= counter;
          }
        }
        if (ts.gold[0] != pred[0]) {
          tw.start[ts.gold[0]] += 1.0;
          tw.start[pred[0]] -= 1.0;
          tu.start[ts.gold[0]] += counter;
          tu.start[pred[0]] -= counter;
        }
        for (int t = 1; t < n; ++t) {
          if (ts.gold[t - 1] == pred[t - 1] && ts.gold[t] == pred[t]) continue;
          tw.between(ts.gold[t - 1], ts.gold[t]) += 1.0;
          tw.between(pred[t - 1], pred[t]) -= 1.0;
          tu.between(ts.gold[t - 1], ts.gold[t]) += counter;
          tu.between(pred[t - 1], pred[t]) -= counter;
        }
      }
      counter += 1.0;
    }

    if (stats != nullptr) {
      long correct = 0, total = 0;
      for (const TrainSentence& ts : data) {
        const std::vector<TagId> pred =
            viterbi_decode(score_sentence(ts), constraints, tw);
        for (std::size_t t = 0; t < ts.gold.size(); ++t) {
          correct += pred[t] == ts.gold[t] ? 1 : 0;
          ++total;
        }
      }
      stats->epoch_accuracy.push_back(total == 0 ? 0.0
                                                 : static_cast<double>(correct) /
                                                       static_cast<double>(total));
    }
  }

  TaggerModel model{TagSet(tags.categories())};
  model.set_metadata(epochs, seed);
  for (const auto& [feature, raw] : w) {
    const auto uit = u.find(feature);
    for (int j = 0; j < k; ++j) {
      const double averaged = raw[j] - (uit == u.end() ? 0.0 : uit->second[j]) / counter;
      if (averaged != 0.0) model.add_weight(feature, j, averaged);
    }
  }
  for (int j = 0; j < k; ++j) {
    model.transitions().start[j] = tw.start[j] - tu.start[j] / counter;
    for (int m = 0; m < k; ++m)
      model.transitions().between(j, m) =
          tw.between(j, m) - tu.between(j, m) / counter;
  }
  return model;
}

std::vector<EntityMention> predict(const TaggerModel& model,
                                   const std::string& text) {
  const std::vector<Token> tokens = tokenize(text);
  if (tokens.empty()) return {};
  const std::vector<Sentence> sentences = segment_sentences(tokens, text);
  std::vector<TagId> all_tags(tokens.size(), model.tag_set().outside());
  for (const Sentence& sentence : sentences) {
    std::vector<std::string> words;
    words.reserve(sentence.size());
    for (int t = sentence.first; t <= sentence.last; ++t)
      words.push_back(tokens[t].text);
    const std::vector<TagId> tags = model.tag_sentence(words);
    for (int t = sentence.first; t <= sentence.last; ++t)
      all_tags[t] = tags[t - sentence.first];
  }
  return bio_to_spans(text, tokens, all_tags, model.tag_set()).mentions;
}

}  // namespace thyrex
