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

#ifndef THYREX_TAGGER_HPP_
#define THYREX_TAGGER_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "thyrex/preprocess.hpp"
#include "thyrex/schema.hpp"

namespace thyrex {

// Feature template version; bumped whenever extract_features changes.
// A model file records the id it was trained with, and loading a file
// with a different id fails rather than silently mis-scoring.
inline constexpr const char* kFeatureTemplateId = "wshape-v1";

/// Per-token per-tag scores for one sentence. Columns follow the tag
/// set's canonical order. Any scorer that fills this matrix plugs into
/// viterbi_decode.
struct TokenScoreMatrix {
  int token_count = 0;
  int tag_count = 0;
  std::vector<double> scores;  // row-major [token][tag]

  TokenScoreMatrix() = default;
  TokenScoreMatrix(int tokens, int tags)
      : token_count(tokens),
        tag_count(tags),
        scores(static_cast<std::size_t>(tokens) * tags, 0.0) {}

  double& at(int token, TagId tag) {
    return scores[static_cast<std::size_t>(token) * tag_count + tag];
  }
  double at(int token, TagId tag) const {
    return scores[static_cast<std::size_t>(token) * tag_count + tag];
  }
};

/// Learned soft preferences over tag bigrams, separate from the hard
/// validity mask in TransitionConstraints.
struct TransitionWeights {
  int tag_count = 0;
  std::vector<double> start;   // score of starting with each tag
  std::vector<double> bigram;  // tag_count x tag_count, row = previous tag

  TransitionWeights() = default;
  explicit TransitionWeights(int tags)
      : tag_count(tags),
        start(tags, 0.0),
        bigram(static_cast<std::size_t>(tags) * tags, 0.0) {}

  double& between(TagId prev, TagId next) {
    return bigram[static_cast<std::size_t>(prev) * tag_count + next];
  }
  double between(TagId prev, TagId next) const {
    return bigram[static_cast<std::size_t>(prev) * tag_count + next];
  }
};

/// Sparse features for one token of a sentence: lowercased word, word
/// shape, 3-char prefix/suffix, neighbor words in a +-2 window with
/// "<s>"/"</s>" sentinels at the boundaries, is-numeric and
/// is-measurement-unit flags.
std::vector<std::string> extract_features(const std::vector<std::string>& sentence,
                                          int position);

/// Highest-scoring VALID tag sequence under emission + transition
/// scores. Ties resolve to the lexicographically smallest sequence in
/// canonical tag order (O first), so an all-zero model decodes to all O.
/// Empty input decodes to an empty sequence.
std::vector<TagId> viterbi_decode(const TokenScoreMatrix& scores,
                                  const TransitionConstraints& constraints,
                                  const TransitionWeights& transitions);

/// Linear sequence model: sparse (feature, tag) weights plus transition
/// weights. Unseen features score 0. Text serialization round-trips
/// byte-exactly.
class TaggerModel {
 public:
  TaggerModel();  // full 33-tag set
  explicit TaggerModel(TagSet tags);

  const TagSet& tag_set() const { return tags_; }
  const TransitionConstraints& constraints() const { return constraints_; }
  const TransitionWeights& transitions() const { return transitions_; }
  TransitionWeights& transitions() { return transitions_; }

  int epochs() const { return epochs_; }
  std::uint64_t seed() const { return seed_; }
  void set_metadata(int epochs, std::uint64_t seed) {
    epochs_ = epochs;
    seed_ = seed;
  }

  double weight(const std::string& feature, TagId tag) const;
  void add_weight(const std::string& feature, TagId tag, double delta);
  std::size_t feature_count() const { return weights_.size(); }

  TokenScoreMatrix score_sentence(const std::vector<std::string>& words) const;
  std::vector<TagId> tag_sentence(const std::vector<std::string>& words) const;

  void save(const std::string& path) const;
  /// Throws ParseError on malformed files and Error on a feature
  /// template id this build does not implement.
  static TaggerModel load(const std::string& path);

 private:
  TagSet tags_;
  TransitionConstraints constraints_;
  TransitionWeights transitions_;
  std::map<std::string, std::vector<double>> weights_;  // per-tag rows
  int epochs_ = 0;
  std::uint64_t seed_ = 0;
};

struct TaggerTrainStats {
  int sentence_count = 0;
  std::vector<double> epoch_accuracy;  // token self-accuracy after each epoch
  std::vector<std::string> warnings;   // alignment and overlap notes
};

/// Averaged structured-perceptron training over BIO-encoded sentences.
/// Deterministic given (corpus order, epochs, seed); the per-epoch
/// shuffle is driven only by `seed`. Throws Error on an empty corpus.
TaggerModel train_tagger(const std::vector<AnnotatedDocument>& corpus,
                         int epochs, std::uint64_t seed,
                         TaggerTrainStats* stats = nullptr);

/// tokenize -> segment -> score -> decode -> spans. Mentions carry
/// exact character spans into `text`; ids are "m0", "m1", ...
std::vector<EntityMention> predict(const TaggerModel& model,
                                   const std::string& text);

}  // namespace thyrex

#endif  // THYREX_TAGGER_HPP_
