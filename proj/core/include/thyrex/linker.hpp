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

#ifndef THYREX_LINKER_HPP_
#define THYREX_LINKER_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "thyrex/preprocess.hpp"
#include "thyrex/schema.hpp"

namespace thyrex {

/// One characteristic->anchor pairing under consideration, with the
/// features the classifier scores it by.
struct CandidatePair {
  EntityMention head;  // characteristic
  EntityMention tail;  // anchor (nodule or lymph node)
  int token_distance = 0;     // signed; positive when the anchor follows
  int sentence_distance = 0;  // signed, same convention
  bool nearest = false;       // tail is the head's nearest in-scope anchor
  std::vector<std::string> features;
};

struct LinkerConfig {
  int scope = 1;                   // max sentence distance either way
  int max_candidates_per_head = 4;
  double score_threshold = 0.0;    // link only when score > threshold
};

/// Linear pairwise scorer. Unseen features score 0. Text serialization
/// round-trips byte-exactly.
class LinkerModel {
 public:
  double weight(const std::string& feature) const;
  void add_weight(const std::string& feature, double delta);
  double score(const std::vector<std::string>& features) const;
  std::size_t feature_count() const { return weights_.size(); }

  int epochs() const { return epochs_; }
  std::uint64_t seed() const { return seed_; }
  void set_metadata(int epochs, std::uint64_t seed) {
    epochs_ = epochs;
    seed_ = seed;
  }

  void save(const std::string& path) const;
  static LinkerModel load(const std::string& path);

 private:
  std::map<std::string, double> weights_;
  int epochs_ = 0;
  std::uint64_t seed_ = 0;
};

/// Pairs every characteristic mention with its anchors within
/// `config.scope` sentences, keeping at most max_candidates_per_head
/// nearest anchors by absolute token distance (ties to the earlier
/// anchor). Emitted in (head text order, then preference order).
std::vector<CandidatePair> generate_candidates(const AnnotatedDocument& doc,
                                               const std::vector<Token>& tokens,
                                               const std::vector<Sentence>& sentences,
                                               const LinkerConfig& config);

struct LinkerTrainStats {
  int candidate_count = 0;
  int positive_count = 0;
  int unreachable_gold = 0;  // gold relations no candidate covers (recall ceiling)
  std::vector<double> epoch_accuracy;
};

/// Averaged-perceptron training on candidate pairs, labeled positive
/// iff a gold relation joins them. Deterministic given (corpus order,
/// epochs, seed). Throws Error when the corpus yields no candidates.
LinkerModel train_linker(const std::vector<AnnotatedDocument>& corpus,
                         int epochs, std::uint64_t seed,
                         const LinkerConfig& config = {},
                         LinkerTrainStats* stats = nullptr);

/// Selects at most one relation per characteristic: the highest-scoring
/// candidate with score > threshold; ties go to the smaller absolute
/// token distance, then to the anchor earlier in text.
std::vector<Relation> link(const AnnotatedDocument& doc,
                           const LinkerModel& model,
                           const LinkerConfig& config = {});

struct ProfileAssembly {
  std::vector<NoduleProfile> profiles;  // one per anchor, in text order
  std::vector<EntityMention> orphans;   // characteristics with no relation
};

/// Groups linked characteristics under their anchors. Every
/// characteristic lands in exactly one profile or in orphans.
ProfileAssembly assemble_profiles(const std::vector<EntityMention>& mentions,
                                  const std::vector<Relation>& relations);

}  // namespace thyrex

#endif  // THYREX_LINKER_HPP_
