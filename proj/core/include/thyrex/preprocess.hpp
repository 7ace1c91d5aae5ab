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

#ifndef THYREX_PREPROCESS_HPP_
#define THYREX_PREPROCESS_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "thyrex/schema.hpp"

namespace thyrex {

struct Token {
  std::string text;  // equals the document substring at span
  Span span;         // codepoint offsets into the document text
  int index = 0;     // ordinal within the document
};

/// Inclusive token index range [first, last].
struct Sentence {
  int first = 0;
  int last = 0;

  int size() const { return last - first + 1; }
};

// Tags are small integers over a TagSet: index 0 is O, then B-C/I-C
// pairs in canonical category order. The full set has 33 tags (O plus
// B/I for each of the 16 non-OTHER categories); reduced sets over a
// category subset exist for testing decoders.
using TagId = int;

class TagSet {
 public:
  /// Tag set over the given categories (must be non-OTHER, in order).
  explicit TagSet(std::vector<Category> categories);

  /// The canonical 33-tag set over all 16 taggable categories.
  static const TagSet& full();

  int size() const { return static_cast<int>(names_.size()); }
  int category_count() const { return static_cast<int>(categories_.size()); }
  const std::vector<Category>& categories() const { return categories_; }

  TagId outside() const { return 0; }
  TagId begin_tag(Category category) const;
  TagId inside_tag(Category category) const;

  bool is_outside(TagId tag) const { return tag == 0; }
  bool is_begin(TagId tag) const { return tag > 0 && (tag - 1) % 2 == 0; }
  bool is_inside(TagId tag) const { return tag > 0 && (tag - 1) % 2 == 1; }
  Category category_of(TagId tag) const;  // valid for non-O tags

  const std::string& name(TagId tag) const { return names_[tag]; }
  /// Parses "O", "B-<CATEGORY>" or "I-<CATEGORY>". Throws Error on unknown.
  TagId from_name(const std::string& name) const;

  /// True iff `next` may follow `prev` in a valid BIO sequence.
  bool transition_allowed(TagId prev, TagId next) const;
  /// True iff a valid sequence may start with `tag` (everything but I-C).
  bool start_allowed(TagId tag) const;

 private:
  std::vector<Category> categories_;
  std::vector<std::string> names_;
  std::map<Category, TagId> begin_;
};

/// Hard validity mask realized as an explicit matrix, for decoders.
struct TransitionConstraints {
  int tag_count = 0;
  std::vector<unsigned char> allowed;  // tag_count x tag_count, row = prev
  std::vector<unsigned char> start_allowed;

  static TransitionConstraints from(const TagSet& tags);
  bool is_allowed(TagId prev, TagId next) const {
    return allowed[static_cast<std::size_t>(prev) * tag_count + next] != 0;
  }
};

/// Whitespace split, then punctuation split with two keep-together
/// exceptions: '.' between digits ("2.2") and '-' between alphanumerics
/// ("TI-RADS"). Deterministic; offsets reconstruct the input exactly.
std::vector<Token> tokenize(const std::string& text);

/// Sentence boundaries after ".", "!", "?" tokens and at newline runs;
/// never inside a measurement triplet ("2.2 x 1.2 x 3.2 cm").
std::vector<Sentence> segment_sentences(const std::vector<Token>& tokens,
                                        const std::string& text);

/// Inclusive token range covering a mention.
struct TokenRange {
  int first = 0;
  int last = 0;
};

struct MentionAlignment {
  std::map<std::string, TokenRange> ranges;  // mention id -> covering range
  std::vector<std::string> warnings;         // boundary snaps
};

/// Maps each mention to the minimal contiguous token range covering its
/// span. Boundaries inside a token snap outward with a warning. A mention
/// lying entirely between tokens raises Error naming it.
MentionAlignment align_mentions(const AnnotatedDocument& doc,
                                const std::vector<Token>& tokens);

enum class OverlapPolicy {
  kResolve,  // keep the longer mention, drop the other with a warning
  kStrict,   // raise Error on cross-category token conflicts
};

struct BioEncoding {
  std::vector<TagId> tags;  // one per token
  std::vector<std::string> warnings;
  std::vector<std::string> dropped_mention_ids;
};

/// Token-level BIO encoding of the document's mentions. OTHER mentions
/// are skipped. Same-category overlaps merge; cross-category overlaps
/// follow `policy`. Output is always a valid BIO sequence.
BioEncoding spans_to_bio(const AnnotatedDocument& doc,
                         const std::vector<Token>& tokens,
                         const MentionAlignment& alignment,
                         const TagSet& tags = TagSet::full(),
                         OverlapPolicy policy = OverlapPolicy::kResolve);

struct BioDecoding {
  std::vector<EntityMention> mentions;  // ids "m0", "m1", ... in text order
  int repairs = 0;                      // I-without-B fixes applied
};

/// Inverse of spans_to_bio. Invalid sequences are repaired first
/// (I-C without a compatible predecessor becomes B-C). Throws Error on
/// token/tag length mismatch.
BioDecoding bio_to_spans(const std::string& text,
                         const std::vector<Token>& tokens,
                         const std::vector<TagId>& tag_sequence,
                         const TagSet& tags = TagSet::full());

}  // namespace thyrex

#endif  // THYREX_PREPROCESS_HPP_
