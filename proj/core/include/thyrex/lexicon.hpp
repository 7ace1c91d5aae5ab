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

#ifndef THYREX_LEXICON_HPP_
#define THYREX_LEXICON_HPP_

#include <regex>
#include <string>
#include <vector>

#include "thyrex/preprocess.hpp"
#include "thyrex/schema.hpp"

namespace thyrex {

/// Per-category surface phrases and regular-expression patterns for the
/// dictionary baseline tagger.
class Lexicon {
 public:
  struct Entry {
    Category category = Category::kOther;
    bool is_pattern = false;
    std::string text;  // phrase, or regex source without the slashes
  };

  Lexicon() = default;

  void add_phrase(Category category, const std::string& phrase);
  void add_pattern(Category category, const std::string& pattern);

  /// Merges entries from a lexicon file. Lines are
  /// `CATEGORY<TAB>phrase` or `CATEGORY<TAB>/pattern/`; `#` starts a
  /// comment. Throws ParseError with the offending line number.
  void load_file(const std::string& path);

  const std::vector<Entry>& entries() const { return entries_; }

  /// Built-in entries covering the surface forms of the 16 categories,
  /// including numeric-size and TIRADS patterns.
  static const Lexicon& defaults();

 private:
  std::vector<Entry> entries_;
};

/// Compiled longest-match matcher over a lexicon. Immutable once built;
/// safe to share across threads.
class LexiconMatcher {
 public:
  explicit LexiconMatcher(const Lexicon& lexicon);

  /// Case-insensitive longest-match-first tagging on token boundaries.
  /// Emitted mentions never overlap; ids are "m0", "m1", ... in text order.
  std::vector<EntityMention> match(const std::string& text,
                                   const std::vector<Token>& tokens) const;

 private:
  struct CompiledPhrase {
    Category category;
    std::vector<std::string> lower_tokens;
  };
  struct CompiledPattern {
    Category category;
    std::regex regex;
  };

  std::vector<CompiledPhrase> phrases_;
  std::vector<CompiledPattern> patterns_;
};

/// One-shot convenience: compiles `lexicon` and matches `text`.
std::vector<EntityMention> lexicon_tag(const std::string& text,
                                       const std::vector<Token>& tokens,
                                       const Lexicon& lexicon);

}  // namespace thyrex

#endif  // THYREX_LEXICON_HPP_
