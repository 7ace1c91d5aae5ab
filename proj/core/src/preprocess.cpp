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

#include "thyrex/preprocess.hpp"

#include <algorithm>
#include <cctype>

#include "thyrex/utf8.hpp"

namespace thyrex {

namespace {

bool is_ascii_digit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }

bool is_ascii_alnum(char32_t cp) {
  return is_ascii_digit(cp) || (cp >= U'a' && cp <= U'z') ||
         (cp >= U'A' && cp <= U'Z');
}

bool is_space(char32_t cp) {
  return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' ||
         cp == U'\f' || cp == U'\v' || cp == 0x00A0;
}

// Word/punctuation classification over codepoints. ASCII follows
// isalnum; beyond ASCII only a short list of symbols common in report
// text counts as punctuation, everything else is a word character.
bool is_punct(char32_t cp) {
  if (cp < 128) return !is_ascii_alnum(cp) && !is_space(cp);
  switch (cp) {
    case 0x00D7:  // multiplication sign
    case 0x00B0:  // degree
    case 0x00B1:  // plus-minus
    case 0x2013:  // en dash
    case 0x2014:  // em dash
    case 0x2018:
    case 0x2019:
    case 0x201C:
    case 0x201D:
      return true;
    default:
      return false;
  }
}

bool is_word_char(char32_t cp) { return !is_space(cp) && !is_punct(cp); }

}  // namespace

// ---------------------------------------------------------------------------
// TagSet

TagSet::TagSet(std::vector<Category> categories)
    : categories_(std::move(categories)) {
  names_.push_back("O");
  for (Category category : categories_) {
    if (category == Category::kOther)
      throw Error("OTHER has no BIO tags");
    begin_[category] = static_cast<TagId>(names_.size());
    names_.push_back("B-" + render_category(category));
    names_.push_back("I-" + render_category(category));
  }
}

const TagSet& TagSet::full() {
  static const TagSet instance(taggable_categories());
  return instance;
}

TagId TagSet::begin_tag(Category category) const {
  auto it = begin_.find(category);
  if (it == begin_.end())
    throw Error("category " + render_category(category) + " not in tag set");
  return it->second;
}

TagId TagSet::inside_tag(Category category) const {
  return begin_tag(category) + 1;
}

Category TagSet::category_of(TagId tag) const {
  return categories_[(tag - 1) / 2];
}

TagId TagSet::from_name(const std::string& name) const {
  for (TagId t = 0; t < size(); ++t) {
    if (names_[t] == name) return t;
  }
  throw Error("unknown BIO tag \"" + name + "\"");
}

bool TagSet::transition_allowed(TagId prev, TagId next) const {
  if (!is_inside(next)) return true;
  // I-C needs B-C or I-C directly before it.
  return !is_outside(prev) && category_of(prev) == category_of(next);
}

bool TagSet::start_allowed(TagId tag) const { return !is_inside(tag); }

TransitionConstraints TransitionConstraints::from(const TagSet& tags) {
  TransitionConstraints constraints;
  constraints.tag_count = tags.size();
  constraints.allowed.assign(
      static_cast<std::size_t>(tags.size()) * tags.size(), 0);
  constraints.start_allowed.assign(tags.size(), 0);
  for (TagId prev = 0; prev < tags.size(); ++prev) {
    for (TagId next = 0; next < tags.size(); ++next) {
      constraints.allowed[static_cast<std::size_t>(prev) * tags.size() + next] =
          tags.transition_allowed(prev, next) ? 1 : 0;
    }
  }
  for (TagId tag = 0; tag < tags.size(); ++tag) {
    constraints.start_allowed[tag] = tags.start_allowed(tag) ? 1 : 0;
  }
  return constraints;
}

// ---------------------------------------------------------------------------
// Tokenizer

std::vector<Token> tokenize(const std::string& text) {
  const std::vector<char32_t> cps = utf8::decode(text);
  std::vector<Token> tokens;

  std::size_t i = 0;
  const std::size_t n = cps.size();
  while (i < n) {
    if (is_space(cps[i])) {
      ++i;
      continue;
    }
    // Chunk = maximal non-whitespace run.
    std::size_t chunk_end = i;
    while (chunk_end < n && !is_space(cps[chunk_end])) ++chunk_end;

    // Keep-together exceptions are judged inside the chunk: a '.' between
    // digits ("2.2") and a '-' between alphanumerics ("TI-RADS") stay
    // internal; every other punctuation codepoint becomes its own token.
    const std::size_t chunk_start = i;
    auto kept_internal = [&](std::size_t k) {
      if (k == chunk_start || k + 1 >= chunk_end) return false;
      if (cps[k] == U'.')
        return is_ascii_digit(cps[k - 1]) && is_ascii_digit(cps[k + 1]);
      if (cps[k] == U'-')
        return is_ascii_alnum(cps[k - 1]) && is_ascii_alnum(cps[k + 1]);
      return false;
    };

    while (i < chunk_end) {
      std::size_t start = i;
      if (is_punct(cps[i]) && !kept_internal(i)) {
        ++i;
      } else {
        while (i < chunk_end && (is_word_char(cps[i]) || kept_internal(i))) ++i;
      }
      Token token;
      token.span = {start, i};
      token.text = utf8::encode(cps.data() + start, i - start);
      token.index = static_cast<int>(tokens.size());
      tokens.push_back(std::move(token));
    }
  }
  return tokens;
}

// ---------------------------------------------------------------------------
// Sentence segmentation

namespace {

bool is_number_token(const std::string& text) {
  if (text.empty()) return false;
  bool digit_seen = false;
  bool dot_seen = false;
  for (char c : text) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digit_seen = true;
    } else if (c == '.' && !dot_seen) {
      dot_seen = true;
    } else {
      return false;
    }
  }
  return digit_seen;
}

bool is_times_token(const std::string& text) {
  return text == "x" || text == "X" || text == "\xc3\x97";  // ×
}

bool is_unit_token(const std::string& text) {
  return text == "cm" || text == "mm" || text == "CM" || text == "MM";
}

// Marks tokens inside measurement triplets NUM x NUM x NUM [unit];
// sentence boundaries never fall between them.
std::vector<bool> mark_measurement_triplets(const std::vector<Token>& tokens) {
  std::vector<bool> in_triplet(tokens.size(), false);
  for (std::size_t i = 0; i + 4 < tokens.size(); ++i) {
    if (is_number_token(tokens[i].text) && is_times_token(tokens[i + 1].text) &&
        is_number_token(tokens[i + 2].text) &&
        is_times_token(tokens[i + 3].text) &&
        is_number_token(tokens[i + 4].text)) {
      std::size_t end = i + 4;
      if (end + 1 < tokens.size() && is_unit_token(tokens[end + 1].text))
        ++end;
      for (std::size_t k = i; k <= end; ++k) in_triplet[k] = true;
    }
  }
  return in_triplet;
}

}  // namespace

std::vector<Sentence> segment_sentences(const std::vector<Token>& tokens,
                                        const std::string& text) {
  std::vector<Sentence> sentences;
  if (tokens.empty()) return sentences;

  const std::vector<char32_t> cps = utf8::decode(text);
  const std::vector<bool> in_triplet = mark_measurement_triplets(tokens);

  auto gap_has_newline = [&](std::size_t from, std::size_t to) {
    for (std::size_t k = from; k < to && k < cps.size(); ++k) {
      if (cps[k] == U'\n' || cps[k] == U'\r') return true;
    }
    return false;
  };

  int first = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const bool last_token = (i + 1 == tokens.size());
    bool boundary = last_token;
    if (!boundary) {
      const std::string& t = tokens[i].text;
      if (t == "." || t == "!" || t == "?") boundary = true;
      if (!boundary &&
          gap_has_newline(tokens[i].span.end, tokens[i + 1].span.start))
        boundary = true;
      if (boundary && in_triplet[i] && in_triplet[i + 1]) boundary = false;
    }
    if (boundary) {
      sentences.push_back({first, static_cast<int>(i)});
      first = static_cast<int>(i) + 1;
    }
  }
  return sentences;
}

// ---------------------------------------------------------------------------
// Mention/token alignment

MentionAlignment align_mentions(const AnnotatedDocument& doc,
                                const std::vector<Token>& tokens) {
  MentionAlignment alignment;
  for (const auto& mention : doc.mentions) {
    int first = -1;
    int last = -1;
    for (const auto& token : tokens) {
      if (token.span.end > mention.span.start &&
          token.span.start < mention.span.end) {
        if (first < 0) first = token.index;
        last = token.index;
      }
    }
    if (first < 0) {
      throw Error("mention " + mention.id +
                  " cannot be aligned: span covers no token");
    }
    if (tokens[first].span.start < mention.span.start ||
        tokens[last].span.end > mention.span.end) {
      alignment.warnings.push_back(
          "mention " + mention.id + " snapped outward to token boundaries [" +
          std::to_string(tokens[first].span.start) + ", " +
          std::to_string(tokens[last].span.end) + ")");
    }
    alignment.ranges[mention.id] = {first, last};
  }
  return alignment;
}

// ---------------------------------------------------------------------------
// BIO encoding / decoding

BioEncoding spans_to_bio(const AnnotatedDocument& doc,
                         const std::vector<Token>& tokens,
                         const MentionAlignment& alignment,
                         const TagSet& tags,
                         OverlapPolicy policy) {
  BioEncoding encoding;
  encoding.tags.assign(tokens.size(), tags.outside());

  struct Claim {
    Category category;
    int first;
    int last;
    std::size_t char_length;
    std::string id;
  };
  std::vector<Claim> claims;
  for (const auto& mention : doc.mentions) {
    if (mention.category == Category::kOther) continue;
    const auto it = alignment.ranges.find(mention.id);
    if (it == alignment.ranges.end())
      throw Error("mention " + mention.id + " missing from alignment");
    claims.push_back({mention.category, it->second.first, it->second.last,
                      mention.span.length(), mention.id});
  }

  // Same-category overlapping or adjacent-overlapping claims merge into
  // one range; BIO cannot express the distinction.
  std::sort(claims.begin(), claims.end(), [](const Claim& a, const Claim& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.last > b.last;
  });
  std::vector<Claim> merged;
  for (const auto& claim : claims) {
    if (!merged.empty() && merged.back().category == claim.category &&
        claim.first <= merged.back().last) {
      encoding.warnings.push_back("merged same-category mentions " +
                                  merged.back().id + " and " + claim.id);
      merged.back().last = std::max(merged.back().last, claim.last);
      merged.back().char_length =
          std::max(merged.back().char_length, claim.char_length);
      continue;
    }
    merged.push_back(claim);
  }

  // Cross-category conflicts: longer mention wins, loser dropped.
  std::vector<bool> dropped(merged.size(), false);
  for (std::size_t i = 0; i < merged.size(); ++i) {
    if (dropped[i]) continue;
    for (std::size_t j = i + 1; j < merged.size(); ++j) {
      if (dropped[j]) continue;
      if (merged[j].first > merged[i].last) break;
      if (merged[i].category == merged[j].category) continue;
      if (policy == OverlapPolicy::kStrict) {
        throw Error("mentions " + merged[i].id + " and " + merged[j].id +
                    " of different categories claim the same token");
      }
      const bool keep_i = merged[i].char_length >= merged[j].char_length;
      const std::size_t loser = keep_i ? j : i;
      dropped[loser] = true;
      encoding.dropped_mention_ids.push_back(merged[loser].id);
      encoding.warnings.push_back(
          "dropped mention " + merged[loser].id + " (" +
          render_category(merged[loser].category) +
          "): cross-category overlap with " + merged[keep_i ? i : j].id);
      if (!keep_i) break;
    }
  }

  for (std::size_t i = 0; i < merged.size(); ++i) {
    if (dropped[i]) continue;
    encoding.tags[merged[i].first] = tags.begin_tag(merged[i].category);
    for (int t = merged[i].first + 1; t <= merged[i].last; ++t) {
      encoding.tags[t] = tags.inside_tag(merged[i].category);
    }
  }
  return encoding;
}

BioDecoding bio_to_spans(const std::string& text,
                         const std::vector<Token>& tokens,
                         const std::vector<TagId>& tag_sequence,
                         const TagSet& tags) {
  if (tokens.size() != tag_sequence.size()) {
    throw Error("bio_to_spans: " + std::to_string(tag_sequence.size()) +
                " tags for " + std::to_string(tokens.size()) + " tokens");
  }

  BioDecoding decoding;
  std::vector<TagId> repaired = tag_sequence;
  for (std::size_t i = 0; i < repaired.size(); ++i) {
    if (!tags.is_inside(repaired[i])) continue;
    const TagId prev = i == 0 ? tags.outside() : repaired[i - 1];
    const bool compatible = !tags.is_outside(prev) && i > 0 &&
                            tags.category_of(prev) == tags.category_of(repaired[i]);
    if (!compatible) {
      repaired[i] = tags.begin_tag(tags.category_of(repaired[i]));  // IOB2 repair
      ++decoding.repairs;
    }
  }

  std::size_t i = 0;
  while (i < repaired.size()) {
    if (!tags.is_begin(repaired[i])) {
      ++i;
      continue;
    }
    const Category category = tags.category_of(repaired[i]);
    std::size_t last = i;
    while (last + 1 < repaired.size() && tags.is_inside(repaired[last + 1]) &&
           tags.category_of(repaired[last + 1]) == category) {
      ++last;
    }
    EntityMention mention;
    mention.id = "m" + std::to_string(decoding.mentions.size());
    mention.category = category;
    mention.span = {tokens[i].span.start, tokens[last].span.end};
    mention.text = utf8::substr(text, mention.span.start, mention.span.end);
    decoding.mentions.push_back(std::move(mention));
    i = last + 1;
  }
  return decoding;
}

}  // namespace thyrex
