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

#include "thyrex/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

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

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

struct DefaultEntry {
  Category category;
  bool is_pattern;
  const char* text;
};

// Surface forms of the 16 categories. Phrases are matched on token
// boundaries, case-insensitively; patterns are regexes anchored to
// token boundaries at match time.
const DefaultEntry kDefaultEntries[] = {
    {Category::kThyroidNodule, false, "thyroid nodule"},
    {Category::kThyroidNodule, false, "thyroid nodules"},
    {Category::kThyroidNodule, false, "nodule"},
    {Category::kThyroidNodule, false, "nodules"},
    {Category::kThyroidNodule, false, "largest nodule"},
    {Category::kThyroidNodule, false, "highest scoring TI-RADS nodule"},

    {Category::kCervicalLymphNode, false, "lymph node"},
    {Category::kCervicalLymphNode, false, "lymph nodes"},
    {Category::kCervicalLymphNode, false, "cervical lymph node"},
    {Category::kCervicalLymphNode, false, "cervical lymph nodes"},

    // Measurement triplets, comparators, ranges, single measurements.
    {Category::kSizeNumeric, true,
     R"(\d+(\.\d+)?\s*(x|×)\s*\d+(\.\d+)?\s*(x|×)\s*\d+(\.\d+)?(\s*(cm|mm))?)"},
    {Category::kSizeNumeric, true, R"(between\s+\d+(\.\d+)?-\d+(\.\d+)?\s*(cm|mm))"},
    {Category::kSizeNumeric, true, R"([<>]\s*\d+(\.\d+)?\s*(cm|mm))"},
    {Category::kSizeNumeric, true, R"(\d+(\.\d+)?\s*(cm|mm))"},

    {Category::kSizeQualitative, false, "small"},
    {Category::kSizeQualitative, false, "large"},
    {Category::kSizeQualitative, false, "tiny"},
    {Category::kSizeQualitative, false, "sub-centimeter"},

    {Category::kLaterality, false, "right lobe"},
    {Category::kLaterality, false, "left lobe"},
    {Category::kLaterality, false, "right lower lobe"},
    {Category::kLaterality, false, "right upper lobe"},
    {Category::kLaterality, false, "right mid lobe"},
    {Category::kLaterality, false, "left lower lobe"},
    {Category::kLaterality, false, "left upper lobe"},
    {Category::kLaterality, false, "left mid lobe"},
    {Category::kLaterality, false, "upper left lobe"},
    {Category::kLaterality, false, "upper right lobe"},
    {Category::kLaterality, false, "lower left lobe"},
    {Category::kLaterality, false, "lower right lobe"},
    {Category::kLaterality, false, "isthmus"},

    {Category::kLocation, false, "upper"},
    {Category::kLocation, false, "middle"},
    {Category::kLocation, false, "lower"},
    {Category::kLocation, false, "mid"},

    {Category::kComposition, false, "solid"},
    {Category::kComposition, false, "cystic"},
    {Category::kComposition, false, "purely cystic"},
    {Category::kComposition, false, "mostly cystic"},
    {Category::kComposition, false, "completely cystic"},
    {Category::kComposition, false, "almost completely cystic"},
    {Category::kComposition, false, "spongiform"},
    {Category::kComposition, false, "mixed cystic and solid"},
    {Category::kComposition, false, "mostly solid"},

    {Category::kEchogenicity, false, "hyperechoic"},
    {Category::kEchogenicity, false, "isoechoic"},
    {Category::kEchogenicity, false, "hypoechoic"},
    {Category::kEchogenicity, false, "very hypoechoic"},
    {Category::kEchogenicity, false, "anechoic"},
    {Category::kEchogenicity, false, "can't determine"},

    {Category::kMargins, false, "smooth"},
    {Category::kMargins, false, "ill defined"},
    {Category::kMargins, false, "ill-defined"},
    {Category::kMargins, false, "lobulated"},
    {Category::kMargins, false, "irregular"},
    {Category::kMargins, false, "extra thyroidal extension"},
    {Category::kMargins, false, "extrathyroidal extension"},
    {Category::kMargins, false, "well defined"},
    {Category::kMargins, false, "well-defined"},
    {Category::kMargins, false, "discrete"},
    {Category::kMargins, false, "poorly defined"},
    {Category::kMargins, false, "well circumscribed"},
    {Category::kMargins, false, "well-circumscribed"},

    {Category::kShape, false, "wider than tall"},
    {Category::kShape, false, "wider-than-tall"},
    {Category::kShape, false, "taller than wider"},
    {Category::kShape, false, "taller than wide"},
    {Category::kShape, false, "taller-than-wide"},
    {Category::kShape, false, "oval"},
    {Category::kShape, false, "round"},

    {Category::kEchogenicFoci, false, "comet tail artifact"},
    {Category::kEchogenicFoci, false, "comet tail artifacts"},
    {Category::kEchogenicFoci, false, "comet-tail artifact"},
    {Category::kEchogenicFoci, false, "macrocalcification"},
    {Category::kEchogenicFoci, false, "macrocalcifications"},
    {Category::kEchogenicFoci, false, "microcalcifications"},
    {Category::kEchogenicFoci, false, "peripheral calcification"},
    {Category::kEchogenicFoci, false, "peripheral calcifications"},
    {Category::kEchogenicFoci, false, "rim calcification"},
    {Category::kEchogenicFoci, false, "punctate echogenic foci"},
    {Category::kEchogenicFoci, false, "echogenic foci"},

    {Category::kVascularity, false, "high"},
    {Category::kVascularity, false, "normal"},
    {Category::kVascularity, false, "low vascularity"},
    {Category::kVascularity, false, "high vascularity"},
    {Category::kVascularity, false, "normal vascularity"},
    {Category::kVascularity, false, "increased vascularity"},
    {Category::kVascularity, false, "decreased vascularity"},
    {Category::kVascularity, false, "increase/decreased vascularity"},

    {Category::kTiradsScore, true, R"((ACR[- ])?(TI-?RADS|TIR)\s*:?\s*[1-5])"},

    {Category::kTiradsRiskCategory, false, "benign"},
    {Category::kTiradsRiskCategory, false, "not suspicious"},
    {Category::kTiradsRiskCategory, false, "mildly suspicious"},
    {Category::kTiradsRiskCategory, false, "moderately suspicious"},
    {Category::kTiradsRiskCategory, false, "highly suspicious"},
    {Category::kTiradsRiskCategory, true, R"(TR\s*[1-5])"},

    {Category::kTotalNumberOfNodules, false, "multiple thyroid nodules"},
    {Category::kTotalNumberOfNodules, false, "multiple nodules"},
    {Category::kTotalNumberOfNodules, true,
     R"((two|three|four|five|six|several|numerous|multiple)\s+(thyroid\s+)?nodules)"},

    {Category::kRiskDescription, false, "normal"},
    {Category::kRiskDescription, false, "benign appearing"},
    {Category::kRiskDescription, false, "benign-appearing"},
    {Category::kRiskDescription, false, "suspicious"},
    {Category::kRiskDescription, false, "concerning"},
    {Category::kRiskDescription, false, "metastatic"},
    {Category::kRiskDescription, false, "malignant"},
};

}  // namespace

void Lexicon::add_phrase(Category category, const std::string& phrase) {
  if (category == Category::kOther) throw Error("lexicon entries cannot be OTHER");
  if (trim(phrase).empty()) throw Error("empty lexicon phrase");
  entries_.push_back({category, false, phrase});
}

void Lexicon::add_pattern(Category category, const std::string& pattern) {
  if (category == Category::kOther) throw Error("lexicon entries cannot be OTHER");
  try {
    std::regex probe(pattern, std::regex::ECMAScript | std::regex::icase);
  } catch (const std::regex_error& e) {
    throw Error("lexicon pattern does not compile: /" + pattern + "/: " + e.what());
  }
  entries_.push_back({category, true, pattern});
}

void Lexicon::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open lexicon file: " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError("lexicon line needs CATEGORY<TAB>entry", line_no);
    Category category;
    try {
      category = parse_category(trim(line.substr(0, tab)));
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    }
    const std::string entry = trim(line.substr(tab + 1));
    if (entry.empty()) throw ParseError("empty lexicon entry", line_no);
    try {
      if (entry.size() >= 2 && entry.front() == '/' && entry.back() == '/') {
        add_pattern(category, entry.substr(1, entry.size() - 2));
      } else {
        add_phrase(category, entry);
      }
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    }
  }
}

const Lexicon& Lexicon::defaults() {
  static const Lexicon instance = [] {
    Lexicon lexicon;
    for (const auto& entry : kDefaultEntries) {
      if (entry.is_pattern) {
        lexicon.add_pattern(entry.category, entry.text);
      } else {
        lexicon.add_phrase(entry.category, entry.text);
      }
    }
    return lexicon;
  }();
  return instance;
}

// ---------------------------------------------------------------------------
// Matching

LexiconMatcher::LexiconMatcher(const Lexicon& lexicon) {
  for (const auto& entry : lexicon.entries()) {
    if (entry.is_pattern) {
      patterns_.push_back(
          {entry.category,
           std::regex(entry.text, std::regex::ECMAScript | std::regex::icase)});
    } else {
      CompiledPhrase phrase;
      phrase.category = entry.category;
      for (const Token& token : tokenize(entry.text)) {
        phrase.lower_tokens.push_back(ascii_lower(token.text));
      }
      if (!phrase.lower_tokens.empty()) phrases_.push_back(std::move(phrase));
    }
  }
}

std::vector<EntityMention> LexiconMatcher::match(
    const std::string& text, const std::vector<Token>& tokens) const {
  struct Candidate {
    int first_token;
    int last_token;
    std::size_t char_length;
    int kind;  // 0 = phrase, 1 = pattern; phrases win length ties
    Category category;
  };
  std::vector<Candidate> candidates;

  std::vector<std::string> lower_tokens;
  lower_tokens.reserve(tokens.size());
  for (const auto& token : tokens) lower_tokens.push_back(ascii_lower(token.text));

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (const auto& phrase : phrases_) {
      const std::size_t k = phrase.lower_tokens.size();
      if (i + k > tokens.size()) continue;
      bool matches = true;
      for (std::size_t j = 0; j < k; ++j) {
        if (lower_tokens[i + j] != phrase.lower_tokens[j]) {
          matches = false;
          break;
        }
      }
      if (matches) {
        const Span span = {tokens[i].span.start, tokens[i + k - 1].span.end};
        candidates.push_back({static_cast<int>(i), static_cast<int>(i + k - 1),
                              span.length(), 0, phrase.category});
      }
    }
  }

  // Patterns run over the raw text; a hit only counts when it starts at
  // a token start and ends at a token end.
  if (!patterns_.empty() && !tokens.empty()) {
    const std::vector<std::size_t> offsets = utf8::byte_offsets(text);
    std::map<std::size_t, std::size_t> byte_to_cp;
    for (std::size_t cp = 0; cp < offsets.size(); ++cp) byte_to_cp[offsets[cp]] = cp;
    std::map<std::size_t, int> start_token, end_token;
    for (const auto& token : tokens) {
      start_token[token.span.start] = token.index;
      end_token[token.span.end] = token.index;
    }
    for (const auto& pattern : patterns_) {
      for (auto it = std::sregex_iterator(text.begin(), text.end(), pattern.regex);
           it != std::sregex_iterator(); ++it) {
        const std::size_t byte_start = static_cast<std::size_t>(it->position());
        const std::size_t byte_end = byte_start + it->length();
        const auto cps = byte_to_cp.find(byte_start);
        const auto cpe = byte_to_cp.find(byte_end);
        if (cps == byte_to_cp.end() || cpe == byte_to_cp.end()) continue;
        const auto ts = start_token.find(cps->second);
        const auto te = end_token.find(cpe->second);
        if (ts == start_token.end() || te == end_token.end()) continue;
        candidates.push_back({ts->second, te->second,
                              cpe->second - cps->second, 1, pattern.category});
      }
    }
  }

  // Longest-match-first, left to right: earlier starts claim their
  // tokens before anything later; at one start the longest span wins,
  // phrases beat patterns on ties, then canonical category order.
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.first_token != b.first_token) return a.first_token < b.first_token;
              if (a.char_length != b.char_length) return a.char_length > b.char_length;
              if (a.kind != b.kind) return a.kind < b.kind;
              return static_cast<int>(a.category) < static_cast<int>(b.category);
            });

  std::vector<EntityMention> mentions;
  std::vector<bool> occupied(tokens.size(), false);
  for (const auto& candidate : candidates) {
    bool free = true;
    for (int t = candidate.first_token; t <= candidate.last_token; ++t) {
      if (occupied[t]) {
        free = false;
        break;
      }
    }
    if (!free) continue;
    for (int t = candidate.first_token; t <= candidate.last_token; ++t)
      occupied[t] = true;
    EntityMention mention;
    mention.id = "m" + std::to_string(mentions.size());
    mention.category = candidate.category;
    mention.span = {tokens[candidate.first_token].span.start,
                    tokens[candidate.last_token].span.end};
    mention.text = utf8::substr(text, mention.span.start, mention.span.end);
    mentions.push_back(std::move(mention));
  }

  std::sort(mentions.begin(), mentions.end(),
            [](const EntityMention& a, const EntityMention& b) {
              return a.span.start < b.span.start;
            });
  for (std::size_t i = 0; i < mentions.size(); ++i)
    mentions[i].id = "m" + std::to_string(i);
  return mentions;
}

std::vector<EntityMention> lexicon_tag(const std::string& text,
                                       const std::vector<Token>& tokens,
                                       const Lexicon& lexicon) {
  return LexiconMatcher(lexicon).match(text, tokens);
}

}  // namespace thyrex
