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

#include "thyrex/schema.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_set>

#include "thyrex/utf8.hpp"

namespace thyrex {

namespace {

const std::array<std::string, kCategoryCount> kCategoryNames = {
    "THYROID_NODULE",
    "CERVICAL_LYMPH_NODE",
    "SIZE_NUMERIC",
    "SIZE_QUALITATIVE",
    "LATERALITY",
    "LOCATION",
    "COMPOSITION",
    "ECHOGENICITY",
    "MARGINS",
    "SHAPE",
    "ECHOGENIC_FOCI",
    "VASCULARITY",
    "TIRADS_SCORE",
    "TIRADS_RISK_CATEGORY",
    "TOTAL_NUMBER_OF_NODULES",
    "RISK_DESCRIPTION",
    "OTHER",
};

std::string ascii_upper(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::toupper(c));
  });
  return out;
}

}  // namespace

const std::string& render_category(Category category) {
  return kCategoryNames[static_cast<int>(category)];
}

Category parse_category(const std::string& name) {
  const std::string upper = ascii_upper(name);
  for (int i = 0; i < kCategoryCount; ++i) {
    if (upper == kCategoryNames[i]) return static_cast<Category>(i);
  }
  throw Error("unknown category name: \"" + name + "\"");
}

const std::vector<Category>& all_categories() {
  static const std::vector<Category> categories = [] {
    std::vector<Category> out;
    for (int i = 0; i < kCategoryCount; ++i) out.push_back(static_cast<Category>(i));
    return out;
  }();
  return categories;
}

const std::vector<Category>& taggable_categories() {
  static const std::vector<Category> categories = [] {
    std::vector<Category> out;
    for (int i = 0; i < kTaggableCategoryCount; ++i)
      out.push_back(static_cast<Category>(i));
    return out;
  }();
  return categories;
}

bool is_anchor_category(Category category) {
  return category == Category::kThyroidNodule ||
         category == Category::kCervicalLymphNode;
}

bool is_characteristic_category(Category category) {
  return !is_anchor_category(category) && category != Category::kOther;
}

const EntityMention* AnnotatedDocument::find_mention(
    const std::string& mention_id) const {
  for (const auto& mention : mentions) {
    if (mention.id == mention_id) return &mention;
  }
  return nullptr;
}

std::size_t NoduleProfile::characteristic_count() const {
  std::size_t n = 0;
  for (const auto& [category, mentions] : characteristics) n += mentions.size();
  return n;
}

std::string Violation::to_string() const {
  return std::string(severity == Severity::kError ? "error" : "warning") + " [" +
         subject_id + "]: " + rule;
}

ValidationReport validate_document(const AnnotatedDocument& doc) {
  ValidationReport report;
  const std::size_t text_length = utf8::length(doc.text);

  std::unordered_set<std::string> seen_ids;
  for (const auto& mention : doc.mentions) {
    if (!seen_ids.insert(mention.id).second) {
      report.errors.push_back(
          {Severity::kError, mention.id, "duplicate mention id"});
    }
    if (mention.span.start >= mention.span.end) {
      report.errors.push_back(
          {Severity::kError, mention.id, "span must satisfy start < end"});
      continue;
    }
    if (mention.span.end > text_length) {
      report.errors.push_back(
          {Severity::kError, mention.id, "span end exceeds document length"});
      continue;
    }
    const std::string actual =
        utf8::substr(doc.text, mention.span.start, mention.span.end);
    if (actual != mention.text) {
      report.errors.push_back(
          {Severity::kError, mention.id,
           "mention text \"" + mention.text +
               "\" does not match document substring \"" + actual + "\""});
    }
  }

  // Same-category overlaps are legal but suspicious; they cannot be
  // expressed in BIO and usually indicate an annotation slip.
  for (std::size_t i = 0; i < doc.mentions.size(); ++i) {
    for (std::size_t j = i + 1; j < doc.mentions.size(); ++j) {
      const auto& a = doc.mentions[i];
      const auto& b = doc.mentions[j];
      if (a.category == b.category && a.span.overlaps(b.span)) {
        report.warnings.push_back(
            {Severity::kWarning, a.id + "/" + b.id,
             "same-category mentions overlap"});
      }
    }
  }

  for (const auto& relation : doc.relations) {
    const std::string rel_id = relation.head_id + "->" + relation.tail_id;
    const EntityMention* head = doc.find_mention(relation.head_id);
    const EntityMention* tail = doc.find_mention(relation.tail_id);
    if (head == nullptr) {
      report.errors.push_back(
          {Severity::kError, rel_id, "relation head mention does not exist"});
    }
    if (tail == nullptr) {
      report.errors.push_back(
          {Severity::kError, rel_id, "relation tail mention does not exist"});
    }
    if (head != nullptr && !is_characteristic_category(head->category)) {
      report.errors.push_back(
          {Severity::kError, rel_id,
           "relation head must be a characteristic, got " +
               render_category(head->category)});
    }
    if (tail != nullptr && !is_anchor_category(tail->category)) {
      report.errors.push_back(
          {Severity::kError, rel_id,
           "relation tail must be a nodule or lymph node, got " +
               render_category(tail->category)});
    }
    if (relation.type != kAttributeOfRelation) {
      report.errors.push_back(
          {Severity::kError, rel_id,
           "unknown relation type \"" + relation.type + "\""});
    }
  }

  return report;
}

}  // namespace thyrex
