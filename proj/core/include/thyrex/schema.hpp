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

#ifndef THYREX_SCHEMA_HPP_
#define THYREX_SCHEMA_HPP_

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "thyrex/error.hpp"

namespace thyrex {

// The entity schema: 16 nodule/characteristic categories plus OTHER.
// OTHER is an annotation-time escape hatch; it is kept in files but
// filtered out before training and scoring.
enum class Category : int {
  kThyroidNodule = 0,
  kCervicalLymphNode,
  kSizeNumeric,
  kSizeQualitative,
  kLaterality,
  kLocation,
  kComposition,
  kEchogenicity,
  kMargins,
  kShape,
  kEchogenicFoci,
  kVascularity,
  kTiradsScore,
  kTiradsRiskCategory,
  kTotalNumberOfNodules,
  kRiskDescription,
  kOther,
};

inline constexpr int kCategoryCount = 17;
inline constexpr int kTaggableCategoryCount = 16;  // everything but OTHER

/// Canonical name, identical in every file format ("THYROID_NODULE", ...).
const std::string& render_category(Category category);

/// Case-insensitive inverse of render_category. Throws Error on unknown names.
Category parse_category(const std::string& name);

/// All 17 categories in canonical order.
const std::vector<Category>& all_categories();

/// The 16 non-OTHER categories in canonical order.
const std::vector<Category>& taggable_categories();

/// True for THYROID_NODULE and CERVICAL_LYMPH_NODE, the anchor side of
/// a relation.
bool is_anchor_category(Category category);

/// True for categories that may head a relation (not anchor, not OTHER).
bool is_characteristic_category(Category category);

/// Character span, codepoint offsets, [start, end).
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  bool overlaps(const Span& other) const {
    return start < other.end && other.start < end;
  }
  friend bool operator==(const Span&, const Span&) = default;
};

struct EntityMention {
  std::string id;
  Category category = Category::kOther;
  Span span;
  std::string text;  // must equal the document substring at span

  friend bool operator==(const EntityMention&, const EntityMention&) = default;
};

inline constexpr const char* kAttributeOfRelation = "ATTRIBUTE_OF";

/// Directed characteristic -> anchor link.
struct Relation {
  std::string head_id;  // characteristic mention
  std::string tail_id;  // anchor mention (nodule or lymph node)
  std::string type = kAttributeOfRelation;

  friend bool operator==(const Relation&, const Relation&) = default;
};

struct AnnotatedDocument {
  std::string id;
  std::string text;
  std::vector<EntityMention> mentions;
  std::vector<Relation> relations;
  std::map<std::string, std::string> meta;

  /// Mention lookup by id; nullptr when absent.
  const EntityMention* find_mention(const std::string& mention_id) const;
};

/// An anchor mention with its linked characteristics, grouped by category.
struct NoduleProfile {
  EntityMention anchor;
  std::map<Category, std::vector<EntityMention>> characteristics;

  std::size_t characteristic_count() const;
};

enum class Severity { kError, kWarning };

struct Violation {
  Severity severity = Severity::kError;
  std::string subject_id;  // mention or relation id ("head->tail" for relations)
  std::string rule;

  std::string to_string() const;
};

struct ValidationReport {
  std::vector<Violation> errors;
  std::vector<Violation> warnings;  // e.g. same-category span overlaps

  bool clean() const { return errors.empty(); }
};

/// Checks every schema invariant: span bounds, text integrity, id
/// uniqueness, relation endpoint existence and category typing.
/// Violations are data, not failures; same-category overlaps only warn.
ValidationReport validate_document(const AnnotatedDocument& doc);

}  // namespace thyrex

#endif  // THYREX_SCHEMA_HPP_
