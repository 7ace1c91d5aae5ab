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

#include "thyrex/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>

#include "thyrex/rng.hpp"
#include "thyrex/utf8.hpp"

namespace thyrex {

SynthConfig::SynthConfig() {
  presence = {
      {Category::kThyroidNodule, 1.0},
      {Category::kCervicalLymphNode, 0.45},
      {Category::kSizeNumeric, 0.9},
      {Category::kSizeQualitative, 0.35},
      {Category::kLaterality, 0.95},
      {Category::kLocation, 0.5},
      {Category::kComposition, 0.85},
      {Category::kEchogenicity, 0.85},
      {Category::kMargins, 0.7},
      {Category::kShape, 0.6},
      {Category::kEchogenicFoci, 0.45},
      {Category::kVascularity, 0.3},
      {Category::kTiradsScore, 0.75},
      {Category::kTiradsRiskCategory, 0.5},
      {Category::kTotalNumberOfNodules, 0.8},
      {Category::kRiskDescription, 0.35},
  };
}

namespace {

// Appends literal text and tracked mention slots while keeping exact
// codepoint offsets, so gold spans never need re-alignment.
struct Builder {
  std::string text;
  std::size_t cp_len = 0;
  std::vector<EntityMention> mentions;
  std::vector<Relation> relations;
  int next_id = 1;

  void add(const std::string& chunk) {
    text += chunk;
    cp_len += utf8::length(chunk);
  }
  std::string mention(Category category, const std::string& surface) {
    EntityMention m;
    m.id = "T" + std::to_string(next_id++);
    m.category = category;
    m.span = {cp_len, cp_len + utf8::length(surface)};
    m.text = surface;
    mentions.push_back(std::move(m));
    add(mentions.back().text);
    return mentions.back().id;
  }
  void link(const std::string& head_id, const std::string& anchor_id) {
    relations.push_back({head_id, anchor_id, kAttributeOfRelation});
  }
};

struct SurfacePools {
  std::vector<std::string> lexicon;  // covered by Lexicon::defaults()
  std::vector<std::string> noise;    // deliberately out-of-lexicon variants
};

const SurfacePools& pools_for(Category category) {
  static const std::map<Category, SurfacePools> kPools = {
      {Category::kComposition,
       {{"solid", "cystic", "purely cystic", "mostly cystic", "spongiform",
         "mixed cystic and solid", "mostly solid", "completely cystic"},
        {"predominantly cystic", "predominantly solid", "partially cystic"}}},
      {Category::kEchogenicity,
       {{"hyperechoic", "isoechoic", "hypoechoic", "very hypoechoic", "anechoic"},
        {"markedly hypoechoic", "hypoechogenic", "mildly hypoechoic"}}},
      {Category::kMargins,
       {{"smooth", "ill defined", "ill-defined", "lobulated", "irregular",
         "well circumscribed", "well defined", "extrathyroidal extension"},
        {"microlobulated", "spiculated", "indistinct"}}},
      {Category::kShape,
       {{"wider than tall", "taller than wider", "taller than wide", "oval",
         "round", "wider-than-tall", "taller-than-wide"},
        {"ovoid"}}},
      {Category::kEchogenicFoci,
       {{"microcalcifications", "macrocalcifications", "comet tail artifacts",
         "comet-tail artifact", "peripheral calcifications",
         "punctate echogenic foci", "rim calcification"},
        {"coarse calcifications", "eggshell calcification"}}},
      {Category::kVascularity,
       {{"high vascularity", "normal vascularity", "increased vascularity",
         "low vascularity", "decreased vascularity"},
        {"elevated vascularity", "diminished vascularity"}}},
      {Category::kSizeQualitative,
       {{"small", "large", "tiny", "sub-centimeter"}, {"subcentimeter", "diminutive"}}},
      {Category::kLaterality,
       {{"right lobe", "left lobe", "isthmus", "right lower lobe",
         "left upper lobe", "right upper lobe", "left mid lobe",
         "Right lower lobe"},
        {}}},
      {Category::kLocation, {{"upper", "mid", "lower", "middle"}, {}}},
      {Category::kRiskDescription,
       {{"benign appearing", "suspicious", "concerning", "benign-appearing"},
        {"worrisome"}}},
      {Category::kCervicalLymphNode,
       {{"cervical lymph nodes", "lymph nodes"}, {}}},
  };
  return kPools.at(category);
}

std::string pick(Rng& rng, const std::vector<std::string>& pool) {
  return pool[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];
}

std::string pick_surface(Rng& rng, Category category, double noise_rate) {
  const SurfacePools& pools = pools_for(category);
  if (!pools.noise.empty() && rng.bernoulli(noise_rate))
    return pick(rng, pools.noise);
  return pick(rng, pools.lexicon);
}

std::string one_decimal(Rng& rng, int lo_tenths, int hi_tenths) {
  const int tenths = static_cast<int>(rng.uniform_int(lo_tenths, hi_tenths));
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
}

// All forms match the numeric-size lexicon patterns.
std::string size_numeric_surface(Rng& rng) {
  const int form = static_cast<int>(rng.uniform_int(0, 9));
  if (form <= 4) {
    const std::string separator = form == 0 ? " × " : " x ";
    return one_decimal(rng, 3, 45) + separator + one_decimal(rng, 3, 45) +
           separator + one_decimal(rng, 3, 45) + " cm";
  }
  if (form <= 7) {
    if (form == 5) return std::to_string(rng.uniform_int(2, 30)) + " mm";
    return one_decimal(rng, 3, 45) + " cm";
  }
  if (form == 8) {
    return std::string(rng.bernoulli(0.5) ? ">" : "<") + " " +
           std::to_string(rng.uniform_int(1, 4)) + " cm";
  }
  const int lo = static_cast<int>(rng.uniform_int(1, 3));
  return "between " + std::to_string(lo) + "-" + std::to_string(lo + 1) + " cm";
}

std::string count_word(int n) {
  switch (n) {
    case 2: return "two";
    case 3: return "three";
    case 4: return "four";
    case 5: return "five";
    default: return "multiple";
  }
}

std::string capitalize(std::string word) {
  if (!word.empty())
    word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
  return word;
}

// Risk-category surfaces stay consistent with the documented level.
std::string risk_phrase(Rng& rng, int level) {
  if (rng.bernoulli(0.4)) return "TR" + std::to_string(level);
  switch (level) {
    case 1: return "benign";
    case 2: return "not suspicious";
    case 3: return "mildly suspicious";
    case 4: return "moderately suspicious";
    default: return level == 5 ? "highly suspicious" : "benign";
  }
}

struct Slots {
  bool size_qual = false, size_num = false, comp = false, echo = false;
  bool lat = false, loc = false;
  bool marg = false, shape = false, foci = false, vasc = false;
  bool risk_desc = false, score = false, risk = false;
};

double presence_of(const SynthConfig& config, Category category) {
  const auto it = config.presence.find(category);
  return it == config.presence.end() ? 0.0 : it->second;
}

Slots draw_slots(Rng& rng, const SynthConfig& config, bool post_tirads, bool plural) {
  Slots slots;
  slots.size_qual = rng.bernoulli(presence_of(config, Category::kSizeQualitative));
  slots.size_num = rng.bernoulli(presence_of(config, Category::kSizeNumeric));
  slots.comp = rng.bernoulli(presence_of(config, Category::kComposition));
  slots.echo = rng.bernoulli(presence_of(config, Category::kEchogenicity));
  slots.lat = rng.bernoulli(presence_of(config, Category::kLaterality));
  slots.loc = rng.bernoulli(presence_of(config, Category::kLocation));
  slots.marg = rng.bernoulli(presence_of(config, Category::kMargins));
  slots.shape = rng.bernoulli(presence_of(config, Category::kShape));
  slots.foci = rng.bernoulli(presence_of(config, Category::kEchogenicFoci));
  slots.vasc = rng.bernoulli(presence_of(config, Category::kVascularity));
  slots.risk_desc = rng.bernoulli(presence_of(config, Category::kRiskDescription));
  slots.score = rng.bernoulli(presence_of(config, Category::kTiradsScore));
  slots.risk = rng.bernoulli(presence_of(config, Category::kTiradsRiskCategory));
  if (!post_tirads) {
    slots.score = false;
    slots.risk = false;
  }
  if (plural) {
    // Plural blocks keep the sentence compact: shared echogenicity and
    // location only, characteristics continue in the follow-up.
    slots.size_qual = false;
    slots.size_num = false;
    slots.comp = false;
  }
  slots.loc = slots.loc && slots.lat;
  return slots;
}

// One nodule block: an anchor sentence plus at most one follow-up
// sentence, so every linked characteristic stays within one sentence
// of its anchor.
void emit_nodule_block(Builder& b, Rng& rng, const SynthConfig& config,
                       bool post_tirads, bool plural) {
  const Slots slots = draw_slots(rng, config, post_tirads, plural);
  const int variant = static_cast<int>(rng.uniform_int(0, 1));

  std::vector<std::string> heads;  // linked after the anchor id exists
  std::string anchor_id;
  const auto slot = [&](Category category, const std::string& surface) {
    heads.push_back(b.mention(category, surface));
  };

  if (plural) {
    b.add("There are several similar-appearing ");
    if (slots.echo) {
      slot(Category::kEchogenicity, pick_surface(rng, Category::kEchogenicity,
                                                 config.noise_rate));
      b.add(" ");
    }
    anchor_id = b.mention(Category::kThyroidNodule, "nodules");
    if (slots.lat) {
      b.add(" in the ");
      if (slots.loc) {
        slot(Category::kLocation, pick_surface(rng, Category::kLocation,
                                               config.noise_rate));
        b.add(" pole of the ");
      }
      slot(Category::kLaterality, pick_surface(rng, Category::kLaterality,
                                               config.noise_rate));
    }
    b.add(".");
  } else if (variant == 0) {
    b.add("There is a ");
    if (slots.size_qual) {
      slot(Category::kSizeQualitative, pick_surface(rng, Category::kSizeQualitative,
                                                    config.noise_rate));
      b.add(" ");
    }
    if (slots.comp) {
      slot(Category::kComposition, pick_surface(rng, Category::kComposition,
                                                config.noise_rate));
      b.add(" ");
    }
    if (slots.echo) {
      slot(Category::kEchogenicity, pick_surface(rng, Category::kEchogenicity,
                                                 config.noise_rate));
      b.add(" ");
    }
    anchor_id = b.mention(Category::kThyroidNodule,
                          rng.bernoulli(0.3) ? "thyroid nodule" : "nodule");
    if (slots.size_num) {
      b.add(" measuring ");
      slot(Category::kSizeNumeric, size_numeric_surface(rng));
    }
    if (slots.lat) {
      b.add(" in the ");
      if (slots.loc) {
        slot(Category::kLocation, pick_surface(rng, Category::kLocation,
                                               config.noise_rate));
        b.add(" pole of the ");
      }
      slot(Category::kLaterality, pick_surface(rng, Category::kLaterality,
                                               config.noise_rate));
    }
    b.add(".");
  } else {
    b.add("A ");
    if (slots.size_qual) {
      slot(Category::kSizeQualitative, pick_surface(rng, Category::kSizeQualitative,
                                                    config.noise_rate));
      b.add(" ");
    }
    if (slots.echo) {
      slot(Category::kEchogenicity, pick_surface(rng, Category::kEchogenicity,
                                                 config.noise_rate));
      b.add(" ");
    }
    if (slots.comp) {
      slot(Category::kComposition, pick_surface(rng, Category::kComposition,
                                                config.noise_rate));
      b.add(" ");
    }
    anchor_id = b.mention(Category::kThyroidNodule,
                          rng.bernoulli(0.3) ? "thyroid nodule" : "nodule");
    b.add(" is present");
    if (slots.lat) {
      b.add(" in the ");
      slot(Category::kLaterality, pick_surface(rng, Category::kLaterality,
                                               config.noise_rate));
      if (slots.loc) {
        b.add(" (");
        slot(Category::kLocation, pick_surface(rng, Category::kLocation,
                                               config.noise_rate));
        b.add(" pole)");
      }
    }
    if (slots.size_num) {
      b.add(" and measures ");
      slot(Category::kSizeNumeric, size_numeric_surface(rng));
    }
    b.add(".");
  }

  const bool has_follow = slots.marg || slots.shape || slots.foci || slots.vasc ||
                          slots.risk_desc || slots.score || slots.risk;
  if (has_follow) {
    b.add(plural ? " They " : " It ");
    const std::string is_word = plural ? "are " : "is ";
    std::vector<int> clauses;  // 0 attr, 1 foci, 2 vasc, 3 risk_desc
    if (slots.marg || slots.shape) clauses.push_back(0);
    if (slots.foci) clauses.push_back(1);
    if (slots.vasc) clauses.push_back(2);
    if (slots.risk_desc) clauses.push_back(3);
    if (clauses.empty()) {
      b.add(is_word + "redemonstrated");
    }
    for (std::size_t i = 0; i < clauses.size(); ++i) {
      if (i > 0) b.add(", ");
      switch (clauses[i]) {
        case 0:
          b.add(is_word);
          if (slots.marg) {
            slot(Category::kMargins, pick_surface(rng, Category::kMargins,
                                                  config.noise_rate));
            if (slots.shape) b.add(" and ");
          }
          if (slots.shape) {
            slot(Category::kShape, pick_surface(rng, Category::kShape,
                                                config.noise_rate));
          }
          break;
        case 1:
          b.add(plural ? "contain " : "contains ");
          slot(Category::kEchogenicFoci, pick_surface(rng, Category::kEchogenicFoci,
                                                      config.noise_rate));
          break;
        case 2:
          b.add(plural ? "show " : "shows ");
          slot(Category::kVascularity, pick_surface(rng, Category::kVascularity,
                                                    config.noise_rate));
          break;
        case 3:
          b.add(is_word);
          slot(Category::kRiskDescription, pick_surface(rng, Category::kRiskDescription,
                                                        config.noise_rate));
          break;
      }
    }
    if (slots.score || slots.risk) {
      // The documented level is drawn independently of the other
      // characteristics; the consistency audit exists to catch this.
      const int level = static_cast<int>(rng.uniform_int(1, 5));
      if (slots.score) {
        static const char* kScoreForms[] = {"TI-RADS ", "TIRADS ", "ACR-TIRADS ",
                                            "TI-RADS: "};
        b.add("; ");
        slot(Category::kTiradsScore,
             kScoreForms[rng.uniform_int(0, 3)] + std::to_string(level));
        if (slots.risk) {
          b.add(" (");
          slot(Category::kTiradsRiskCategory, risk_phrase(rng, level));
          b.add(")");
        }
      } else {
        b.add("; ");
        slot(Category::kTiradsRiskCategory, risk_phrase(rng, level));
      }
    }
    b.add(".");
  }
  b.add("\n");
  for (const std::string& head : heads) b.link(head, anchor_id);
}

}  // namespace

std::vector<AnnotatedDocument> synth_generate(const SynthConfig& config) {
  if (config.doc_count < 1) throw Error("synth_generate: doc_count must be positive");
  if (config.min_nodules < 1 || config.max_nodules < config.min_nodules)
    throw Error("synth_generate: invalid nodule range");
  for (const auto& [category, probability] : config.presence) {
    if (probability < 0.0 || probability > 1.0)
      throw Error("synth_generate: presence probability out of [0,1] for " +
                  render_category(category));
  }
  for (const double rate :
       {config.noise_rate, config.multi_nodule_rate, config.anaphora_rate}) {
    if (rate < 0.0 || rate > 1.0) throw Error("synth_generate: rate out of [0,1]");
  }
  if (config.style != "post-tirads" && config.style != "pre-tirads" &&
      config.style != "mixed")
    throw Error("synth_generate: unknown style " + config.style);

  Rng rng(config.seed);
  std::vector<AnnotatedDocument> docs;
  docs.reserve(config.doc_count);

  for (int d = 0; d < config.doc_count; ++d) {
    const bool post_tirads =
        config.style == "mixed" ? rng.bernoulli(0.5) : config.style == "post-tirads";
    const int nodule_count =
        static_cast<int>(rng.uniform_int(config.min_nodules, config.max_nodules));

    Builder b;
    b.add("EXAM: US THYROID\n\nFINDINGS:\n");
    b.add("The thyroid gland is unremarkable in overall size and contour.\n");

    for (int n = 0; n < nodule_count; ++n) {
      const bool plural = rng.bernoulli(config.multi_nodule_rate);
      emit_nodule_block(b, rng, config, post_tirads, plural);
    }

    if (rng.bernoulli(presence_of(config, Category::kCervicalLymphNode))) {
      const int variant = static_cast<int>(rng.uniform_int(0, 2));
      if (variant == 0) {
        b.add("Unremarkable ");
        b.mention(Category::kCervicalLymphNode, "cervical lymph nodes");
        b.add(" bilaterally.\n");
      } else if (variant == 1) {
        b.add("Scattered ");
        const std::string size_id = b.mention(
            Category::kSizeQualitative,
            pick_surface(rng, Category::kSizeQualitative, config.noise_rate));
        b.add(" ");
        const std::string lymph_id =
            b.mention(Category::kCervicalLymphNode,
                      pick(rng, pools_for(Category::kCervicalLymphNode).lexicon));
        b.add(" are noted.\n");
        b.link(size_id, lymph_id);
      } else {
        b.add("A ");
        const std::string size_id =
            b.mention(Category::kSizeNumeric, size_numeric_surface(rng));
        b.add(" ");
        const std::string lymph_id =
            b.mention(Category::kCervicalLymphNode, "cervical lymph node");
        b.add(" is seen.\n");
        b.link(size_id, lymph_id);
      }
    }

    if (rng.bernoulli(config.anaphora_rate)) {
      b.add("The ");
      const std::string anchor_id =
          b.mention(Category::kThyroidNodule, "largest nodule");
      b.add(" measures ");
      const std::string size_id =
          b.mention(Category::kSizeNumeric, size_numeric_surface(rng));
      b.add(".\n");
      b.link(size_id, anchor_id);
    }

    b.add("\nIMPRESSION:\n");
    if (nodule_count >= 2 &&
        rng.bernoulli(presence_of(config, Category::kTotalNumberOfNodules))) {
      const int form = static_cast<int>(rng.uniform_int(0, 2));
      std::string surface;
      if (form == 0) {
        surface = capitalize(count_word(nodule_count)) + " thyroid nodules";
      } else if (form == 1) {
        surface = capitalize(count_word(nodule_count)) + " nodules";
      } else {
        surface = "Multiple thyroid nodules";
      }
      b.mention(Category::kTotalNumberOfNodules, surface);
      b.add(" as described above.\n");
    } else {
      b.add("Thyroid ultrasound findings as described above.\n");
    }
    if (!post_tirads && rng.bernoulli(0.5))
      b.add("Clinical correlation is recommended.\n");

    AnnotatedDocument doc;
    char id_buffer[32];
    std::snprintf(id_buffer, sizeof(id_buffer), "synth-%06d", d + 1);
    doc.id = id_buffer;
    doc.text = std::move(b.text);
    doc.mentions = std::move(b.mentions);
    doc.relations = std::move(b.relations);
    doc.meta["note_type"] = "IMAGING";
    doc.meta["style"] = post_tirads ? "post-tirads" : "pre-tirads";
    docs.push_back(std::move(doc));
  }
  return docs;
}

namespace {

std::string lower_copy(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

}  // namespace

std::vector<AnnotatedDocument> filter_reports(const std::vector<AnnotatedDocument>& docs,
                                              const std::vector<std::string>& keywords,
                                              const std::string& note_type) {
  std::vector<std::string> needles;
  needles.reserve(keywords.size());
  for (const std::string& keyword : keywords) needles.push_back(lower_copy(keyword));

  std::vector<AnnotatedDocument> kept;
  for (const AnnotatedDocument& doc : docs) {
    const auto it = doc.meta.find("note_type");
    if (it == doc.meta.end() || it->second != note_type) continue;
    if (!needles.empty()) {
      const std::string haystack = lower_copy(doc.text);
      const bool hit = std::any_of(needles.begin(), needles.end(),
                                   [&](const std::string& needle) {
                                     return haystack.find(needle) != std::string::npos;
                                   });
      if (!hit) continue;
    }
    kept.push_back(doc);
  }
  return kept;
}

CorpusSplit split_corpus(const std::vector<AnnotatedDocument>& docs,
                         const std::vector<double>& ratios, std::uint64_t seed) {
  if (ratios.size() != 3) throw Error("split_corpus: need train/dev/test ratios");
  double sum = 0.0;
  for (const double ratio : ratios) {
    if (ratio <= 0.0) throw Error("split_corpus: ratios must be positive");
    sum += ratio;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error("split_corpus: ratios must sum to 1");

  std::vector<std::string> ids;
  ids.reserve(docs.size());
  for (const AnnotatedDocument& doc : docs) ids.push_back(doc.id);
  Rng rng(seed);
  rng.shuffle(ids);

  const std::size_t n = ids.size();
  const std::size_t dev_count = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * ratios[1]));
  const std::size_t test_count = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * ratios[2]));
  const std::size_t train_count = n - dev_count - test_count;

  CorpusSplit split;
  split.ratios = ratios;
  split.seed = seed;
  split.train.assign(ids.begin(), ids.begin() + train_count);
  split.dev.assign(ids.begin() + train_count, ids.begin() + train_count + dev_count);
  split.test.assign(ids.begin() + train_count + dev_count, ids.end());
  return split;
}

std::vector<AnnotatedDocument> select_documents(
    const std::vector<AnnotatedDocument>& docs, const std::vector<std::string>& ids) {
  const std::set<std::string> wanted(ids.begin(), ids.end());
  std::vector<AnnotatedDocument> selected;
  for (const AnnotatedDocument& doc : docs) {
    if (wanted.count(doc.id) != 0) selected.push_back(doc);
  }
  return selected;
}

}  // namespace thyrex
