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

// End-to-end gate suite. Each check prints exactly one PASS or FAIL
// line; the process exits nonzero if any check fails. Checks are
// property-based (round-trips, exhaustive oracles, determinism) plus
// quality gates on seeded synthetic corpora.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "thyrex/corpus.hpp"
#include "thyrex/eval.hpp"
#include "thyrex/formats.hpp"
#include "thyrex/linker.hpp"
#include "thyrex/preprocess.hpp"
#include "thyrex/rng.hpp"
#include "thyrex/tagger.hpp"
#include "thyrex/tirads.hpp"
#include "thyrex/utf8.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int g_failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  if (!ok) ++g_failures;
  std::cout << (ok ? "PASS" : "FAIL") << ": " << name;
  if (!detail.empty()) std::cout << " (" << detail << ")";
  std::cout << "\n" << std::flush;
}

std::string format_seconds(double s) {
  std::ostringstream out;
  out.precision(1);
  out << std::fixed << s << "s";
  return out.str();
}

std::string format_score(double s) {
  std::ostringstream out;
  out.precision(4);
  out << std::fixed << s;
  return out.str();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

bool same_documents(const thyrex::AnnotatedDocument& a,
                    const thyrex::AnnotatedDocument& b) {
  return a.id == b.id && a.text == b.text && a.mentions == b.mentions &&
         a.relations == b.relations && a.meta == b.meta;
}

// ---------------------------------------------------------------------------
// 1. BIO encode/decode round-trip over a large seeded corpus.

void check_bio_roundtrip() {
  const auto start = Clock::now();
  thyrex::SynthConfig config;
  config.seed = 8101;
  config.doc_count = 1000;
  config.noise_rate = 0.15;
  config.style = "mixed";
  config.multi_nodule_rate = 0.3;
  config.anaphora_rate = 0.3;
  const auto docs = thyrex::synth_generate(config);

  int bad_docs = 0;
  std::string first_bad;
  for (const thyrex::AnnotatedDocument& doc : docs) {
    const auto tokens = thyrex::tokenize(doc.text);
    const auto alignment = thyrex::align_mentions(doc, tokens);
    const auto encoding = thyrex::spans_to_bio(doc, tokens, alignment);
    const auto decoding = thyrex::bio_to_spans(doc.text, tokens, encoding.tags);

    // Token-aligned gold: each mention widened to the token boundaries
    // its span covers.
    std::vector<thyrex::EntityMention> expected;
    for (const thyrex::EntityMention& mention : doc.mentions) {
      if (mention.category == thyrex::Category::kOther) continue;
      const thyrex::TokenRange range = alignment.ranges.at(mention.id);
      thyrex::EntityMention widened = mention;
      widened.span = {tokens[range.first].span.start,
                      tokens[range.last].span.end};
      widened.text =
          thyrex::utf8::substr(doc.text, widened.span.start, widened.span.end);
      expected.push_back(std::move(widened));
    }
    std::sort(expected.begin(), expected.end(),
              [](const thyrex::EntityMention& a, const thyrex::EntityMention& b) {
                return a.span.start < b.span.start;
              });

    bool ok = decoding.repairs == 0 && encoding.dropped_mention_ids.empty() &&
              decoding.mentions.size() == expected.size();
    if (ok) {
      for (std::size_t i = 0; i < expected.size(); ++i) {
        if (decoding.mentions[i].category != expected[i].category ||
            !(decoding.mentions[i].span == expected[i].span) ||
            decoding.mentions[i].text != expected[i].text) {
          ok = false;
          break;
        }
      }
    }
    if (!ok) {
      ++bad_docs;
      if (first_bad.empty()) first_bad = doc.id;
    }
  }
  const double elapsed = seconds_since(start);
  const bool ok = bad_docs == 0 && elapsed < 10.0;
  std::string detail = std::to_string(docs.size()) + " docs, " +
                       std::to_string(bad_docs) + " mismatches, " +
                       format_seconds(elapsed);
  if (!first_bad.empty()) detail += ", first bad: " + first_bad;
  report(ok, "BIO round-trip reproduces token-aligned mentions", detail);
}

// ---------------------------------------------------------------------------
// 2. Decoder against exhaustive search on small random instances.

struct ExhaustiveBest {
  double score = 0.0;
  std::vector<thyrex::TagId> sequence;
  bool found = false;
};

// Depth-first over valid sequences in lexicographic tag order; strict
// improvement keeps the first (smallest) optimum, matching the decoder's
// declared tie-break.
void exhaust(const thyrex::TokenScoreMatrix& scores,
             const thyrex::TransitionConstraints& constraints,
             const thyrex::TransitionWeights& transitions, int position,
             double running, std::vector<thyrex::TagId>& current,
             ExhaustiveBest& best) {
  if (position == scores.token_count) {
    if (!best.found || running > best.score) {
      best.found = true;
      best.score = running;
      best.sequence = current;
    }
    return;
  }
  for (thyrex::TagId tag = 0; tag < scores.tag_count; ++tag) {
    if (position == 0) {
      if (!constraints.start_allowed[tag]) continue;
    } else if (!constraints.is_allowed(current[position - 1], tag)) {
      continue;
    }
    const double step =
        scores.at(position, tag) +
        (position == 0 ? transitions.start[tag]
                       : transitions.between(current[position - 1], tag));
    current[position] = tag;
    exhaust(scores, constraints, transitions, position + 1, running + step,
            current, best);
  }
}

double sequence_score(const thyrex::TokenScoreMatrix& scores,
                      const thyrex::TransitionWeights& transitions,
                      const std::vector<thyrex::TagId>& sequence) {
  double total = 0.0;
  for (std::size_t t = 0; t < sequence.size(); ++t) {
    total += scores.at(static_cast<int>(t), sequence[t]);
    total += t == 0 ? transitions.start[sequence[0]]
                    : transitions.between(sequence[t - 1], sequence[t]);
  }
  return total;
}

void check_decoder_optimality() {
  const auto start = Clock::now();
  const thyrex::TagSet tags({
      thyrex::Category::kComposition,
      thyrex::Category::kEchogenicity,
      thyrex::Category::kMargins,
      thyrex::Category::kShape,
      thyrex::Category::kEchogenicFoci,
  });
  const auto constraints = thyrex::TransitionConstraints::from(tags);
  thyrex::Rng rng(7402);

  int failures = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int length = static_cast<int>(rng.uniform_int(1, 8));
    thyrex::TokenScoreMatrix scores(length, tags.size());
    for (int t = 0; t < length; ++t)
      for (thyrex::TagId tag = 0; tag < tags.size(); ++tag)
        scores.at(t, tag) = static_cast<double>(rng.uniform_int(-8, 8));
    thyrex::TransitionWeights transitions(tags.size());
    for (thyrex::TagId tag = 0; tag < tags.size(); ++tag)
      transitions.start[tag] = static_cast<double>(rng.uniform_int(-4, 4));
    for (thyrex::TagId prev = 0; prev < tags.size(); ++prev)
      for (thyrex::TagId next = 0; next < tags.size(); ++next)
        transitions.between(prev, next) =
            static_cast<double>(rng.uniform_int(-4, 4));

    const auto decoded = thyrex::viterbi_decode(scores, constraints, transitions);
    ExhaustiveBest best;
    std::vector<thyrex::TagId> current(length, 0);
    exhaust(scores, constraints, transitions, 0, 0.0, current, best);

    const double decoded_score = sequence_score(scores, transitions, decoded);
    if (!best.found || decoded != best.sequence ||
        decoded_score != best.score) {
      ++failures;
    }
  }
  const double elapsed = seconds_since(start);
  const bool ok = failures == 0 && elapsed < 30.0;
  report(ok, "decoder matches exhaustive search with tie-breaks",
         "200 instances, " + std::to_string(failures) + " mismatches, " +
             format_seconds(elapsed));
}

// ---------------------------------------------------------------------------
// 3. Scorer fixtures to 1e-9 plus mode dominance on random pairs.

void check_scorer() {
  constexpr double kTol = 1e-9;
  bool ok = true;
  std::string detail;

  const auto mention = [](const std::string& id, thyrex::Category category,
                          std::size_t start, std::size_t end) {
    return thyrex::EntityMention{id, category, {start, end},
                                 std::string(end - start, 'x')};
  };
  const auto doc_with = [](const std::string& id,
                           std::vector<thyrex::EntityMention> mentions) {
    thyrex::AnnotatedDocument doc;
    doc.id = id;
    doc.text = std::string(200, 'x');
    doc.mentions = std::move(mentions);
    return doc;
  };

  // Fixture A: two exact hits out of three predictions.
  {
    const auto gold = doc_with("d1", {
        mention("G1", thyrex::Category::kComposition, 0, 5),
        mention("G2", thyrex::Category::kComposition, 10, 15),
    });
    const auto pred = doc_with("d1", {
        mention("P1", thyrex::Category::kComposition, 0, 5),
        mention("P2", thyrex::Category::kComposition, 10, 15),
        mention("P3", thyrex::Category::kComposition, 20, 25),
    });
    const thyrex::EvalReport r = thyrex::score_ner({gold}, {pred});
    if (std::fabs(r.overall.strict.precision() - 2.0 / 3.0) > kTol ||
        std::fabs(r.overall.strict.recall() - 1.0) > kTol ||
        std::fabs(r.overall.strict.f1() - 0.8) > kTol) {
      ok = false;
      detail = "exact-hit fixture off";
    }
  }

  // Fixture B: one overlapping span scores 0 strict, 1 lenient.
  {
    const auto gold =
        doc_with("d1", {mention("G1", thyrex::Category::kMargins, 2, 12)});
    const auto pred =
        doc_with("d1", {mention("P1", thyrex::Category::kMargins, 4, 15)});
    const thyrex::EvalReport r = thyrex::score_ner({gold}, {pred});
    if (std::fabs(r.overall.strict.f1() - 0.0) > kTol ||
        std::fabs(r.overall.lenient.precision() - 1.0) > kTol ||
        std::fabs(r.overall.lenient.recall() - 1.0) > kTol ||
        std::fabs(r.overall.lenient.f1() - 1.0) > kTol) {
      ok = false;
      detail = "overlap fixture off";
    }
  }

  // Zero denominators must stay finite zeros.
  {
    const thyrex::PRF empty;
    if (empty.precision() != 0.0 || empty.recall() != 0.0 || empty.f1() != 0.0) {
      ok = false;
      detail = "zero-denominator fixture off";
    }
  }

  // Dominance: lenient matches at least as much as strict, always.
  thyrex::Rng rng(5150);
  int dominance_failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<thyrex::EntityMention> gold;
    std::vector<thyrex::EntityMention> pred;
    const auto random_mention = [&](const std::string& prefix, int index) {
      const std::size_t start = static_cast<std::size_t>(rng.uniform_int(0, 60));
      const std::size_t length = static_cast<std::size_t>(rng.uniform_int(1, 8));
      const thyrex::Category category = thyrex::taggable_categories()[
          static_cast<std::size_t>(rng.uniform_int(
              0, thyrex::kTaggableCategoryCount - 1))];
      return thyrex::EntityMention{prefix + std::to_string(index), category,
                                   {start, start + length},
                                   std::string(length, 'x')};
    };
    const int gold_count = static_cast<int>(rng.uniform_int(0, 8));
    const int pred_count = static_cast<int>(rng.uniform_int(0, 8));
    for (int i = 0; i < gold_count; ++i) gold.push_back(random_mention("G", i));
    for (int i = 0; i < pred_count; ++i) pred.push_back(random_mention("P", i));
    const auto strict =
        thyrex::match_mentions(gold, pred, thyrex::MatchMode::kStrict);
    const auto lenient =
        thyrex::match_mentions(gold, pred, thyrex::MatchMode::kLenient);
    if (lenient.pairs.size() < strict.pairs.size()) ++dominance_failures;
  }
  if (dominance_failures > 0) {
    ok = false;
    detail = std::to_string(dominance_failures) + " dominance violations";
  }
  if (ok) detail = "fixtures to 1e-9, dominance over 1000 random pairs";
  report(ok, "span scorer fixtures and lenient-dominance property", detail);
}

// ---------------------------------------------------------------------------
// 4. Risk scoring against an independent re-parse of the point table.

struct OracleTable {
  std::map<std::string, std::map<std::string, int>> dims;
  std::map<int, std::string> levels;
};

// Deliberately separate mini parser: split on '=', track '[section]'
// headers, ignore '#' comments. Shares no code with the library parser.
OracleTable parse_oracle_table(const std::string& path) {
  OracleTable table;
  std::ifstream in(path);
  std::string line;
  std::string section;
  while (std::getline(in, line)) {
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string trimmed;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) trimmed.push_back(c);
    if (trimmed.empty()) continue;
    if (trimmed.front() == '[') {
      section = trimmed.substr(1, trimmed.size() - 2);
      continue;
    }
    const std::size_t eq = trimmed.find('=');
    const std::string key = trimmed.substr(0, eq);
    const std::string value = trimmed.substr(eq + 1);
    if (section == "meta") continue;
    if (section == "thresholds") {
      table.levels[std::stoi(key)] = value;
    } else {
      table.dims[section][key] = std::stoi(value);
    }
  }
  return table;
}

void check_tirads_exhaustive() {
  const auto start = Clock::now();
  const thyrex::PointTable table = thyrex::PointTable::load(THYREX_POINTS_TABLE);
  const OracleTable oracle = parse_oracle_table(THYREX_POINTS_TABLE);

  // Surface phrases that normalize onto each canonical value; empty
  // surface means the characteristic is omitted entirely.
  using Choice = std::pair<std::string, std::string>;  // canonical, surface
  const std::vector<Choice> compositions = {
      {"cystic", "cystic"},           {"spongiform", "spongiform"},
      {"mixed", "mixed"},             {"solid", "solid"},
      {"indeterminate", "zzqq-unrecognized"}, {"absent", ""},
  };
  const std::vector<Choice> echogenicities = {
      {"anechoic", "anechoic"},       {"hyperechoic", "hyperechoic"},
      {"isoechoic", "isoechoic"},     {"hypoechoic", "hypoechoic"},
      {"very_hypoechoic", "very hypoechoic"},
      {"indeterminate", "cannot determine"}, {"absent", ""},
  };
  const std::vector<Choice> shapes = {
      {"wider_than_tall", "oval"},
      {"taller_than_wide", "taller than wide"},
      {"absent", ""},
  };
  const std::vector<Choice> margins = {
      {"smooth", "smooth"},
      {"ill_defined", "ill defined"},
      {"lobulated_irregular", "irregular"},
      {"extrathyroidal_extension", "extrathyroidal extension"},
      {"indeterminate", "zzqq-unrecognized"},
      {"absent", ""},
  };
  const std::vector<Choice> foci_types = {
      {"comet_tail", "comet tail"},
      {"macrocalcification", "macrocalcifications"},
      {"peripheral_rim", "rim calcifications"},
      {"punctate", "punctate echogenic foci"},
  };

  const auto build_profile = [&](const Choice& comp, const Choice& echo,
                                 const Choice& shape, const Choice& margin,
                                 unsigned foci_mask) {
    thyrex::NoduleProfile profile;
    profile.anchor = {"A1", thyrex::Category::kThyroidNodule, {0, 6}, "nodule"};
    int next = 1;
    const auto add = [&](thyrex::Category category, const std::string& surface) {
      if (surface.empty()) return;
      profile.characteristics[category].push_back(
          {"C" + std::to_string(next++), category, {10, 10 + surface.size()},
           surface});
    };
    add(thyrex::Category::kComposition, comp.second);
    add(thyrex::Category::kEchogenicity, echo.second);
    add(thyrex::Category::kShape, shape.second);
    add(thyrex::Category::kMargins, margin.second);
    for (std::size_t f = 0; f < foci_types.size(); ++f)
      if (foci_mask & (1u << f))
        add(thyrex::Category::kEchogenicFoci, foci_types[f].second);
    return profile;
  };

  const auto oracle_level = [&](int total) {
    std::string level;
    for (const auto& [min_points, name] : oracle.levels) {
      if (min_points > total) break;
      level = name;
    }
    return level;
  };

  int combos = 0;
  int mismatches = 0;
  int monotonicity_failures = 0;
  // Totals per foci mask for the current scalar combination, for the
  // added-focus monotonicity check.
  std::vector<int> totals_by_mask(16, 0);

  for (const Choice& comp : compositions) {
    for (const Choice& echo : echogenicities) {
      for (const Choice& shape : shapes) {
        for (const Choice& margin : margins) {
          for (unsigned mask = 0; mask < 16; ++mask) {
            ++combos;
            const auto profile = build_profile(comp, echo, shape, margin, mask);
            const thyrex::TiradsResult result =
                thyrex::score_profile(profile, table);

            int expected = oracle.dims.at("composition").at(comp.first) +
                           oracle.dims.at("echogenicity").at(echo.first) +
                           oracle.dims.at("shape").at(shape.first) +
                           oracle.dims.at("margin").at(margin.first);
            for (std::size_t f = 0; f < foci_types.size(); ++f)
              if (mask & (1u << f))
                expected += oracle.dims.at("foci").at(foci_types[f].first);

            if (result.total_points != expected ||
                result.level != oracle_level(expected)) {
              ++mismatches;
            }
            totals_by_mask[mask] = result.total_points;
          }
          for (unsigned mask = 0; mask < 16; ++mask) {
            for (std::size_t f = 0; f < foci_types.size(); ++f) {
              const unsigned with = mask | (1u << f);
              if (with != mask && totals_by_mask[with] < totals_by_mask[mask])
                ++monotonicity_failures;
            }
          }
        }
      }
    }
  }

  const double elapsed = seconds_since(start);
  const bool ok = mismatches == 0 && monotonicity_failures == 0 && elapsed < 5.0;
  report(ok, "risk scoring matches an independent table oracle",
         std::to_string(combos) + " combos, " + std::to_string(mismatches) +
             " mismatches, " + std::to_string(monotonicity_failures) +
             " monotonicity failures, " + format_seconds(elapsed));
}

// ---------------------------------------------------------------------------
// 5 + 6. Trainable pipeline gates on a seeded noisy corpus.

struct PipelineCorpus {
  std::vector<thyrex::AnnotatedDocument> train;
  std::vector<thyrex::AnnotatedDocument> test;
  std::vector<thyrex::AnnotatedDocument> all;
};

PipelineCorpus make_pipeline_corpus() {
  thyrex::SynthConfig config;
  config.seed = 2026;
  config.doc_count = 500;
  config.noise_rate = 0.1;
  const auto docs = thyrex::synth_generate(config);
  const thyrex::CorpusSplit split =
      thyrex::split_corpus(docs, {0.8, 0.1, 0.1}, 1);
  PipelineCorpus corpus;
  corpus.train = thyrex::select_documents(docs, split.train);
  corpus.test = thyrex::select_documents(docs, split.test);
  corpus.all = docs;
  return corpus;
}

void check_pipeline(const PipelineCorpus& corpus) {
  const auto start = Clock::now();
  const thyrex::TaggerModel model = thyrex::train_tagger(corpus.train, 10, 7);

  std::vector<thyrex::AnnotatedDocument> predictions;
  for (const thyrex::AnnotatedDocument& doc : corpus.test) {
    thyrex::AnnotatedDocument pred;
    pred.id = doc.id;
    pred.text = doc.text;
    pred.mentions = thyrex::predict(model, doc.text);
    predictions.push_back(std::move(pred));
  }
  const thyrex::EvalReport report_data =
      thyrex::score_ner(corpus.test, predictions);
  const double strict = report_data.overall.strict.f1();
  const double lenient = report_data.overall.lenient.f1();
  const double elapsed = seconds_since(start);
  const bool ok = corpus.train.size() == 400 && corpus.test.size() == 50 &&
                  strict >= 0.80 && lenient >= 0.90 && elapsed < 300.0;
  report(ok, "trained tagger clears the micro-F1 gates",
         "strict " + format_score(strict) + " >= 0.80, lenient " +
             format_score(lenient) + " >= 0.90, " + format_seconds(elapsed));
}

void check_linker(const PipelineCorpus& corpus) {
  const auto start = Clock::now();
  const thyrex::LinkerModel model = thyrex::train_linker(corpus.train, 10, 7);

  std::vector<thyrex::AnnotatedDocument> predictions;
  for (const thyrex::AnnotatedDocument& doc : corpus.test) {
    thyrex::AnnotatedDocument pred;
    pred.id = doc.id;
    pred.text = doc.text;
    pred.mentions = doc.mentions;  // gold mentions, predicted relations
    pred.relations = thyrex::link(doc, model);
    predictions.push_back(std::move(pred));
  }
  const thyrex::PRF relation_scores = thyrex::score_relations(
      corpus.test, predictions, thyrex::MatchMode::kStrict);
  const double f1 = relation_scores.f1();

  // Oracle equivalence: on clean single-anchor reports the trained
  // linker must assign every characteristic to its nearest anchor,
  // which is the only candidate anchor in these documents.
  thyrex::SynthConfig solo;
  solo.seed = 1777;
  solo.doc_count = 120;
  solo.noise_rate = 0.0;
  solo.min_nodules = 1;
  solo.max_nodules = 1;
  solo.multi_nodule_rate = 0.0;
  solo.anaphora_rate = 0.0;
  solo.presence[thyrex::Category::kCervicalLymphNode] = 0.0;
  const auto solo_docs = thyrex::synth_generate(solo);
  const std::vector<thyrex::AnnotatedDocument> solo_train(
      solo_docs.begin(), solo_docs.begin() + 80);
  const std::vector<thyrex::AnnotatedDocument> solo_check(
      solo_docs.begin() + 80, solo_docs.end());
  const thyrex::LinkerModel solo_model = thyrex::train_linker(solo_train, 10, 7);

  int oracle_mismatches = 0;
  const thyrex::LinkerConfig config;
  for (const thyrex::AnnotatedDocument& doc : solo_check) {
    const auto tokens = thyrex::tokenize(doc.text);
    const auto sentences = thyrex::segment_sentences(tokens, doc.text);
    const auto candidates =
        thyrex::generate_candidates(doc, tokens, sentences, config);
    std::set<std::pair<std::string, std::string>> oracle;
    for (const thyrex::CandidatePair& pair : candidates)
      if (pair.nearest) oracle.insert({pair.head.id, pair.tail.id});
    std::set<std::pair<std::string, std::string>> linked;
    for (const thyrex::Relation& relation : thyrex::link(doc, solo_model))
      linked.insert({relation.head_id, relation.tail_id});
    if (linked != oracle) ++oracle_mismatches;
  }

  const double elapsed = seconds_since(start);
  const bool ok = f1 >= 0.85 && oracle_mismatches == 0;
  report(ok, "trained linker clears the relation gate and oracle equivalence",
         "relation F1 " + format_score(f1) + " >= 0.85, " +
             std::to_string(oracle_mismatches) + " oracle mismatches over " +
             std::to_string(solo_check.size()) + " docs, " +
             format_seconds(elapsed));
}

// ---------------------------------------------------------------------------
// 7. Byte-level determinism of the command-line pipeline.

int run_cli(const std::string& args) {
  const std::string command =
      std::string(THYREX_CLI_PATH) + " " + args + " > /dev/null 2> /dev/null";
  const int raw = std::system(command.c_str());
  return raw == -1 ? -1 : WEXITSTATUS(raw);
}

void check_determinism() {
  const auto start = Clock::now();
  const fs::path dir = fs::temp_directory_path() / "thyrex_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto at = [&](const std::string& name) {
    return (dir / name).string();
  };

  bool ok = true;
  std::string detail;
  const auto fail = [&](const std::string& why) {
    if (ok) detail = why;
    ok = false;
  };

  for (const int seed : {101, 202}) {
    const std::string tag = std::to_string(seed);
    const std::string synth_args =
        "synth --seed " + tag + " --count 40 --noise 0.1 --out ";
    if (run_cli(synth_args + at("c1_" + tag)) != 0 ||
        run_cli(synth_args + at("c2_" + tag)) != 0)
      fail("synth exit status, seed " + tag);
    if (slurp(at("c1_" + tag)) != slurp(at("c2_" + tag)))
      fail("corpus bytes differ, seed " + tag);

    const std::string train_args = "train --in " + at("c1_" + tag) +
                                   " --epochs 4 --seed 3 --relations"
                                   " --model-out ";
    if (run_cli(train_args + at("m1_" + tag) + " --linker-out " +
                at("l1_" + tag)) != 0 ||
        run_cli(train_args + at("m2_" + tag) + " --linker-out " +
                at("l2_" + tag)) != 0)
      fail("train exit status, seed " + tag);
    if (slurp(at("m1_" + tag)) != slurp(at("m2_" + tag)) ||
        slurp(at("l1_" + tag)) != slurp(at("l2_" + tag)))
      fail("model bytes differ, seed " + tag);

    const std::string extract_args =
        "extract --in " + at("c1_" + tag) + " --model " + at("m1_" + tag) +
        " --linker-model " + at("l1_" + tag) + " --tirads-table " +
        std::string(THYREX_POINTS_TABLE) + " --out ";
    if (run_cli(extract_args + at("p1_" + tag)) != 0 ||
        run_cli(extract_args + at("p2_" + tag)) != 0)
      fail("extract exit status, seed " + tag);
    if (slurp(at("p1_" + tag)) != slurp(at("p2_" + tag)))
      fail("extraction bytes differ, seed " + tag);

    const std::string eval_args = "eval --gold " + at("c1_" + tag) +
                                  " --pred " + at("p1_" + tag) + " --report ";
    if (run_cli(eval_args + at("r1_" + tag)) != 0 ||
        run_cli(eval_args + at("r2_" + tag)) != 0)
      fail("eval exit status, seed " + tag);
    if (slurp(at("r1_" + tag)) != slurp(at("r2_" + tag)) ||
        slurp(at("r1_" + tag) + ".json") != slurp(at("r2_" + tag) + ".json"))
      fail("report bytes differ, seed " + tag);
  }

  // Worker count must not leak into the output bytes.
  const std::string jobs_args =
      "extract --in " + at("c1_101") + " --model " + at("m1_101") +
      " --linker-model " + at("l1_101") + " --tirads-table " +
      std::string(THYREX_POINTS_TABLE) + " --out ";
  if (run_cli(jobs_args + at("j1") + " --jobs 1") != 0 ||
      run_cli(jobs_args + at("j4") + " --jobs 4") != 0)
    fail("jobs extract exit status");
  if (slurp(at("j1")) != slurp(at("j4"))) fail("--jobs changed output bytes");

  fs::remove_all(dir);
  const double elapsed = seconds_since(start);
  if (ok) detail = "2 seeds, rerun and --jobs invariant";
  report(ok, "command-line pipeline is byte-deterministic",
         detail + ", " + format_seconds(elapsed));
}

// ---------------------------------------------------------------------------
// 8. Serialization round-trips on a 500-document corpus.

void check_format_roundtrips() {
  const auto start = Clock::now();
  const fs::path dir = fs::temp_directory_path() / "thyrex_acceptance_fmt";
  fs::remove_all(dir);
  fs::create_directories(dir);

  thyrex::SynthConfig config;
  config.seed = 2026;
  config.doc_count = 500;
  config.noise_rate = 0.1;
  config.style = "mixed";
  const auto docs = thyrex::synth_generate(config);

  bool ok = true;
  std::string detail;
  const auto fail = [&](const std::string& why) {
    if (ok) detail = why;
    ok = false;
  };

  // JSON lines: lossless.
  {
    const std::string path = (dir / "corpus.jsonl").string();
    thyrex::write_json(path, docs);
    const thyrex::ReadResult result = thyrex::read_json(path);
    if (result.docs.size() != docs.size() || !result.invalid.empty())
      fail("json read shape");
    for (std::size_t i = 0; ok && i < docs.size(); ++i)
      if (!same_documents(docs[i], result.docs[i]))
        fail("json mismatch at " + docs[i].id);
  }

  // Standoff: lossless.
  {
    const fs::path standoff = dir / "standoff";
    fs::create_directories(standoff);
    thyrex::write_standoff(standoff.string(), docs);
    const thyrex::ReadResult result = thyrex::read_standoff(standoff.string());
    if (result.docs.size() != docs.size() || !result.invalid.empty())
      fail("standoff read shape");
    for (std::size_t i = 0; ok && i < docs.size(); ++i)
      if (!same_documents(docs[i], result.docs[i]))
        fail("standoff mismatch at " + docs[i].id);
  }

  // CoNLL: lossless up to token alignment.
  {
    const std::string path = (dir / "corpus.conll").string();
    thyrex::write_conll(path, docs);
    const thyrex::ReadResult result = thyrex::read_conll(path);
    if (result.docs.size() != docs.size()) fail("conll read shape");
    for (std::size_t i = 0; ok && i < docs.size(); ++i) {
      const auto tokens = thyrex::tokenize(docs[i].text);
      const auto alignment = thyrex::align_mentions(docs[i], tokens);
      const auto encoding = thyrex::spans_to_bio(docs[i], tokens, alignment);
      const auto expected =
          thyrex::bio_to_spans(docs[i].text, tokens, encoding.tags);
      const auto& restored = result.docs[i].mentions;
      if (restored.size() != expected.mentions.size()) {
        fail("conll mention count at " + docs[i].id);
        break;
      }
      for (std::size_t m = 0; m < restored.size(); ++m) {
        if (restored[m].category != expected.mentions[m].category ||
            !(restored[m].span == expected.mentions[m].span) ||
            restored[m].text != expected.mentions[m].text) {
          fail("conll mention mismatch at " + docs[i].id);
          break;
        }
      }
    }
  }

  // Invalid BIO on import is repaired, with the repairs surfaced.
  {
    const std::string path = (dir / "broken.conll").string();
    std::ofstream out(path);
    out << "#doc fix-me\n"
        << "nodule\t0\t6\tI-THYROID_NODULE\n"
        << "is\t7\t9\tO\n"
        << "solid\t10\t15\tB-COMPOSITION\n"
        << "smooth\t16\t22\tI-MARGINS\n"
        << "\n";
    out.close();
    const thyrex::ReadResult result = thyrex::read_conll(path);
    if (result.docs.size() != 1 || result.warnings.size() != 1 ||
        result.warnings[0].find("repaired") == std::string::npos ||
        result.docs[0].mentions.size() != 3)
      fail("conll repair accounting");
  }

  fs::remove_all(dir);
  const double elapsed = seconds_since(start);
  if (ok) detail = std::to_string(docs.size()) + " docs, all formats";
  report(ok, "annotation formats round-trip the corpus",
         detail + ", " + format_seconds(elapsed));
}

}  // namespace

int main() {
  check_bio_roundtrip();
  check_decoder_optimality();
  check_scorer();
  check_tirads_exhaustive();
  const PipelineCorpus corpus = make_pipeline_corpus();
  check_pipeline(corpus);
  check_linker(corpus);
  check_determinism();
  check_format_roundtrips();

  if (g_failures > 0) {
    std::cout << g_failures << " check(s) failed\n";
    return 1;
  }
  return 0;
}
