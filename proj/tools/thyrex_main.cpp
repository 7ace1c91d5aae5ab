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

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "thyrex/corpus.hpp"
#include "thyrex/eval.hpp"
#include "thyrex/formats.hpp"
#include "thyrex/lexicon.hpp"
#include "thyrex/linker.hpp"
#include "thyrex/preprocess.hpp"
#include "thyrex/tagger.hpp"
#include "thyrex/tirads.hpp"

namespace {

using thyrex::AnnotatedDocument;
using OrderedJson = nlohmann::ordered_json;

// Exit statuses: 0 success, 1 usage/config, 2 data/validation, 3 internal.
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string format_score(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.4f", value);
  return buffer;
}

// Reads a JSON-lines corpus and enforces validation strictly: any
// document with validation errors aborts the command with status 2.
std::vector<AnnotatedDocument> read_corpus_strict(const std::string& path) {
  thyrex::ReadResult result = thyrex::read_json(path);
  if (!result.invalid.empty()) {
    for (const auto& [doc_id, report] : result.invalid) {
      for (const thyrex::Violation& violation : report.errors)
        std::cerr << "invalid document " << doc_id << ": "
                  << violation.to_string() << "\n";
    }
    throw thyrex::Error("corpus " + path + " has " +
                        std::to_string(result.invalid.size()) +
                        " invalid document(s)");
  }
  return std::move(result.docs);
}

struct SynthFlags {
  std::uint64_t seed = 1;
  int count = 100;
  std::string out;
  double noise = 0.0;
  std::string style = "post-tirads";
  int min_nodules = 1;
  int max_nodules = 3;
  double multi_rate = 0.15;
  double anaphora_rate = 0.15;
};

int run_synth(const SynthFlags& flags) {
  thyrex::SynthConfig config;
  config.seed = flags.seed;
  config.doc_count = flags.count;
  config.noise_rate = flags.noise;
  config.style = flags.style;
  config.min_nodules = flags.min_nodules;
  config.max_nodules = flags.max_nodules;
  config.multi_nodule_rate = flags.multi_rate;
  config.anaphora_rate = flags.anaphora_rate;
  if (config.max_nodules < config.min_nodules)
    throw UsageError("--max-nodules must be >= --min-nodules");

  const std::vector<AnnotatedDocument> docs = thyrex::synth_generate(config);
  thyrex::write_json(flags.out, docs);
  std::size_t mention_count = 0;
  for (const AnnotatedDocument& doc : docs) mention_count += doc.mentions.size();
  std::cout << "documents " << docs.size() << " mentions " << mention_count
            << "\n";
  return 0;
}

struct TrainFlags {
  std::string in;
  std::string model_out;
  int epochs = 5;
  std::uint64_t seed = 1;
  std::vector<double> split;
  bool relations = false;
  std::string linker_out;
};

int run_train(const TrainFlags& flags) {
  if (flags.relations && flags.linker_out.empty())
    throw UsageError("--relations requires --linker-out");
  if (!flags.relations && !flags.linker_out.empty())
    throw UsageError("--linker-out requires --relations");

  std::vector<AnnotatedDocument> docs = read_corpus_strict(flags.in);
  if (!flags.split.empty()) {
    if (flags.split.size() != 3)
      throw UsageError("--split needs exactly three ratios, e.g. 0.8,0.1,0.1");
    const thyrex::CorpusSplit split =
        thyrex::split_corpus(docs, flags.split, flags.seed);
    docs = thyrex::select_documents(docs, split.train);
    std::cerr << "training on " << docs.size() << " of the split corpus\n";
  }

  thyrex::TaggerTrainStats stats;
  const thyrex::TaggerModel model =
      thyrex::train_tagger(docs, flags.epochs, flags.seed, &stats);
  for (const std::string& warning : stats.warnings)
    std::cerr << "warning: " << warning << "\n";
  model.save(flags.model_out);
  if (stats.epoch_accuracy.empty()) {
    std::cout << "tagger self-accuracy n/a (0 epochs)\n";
  } else {
    std::cout << "tagger self-accuracy "
              << format_score(stats.epoch_accuracy.back()) << "\n";
  }

  if (flags.relations) {
    thyrex::LinkerTrainStats linker_stats;
    const thyrex::LinkerModel linker = thyrex::train_linker(
        docs, flags.epochs, flags.seed, thyrex::LinkerConfig(), &linker_stats);
    linker.save(flags.linker_out);
    if (linker_stats.unreachable_gold > 0)
      std::cerr << "warning: " << linker_stats.unreachable_gold
                << " gold relation(s) outside candidate scope\n";
    if (linker_stats.epoch_accuracy.empty()) {
      std::cout << "linker self-accuracy n/a (0 epochs)\n";
    } else {
      std::cout << "linker self-accuracy "
                << format_score(linker_stats.epoch_accuracy.back()) << "\n";
    }
  }
  return 0;
}

struct ExtractFlags {
  std::string in;
  std::string out;
  std::string model;
  std::string linker_model;
  std::string tirads_table;
  bool lexicon_only = false;
  int jobs = 1;
};

OrderedJson mention_to_json(const thyrex::EntityMention& mention) {
  OrderedJson value;
  value["id"] = mention.id;
  value["category"] = thyrex::render_category(mention.category);
  value["start"] = mention.span.start;
  value["end"] = mention.span.end;
  value["text"] = mention.text;
  return value;
}

OrderedJson tirads_to_json(const thyrex::TiradsResult& result) {
  OrderedJson value;
  value["total_points"] = result.total_points;
  value["level"] = result.level;
  OrderedJson features;
  features["composition"] = result.features.composition;
  features["echogenicity"] = result.features.echogenicity;
  features["shape"] = result.features.shape;
  features["margin"] = result.features.margin;
  features["foci"] = OrderedJson::array();
  for (const std::string& focus : result.features.foci)
    features["foci"].push_back(focus);
  value["features"] = std::move(features);
  value["breakdown"] = OrderedJson::object();
  for (const auto& [dimension, points] : result.breakdown)
    value["breakdown"][dimension] = points;
  value["missing"] = result.missing;
  value["conflicts"] = result.conflicts;
  value["warnings"] = result.warnings;
  return value;
}

int run_extract(const ExtractFlags& flags) {
  if (!flags.lexicon_only && flags.model.empty())
    throw UsageError("extract needs --model or --lexicon-only");

  const std::vector<AnnotatedDocument> docs = read_corpus_strict(flags.in);

  thyrex::Lexicon lexicon = thyrex::Lexicon::defaults();
  if (const char* extra = std::getenv("NODULE_EXTRACT_LEXICON");
      extra != nullptr && *extra != '\0') {
    lexicon.load_file(extra);
    std::cerr << "lexicon extended from " << extra << "\n";
  }

  thyrex::TaggerModel tagger;
  if (!flags.lexicon_only) tagger = thyrex::TaggerModel::load(flags.model);
  thyrex::LinkerModel linker;
  const bool have_linker = !flags.linker_model.empty();
  if (have_linker) linker = thyrex::LinkerModel::load(flags.linker_model);
  thyrex::PointTable table;
  const bool have_table = !flags.tirads_table.empty();
  if (have_table) {
    table = thyrex::PointTable::load(flags.tirads_table);
  } else {
    std::cerr << "TI-RADS scoring skipped: no --tirads-table given\n";
  }

  std::vector<std::string> lines(docs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string failure_message;
  std::mutex failure_mutex;

  const auto worker = [&]() {
    while (true) {
      const std::size_t index = next.fetch_add(1);
      if (index >= docs.size() || failed.load()) return;
      try {
        const AnnotatedDocument& doc = docs[index];
        AnnotatedDocument pred;
        pred.id = doc.id;
        pred.text = doc.text;
        pred.meta = doc.meta;
        if (flags.lexicon_only) {
          const std::vector<thyrex::Token> tokens = thyrex::tokenize(doc.text);
          pred.mentions = thyrex::lexicon_tag(doc.text, tokens, lexicon);
        } else {
          pred.mentions = thyrex::predict(tagger, doc.text);
        }
        if (have_linker) pred.relations = thyrex::link(pred, linker);
        const thyrex::ProfileAssembly assembly =
            thyrex::assemble_profiles(pred.mentions, pred.relations);

        std::vector<thyrex::TiradsResult> results;
        std::vector<thyrex::Discrepancy> audit;
        if (have_table) {
          results.reserve(assembly.profiles.size());
          for (const thyrex::NoduleProfile& profile : assembly.profiles)
            results.push_back(thyrex::score_profile(profile, table));
          audit = thyrex::audit_consistency(pred, assembly.profiles, results);
        }

        OrderedJson value;
        value["id"] = pred.id;
        value["text"] = pred.text;
        OrderedJson meta = OrderedJson::object();
        for (const auto& [key, meta_value] : pred.meta) meta[key] = meta_value;
        value["meta"] = std::move(meta);
        value["mentions"] = OrderedJson::array();
        for (const thyrex::EntityMention& mention : pred.mentions)
          value["mentions"].push_back(mention_to_json(mention));
        value["relations"] = OrderedJson::array();
        for (const thyrex::Relation& relation : pred.relations) {
          OrderedJson relation_json;
          relation_json["head"] = relation.head_id;
          relation_json["tail"] = relation.tail_id;
          relation_json["type"] = relation.type;
          value["relations"].push_back(std::move(relation_json));
        }
        value["profiles"] = OrderedJson::array();
        for (std::size_t p = 0; p < assembly.profiles.size(); ++p) {
          const thyrex::NoduleProfile& profile = assembly.profiles[p];
          OrderedJson profile_json;
          profile_json["anchor"] = profile.anchor.id;
          OrderedJson characteristics = OrderedJson::object();
          for (const auto& [category, mentions] : profile.characteristics) {
            OrderedJson ids = OrderedJson::array();
            for (const thyrex::EntityMention& mention : mentions)
              ids.push_back(mention.id);
            characteristics[thyrex::render_category(category)] = std::move(ids);
          }
          profile_json["characteristics"] = std::move(characteristics);
          if (have_table) profile_json["tirads"] = tirads_to_json(results[p]);
          value["profiles"].push_back(std::move(profile_json));
        }
        value["orphans"] = OrderedJson::array();
        for (const thyrex::EntityMention& orphan : assembly.orphans)
          value["orphans"].push_back(orphan.id);
        if (have_table) {
          value["audit"] = OrderedJson::array();
          for (const thyrex::Discrepancy& discrepancy : audit) {
            OrderedJson discrepancy_json;
            discrepancy_json["anchor"] = discrepancy.anchor_id;
            discrepancy_json["documented_text"] = discrepancy.documented_text;
            discrepancy_json["documented_level"] = discrepancy.documented_level;
            discrepancy_json["computed_level"] = discrepancy.computed_level;
            discrepancy_json["parse_failure"] = discrepancy.parse_failure;
            discrepancy_json["missing"] = discrepancy.missing;
            value["audit"].push_back(std::move(discrepancy_json));
          }
        }
        lines[index] = value.dump();
      } catch (const std::exception& e) {
        const std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failed.exchange(true)) failure_message = e.what();
        return;
      }
    }
  };

  if (flags.jobs <= 1 || docs.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    const std::size_t thread_count =
        std::min(static_cast<std::size_t>(flags.jobs), docs.size());
    threads.reserve(thread_count);
    for (std::size_t t = 0; t < thread_count; ++t) threads.emplace_back(worker);
    for (std::thread& thread : threads) thread.join();
  }
  if (failed.load()) throw thyrex::Error("extract: " + failure_message);

  std::ofstream out(flags.out, std::ios::binary | std::ios::trunc);
  if (!out) throw thyrex::Error("extract: cannot write " + flags.out);
  for (const std::string& line : lines) out << line << '\n';
  if (!out) throw thyrex::Error("extract: write failed for " + flags.out);
  std::cerr << "extracted " << docs.size() << " document(s)\n";
  return 0;
}

struct EvalFlags {
  std::string gold;
  std::string pred;
  std::string report;
  bool relations = false;
  std::string endpoint_mode = "strict";
  bool allow_missing = false;
  int jobs = 1;  // accepted for interface parity; scoring is order-independent
};

int run_eval(const EvalFlags& flags) {
  const std::vector<AnnotatedDocument> gold = read_corpus_strict(flags.gold);
  const std::vector<AnnotatedDocument> pred = read_corpus_strict(flags.pred);

  const thyrex::EvalReport report =
      thyrex::score_ner(gold, pred, /*error_on_missing=*/!flags.allow_missing);
  std::string table = thyrex::render_report(report);
  std::string json_text = thyrex::report_to_json(report);

  if (flags.relations) {
    const thyrex::MatchMode mode = flags.endpoint_mode == "lenient"
                                       ? thyrex::MatchMode::kLenient
                                       : thyrex::MatchMode::kStrict;
    const thyrex::PRF prf = thyrex::score_relations(gold, pred, mode);
    table += "\nRelations (" + flags.endpoint_mode + " endpoints)  P " +
             format_score(prf.precision()) + "  R " + format_score(prf.recall()) +
             "  F1 " + format_score(prf.f1()) + "\n";
    OrderedJson twin = OrderedJson::parse(json_text);
    OrderedJson relations_json;
    relations_json["endpoint_mode"] = flags.endpoint_mode;
    relations_json["tp"] = prf.tp;
    relations_json["fp"] = prf.fp;
    relations_json["fn"] = prf.fn;
    relations_json["precision"] = prf.precision();
    relations_json["recall"] = prf.recall();
    relations_json["f1"] = prf.f1();
    twin["relations"] = std::move(relations_json);
    json_text = twin.dump(2);
  }

  std::cout << table;
  if (!flags.report.empty()) {
    std::ofstream out(flags.report, std::ios::binary | std::ios::trunc);
    if (!out) throw thyrex::Error("eval: cannot write " + flags.report);
    out << table;
    std::ofstream json_out(flags.report + ".json",
                           std::ios::binary | std::ios::trunc);
    if (!json_out) throw thyrex::Error("eval: cannot write " + flags.report + ".json");
    json_out << json_text << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thyroid ultrasound report information extraction"};
  app.require_subcommand(1);

  SynthFlags synth_flags;
  CLI::App* synth = app.add_subcommand(
      "synth", "Generate a synthetic annotated report corpus (JSON-lines)");
  synth->add_option("--seed", synth_flags.seed, "Generator seed")
      ->capture_default_str();
  synth->add_option("--count", synth_flags.count, "Number of documents")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth->add_option("--out", synth_flags.out, "Output JSON-lines path")
      ->required();
  synth->add_option("--noise", synth_flags.noise,
                    "Rate of out-of-lexicon surface variants")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  synth
      ->add_option("--style", synth_flags.style,
                   "Report era style: post-tirads, pre-tirads, or mixed")
      ->check(CLI::IsMember({"post-tirads", "pre-tirads", "mixed"}))
      ->capture_default_str();
  synth->add_option("--min-nodules", synth_flags.min_nodules, "Minimum nodules")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth->add_option("--max-nodules", synth_flags.max_nodules, "Maximum nodules")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth
      ->add_option("--multi-rate", synth_flags.multi_rate,
                   "Rate of plural multi-nodule sentences")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  synth
      ->add_option("--anaphora-rate", synth_flags.anaphora_rate,
                   "Rate of anaphoric follow-up anchors")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  TrainFlags train_flags;
  CLI::App* train = app.add_subcommand(
      "train", "Train the sequence tagger (and optionally the relation linker)");
  train->add_option("--in", train_flags.in, "Training corpus (JSON-lines)")
      ->required();
  train->add_option("--model-out", train_flags.model_out, "Tagger model path")
      ->required();
  train->add_option("--epochs", train_flags.epochs, "Training epochs")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  train->add_option("--seed", train_flags.seed, "Shuffle seed")
      ->capture_default_str();
  train
      ->add_option("--split", train_flags.split,
                   "Train on the train part of a train,dev,test split")
      ->delimiter(',');
  train->add_flag("--relations", train_flags.relations,
                  "Also train the relation linker");
  train->add_option("--linker-out", train_flags.linker_out,
                    "Linker model path (with --relations)");

  ExtractFlags extract_flags;
  CLI::App* extract = app.add_subcommand(
      "extract", "Run the extraction pipeline over a corpus");
  extract->add_option("--in", extract_flags.in, "Input corpus (JSON-lines)")
      ->required();
  extract->add_option("--out", extract_flags.out, "Output JSON-lines path")
      ->required();
  extract->add_option("--model", extract_flags.model, "Tagger model path");
  extract->add_option("--linker-model", extract_flags.linker_model,
                      "Relation linker model path");
  extract->add_option("--tirads-table", extract_flags.tirads_table,
                      "Risk point table config; omit to skip scoring");
  extract->add_flag("--lexicon-only", extract_flags.lexicon_only,
                    "Use the lexicon baseline tagger instead of a model");
  extract->add_option("--jobs", extract_flags.jobs, "Worker threads")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();

  EvalFlags eval_flags;
  CLI::App* eval = app.add_subcommand(
      "eval", "Score predictions against gold annotations");
  eval->add_option("--gold", eval_flags.gold, "Gold corpus (JSON-lines)")
      ->required();
  eval->add_option("--pred", eval_flags.pred, "Predicted corpus (JSON-lines)")
      ->required();
  eval->add_option("--report", eval_flags.report,
                   "Also write the table here and a JSON twin alongside");
  eval->add_flag("--relations", eval_flags.relations,
                 "Also score ATTRIBUTE_OF relations");
  eval
      ->add_option("--endpoint-mode", eval_flags.endpoint_mode,
                   "Relation endpoint matching: strict or lenient")
      ->check(CLI::IsMember({"strict", "lenient"}))
      ->capture_default_str();
  eval->add_flag("--allow-missing", eval_flags.allow_missing,
                 "Score documents missing on one side as empty");
  eval->add_option("--jobs", eval_flags.jobs, "Worker threads")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (synth->parsed()) return run_synth(synth_flags);
    if (train->parsed()) return run_train(train_flags);
    if (extract->parsed()) return run_extract(extract_flags);
    if (eval->parsed()) return run_eval(eval_flags);
    std::cerr << "error: no subcommand\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const thyrex::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
