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

#ifndef THYREX_CORPUS_HPP_
#define THYREX_CORPUS_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "thyrex/schema.hpp"

namespace thyrex {

/// Knobs for the synthetic report generator. Reports mimic ultrasound
/// findings/impression structure; gold spans and relations are tracked
/// exactly through generation.
struct SynthConfig {
  std::uint64_t seed = 1;
  int doc_count = 100;
  int min_nodules = 1;
  int max_nodules = 3;

  /// Per-category probability that a characteristic slot is filled.
  /// CERVICAL_LYMPH_NODE gates the lymph-node sentence and
  /// TOTAL_NUMBER_OF_NODULES the impression count line.
  std::map<Category, double> presence;

  /// Probability that a characteristic surface is drawn from the
  /// out-of-lexicon variant pool instead of the lexicon pool.
  double noise_rate = 0.0;

  /// Template set: "post-tirads" reports document TI-RADS levels,
  /// "pre-tirads" reports use only free-text risk wording (an
  /// approximation of older reporting style), "mixed" draws per
  /// document. TI-RADS levels in the text are drawn independently of
  /// the other characteristics, so documented and computed levels can
  /// disagree; the consistency audit is meant to surface exactly that.
  std::string style = "post-tirads";

  /// Rates of the hard cases: a plural multi-nodule anchor sentence and
  /// a trailing anaphoric "The largest nodule ..." sentence.
  double multi_nodule_rate = 0.15;
  double anaphora_rate = 0.15;

  SynthConfig();  // fills default presence probabilities
};

/// Deterministic synthetic corpus. Every emitted document passes
/// validate_document with zero errors; every gold relation joins
/// mentions at most one sentence apart. Throws Error on invalid config.
std::vector<AnnotatedDocument> synth_generate(const SynthConfig& config);

/// Keeps documents whose text contains at least one keyword
/// (case-insensitive; an empty list matches everything) AND whose
/// meta["note_type"] equals `note_type`. Order preserved; idempotent.
std::vector<AnnotatedDocument> filter_reports(const std::vector<AnnotatedDocument>& docs,
                                              const std::vector<std::string>& keywords,
                                              const std::string& note_type);

struct CorpusSplit {
  std::vector<std::string> train;
  std::vector<std::string> dev;
  std::vector<std::string> test;
  std::vector<double> ratios;
  std::uint64_t seed = 0;
};

/// Shuffles document ids by seed, then partitions contiguously by the
/// three train/dev/test ratios. Dev and test sizes are floored; the
/// remainder goes to train. Ratios must be positive and sum to 1
/// within 1e-9.
CorpusSplit split_corpus(const std::vector<AnnotatedDocument>& docs,
                         const std::vector<double>& ratios, std::uint64_t seed);

/// Documents whose ids appear in `ids`, in corpus order.
std::vector<AnnotatedDocument> select_documents(
    const std::vector<AnnotatedDocument>& docs, const std::vector<std::string>& ids);

}  // namespace thyrex

#endif  // THYREX_CORPUS_HPP_
