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

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "thyrex/corpus.hpp"
#include "thyrex/eval.hpp"
#include "thyrex/preprocess.hpp"
#include "thyrex/rng.hpp"
#include "thyrex/tagger.hpp"

namespace {

std::vector<thyrex::AnnotatedDocument> benchmark_corpus(int count) {
  thyrex::SynthConfig config;
  config.seed = 42;
  config.doc_count = count;
  return thyrex::synth_generate(config);
}

void BM_Tokenize(benchmark::State& state) {
  const std::vector<thyrex::AnnotatedDocument> docs = benchmark_corpus(50);
  std::size_t tokens = 0;
  for (auto _ : state) {
    for (const thyrex::AnnotatedDocument& doc : docs) {
      const std::vector<thyrex::Token> out = thyrex::tokenize(doc.text);
      tokens += out.size();
      benchmark::DoNotOptimize(out.data());
    }
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(tokens));
}
BENCHMARK(BM_Tokenize);

void BM_ViterbiDecode(benchmark::State& state) {
  const thyrex::TagSet tags = thyrex::TagSet::full();
  const thyrex::TransitionConstraints constraints =
      thyrex::TransitionConstraints::from(tags);
  const thyrex::TransitionWeights transitions(tags.size());
  const int token_count = static_cast<int>(state.range(0));
  thyrex::TokenScoreMatrix scores(token_count, tags.size());
  thyrex::Rng rng(7);
  for (int t = 0; t < token_count; ++t) {
    for (int j = 0; j < tags.size(); ++j)
      scores.at(t, j) = rng.uniform() * 10.0 - 5.0;
  }
  for (auto _ : state) {
    const std::vector<thyrex::TagId> path =
        thyrex::viterbi_decode(scores, constraints, transitions);
    benchmark::DoNotOptimize(path.data());
  }
}
BENCHMARK(BM_ViterbiDecode)->Arg(16)->Arg(64);

void BM_TrainedPredict(benchmark::State& state) {
  const std::vector<thyrex::AnnotatedDocument> docs = benchmark_corpus(50);
  const thyrex::TaggerModel model = thyrex::train_tagger(docs, 3, 7);
  for (auto _ : state) {
    for (const thyrex::AnnotatedDocument& doc : docs) {
      const std::vector<thyrex::EntityMention> mentions =
          thyrex::predict(model, doc.text);
      benchmark::DoNotOptimize(mentions.data());
    }
  }
}
BENCHMARK(BM_TrainedPredict);

void BM_ScoreNer(benchmark::State& state) {
  const std::vector<thyrex::AnnotatedDocument> docs = benchmark_corpus(100);
  for (auto _ : state) {
    const thyrex::EvalReport report = thyrex::score_ner(docs, docs);
    benchmark::DoNotOptimize(report.overall.strict.tp);
  }
}
BENCHMARK(BM_ScoreNer);

}  // namespace

BENCHMARK_MAIN();
