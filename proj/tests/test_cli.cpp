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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int status = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Runs the installed CLI with output capture. `args` is appended to the
// binary path verbatim.
RunResult run_cli(const std::string& args, const fs::path& dir) {
  const fs::path out_path = dir / "stdout.txt";
  const fs::path err_path = dir / "stderr.txt";
  const std::string command = std::string(THYREX_CLI_PATH) + " " + args + " > " +
                              out_path.string() + " 2> " + err_path.string();
  const int raw = std::system(command.c_str());
  RunResult result;
  result.status = raw == -1 ? -1 : WEXITSTATUS(raw);
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  return result;
}

struct ScratchDir {
  fs::path path;
  explicit ScratchDir(const std::string& name)
      : path(fs::temp_directory_path() / ("thyrex_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~ScratchDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

}  // namespace

TEST_CASE("help text exits zero and names the subcommands") {
  ScratchDir dir("help");
  const RunResult result = run_cli("--help", dir.path);
  CHECK(result.status == 0);
  CHECK(result.out.find("synth") != std::string::npos);
  CHECK(result.out.find("train") != std::string::npos);
  CHECK(result.out.find("extract") != std::string::npos);
  CHECK(result.out.find("eval") != std::string::npos);
}

TEST_CASE("usage mistakes exit with status one") {
  ScratchDir dir("usage");
  CHECK(run_cli("synth --count 0 --out " + dir.file("x.jsonl"), dir.path).status ==
        1);
  CHECK(run_cli("synth --out " + dir.file("x.jsonl") + " --style cubist",
                dir.path).status == 1);
  CHECK(run_cli("frobnicate", dir.path).status == 1);
  // extract needs a tagging strategy.
  CHECK(run_cli("extract --in " + dir.file("x.jsonl") + " --out " +
                    dir.file("y.jsonl"),
                dir.path).status == 1);
}

TEST_CASE("data problems exit with status two") {
  ScratchDir dir("data");
  const RunResult missing = run_cli(
      "train --in " + dir.file("nope.jsonl") + " --model-out " + dir.file("m"),
      dir.path);
  CHECK(missing.status == 2);
  CHECK_FALSE(missing.err.empty());

  std::ofstream(dir.file("broken.jsonl")) << "{not json at all\n";
  const RunResult malformed = run_cli(
      "train --in " + dir.file("broken.jsonl") + " --model-out " + dir.file("m"),
      dir.path);
  CHECK(malformed.status == 2);
}

TEST_CASE("generation is reproducible byte for byte") {
  ScratchDir dir("repro");
  const std::string a = dir.file("a.jsonl");
  const std::string b = dir.file("b.jsonl");
  CHECK(run_cli("synth --seed 5 --count 30 --out " + a, dir.path).status == 0);
  CHECK(run_cli("synth --seed 5 --count 30 --out " + b, dir.path).status == 0);
  CHECK(slurp(a) == slurp(b));
  const std::string c = dir.file("c.jsonl");
  CHECK(run_cli("synth --seed 6 --count 30 --out " + c, dir.path).status == 0);
  CHECK(slurp(a) != slurp(c));
}

TEST_CASE("the full pipeline runs end to end") {
  ScratchDir dir("pipeline");
  const std::string corpus = dir.file("corpus.jsonl");
  const std::string model = dir.file("tagger.model");
  const std::string linker = dir.file("linker.model");
  const std::string pred = dir.file("pred.jsonl");

  CHECK(run_cli("synth --seed 11 --count 60 --out " + corpus, dir.path).status ==
        0);
  const RunResult trained = run_cli("train --in " + corpus + " --model-out " +
                                        model + " --epochs 5 --relations " +
                                        " --linker-out " + linker,
                                    dir.path);
  CHECK(trained.status == 0);
  CHECK(trained.out.find("tagger self-accuracy") != std::string::npos);
  CHECK(trained.out.find("linker self-accuracy") != std::string::npos);

  const RunResult extracted = run_cli(
      "extract --in " + corpus + " --out " + pred + " --model " + model +
          " --linker-model " + linker + " --tirads-table " THYREX_POINTS_TABLE,
      dir.path);
  CHECK(extracted.status == 0);
  CHECK(extracted.err.find("skipped") == std::string::npos);

  const RunResult scored =
      run_cli("eval --gold " + corpus + " --pred " + pred + " --relations",
              dir.path);
  CHECK(scored.status == 0);
  // Training corpus == evaluation corpus, so scores sit at the ceiling.
  CHECK(scored.out.find("Overall") != std::string::npos);
  CHECK(scored.out.find("1.0000") != std::string::npos);
  CHECK(scored.out.find("Relations") != std::string::npos);
}

TEST_CASE("omitting the points table skips scoring with a notice") {
  ScratchDir dir("skip_tirads");
  const std::string corpus = dir.file("corpus.jsonl");
  const std::string pred = dir.file("pred.jsonl");
  CHECK(run_cli("synth --seed 3 --count 5 --out " + corpus, dir.path).status ==
        0);
  const RunResult extracted = run_cli(
      "extract --in " + corpus + " --out " + pred + " --lexicon-only",
      dir.path);
  CHECK(extracted.status == 0);
  CHECK(extracted.err.find("TI-RADS scoring skipped") != std::string::npos);
  CHECK(slurp(pred).find("\"tirads\"") == std::string::npos);
}

TEST_CASE("evaluation writes the report files it is asked for") {
  ScratchDir dir("report");
  const std::string corpus = dir.file("corpus.jsonl");
  const std::string report = dir.file("report.txt");
  CHECK(run_cli("synth --seed 9 --count 10 --out " + corpus, dir.path).status ==
        0);
  const RunResult scored = run_cli(
      "eval --gold " + corpus + " --pred " + corpus + " --report " + report,
      dir.path);
  CHECK(scored.status == 0);
  CHECK(fs::exists(report));
  CHECK(fs::exists(report + ".json"));
  CHECK(slurp(report).find("Overall") != std::string::npos);
}

TEST_CASE("mismatched document ids fail evaluation by default") {
  ScratchDir dir("mismatch");
  const std::string gold = dir.file("gold.jsonl");
  const std::string pred = dir.file("pred.jsonl");
  CHECK(run_cli("synth --seed 2 --count 4 --out " + gold, dir.path).status == 0);
  CHECK(run_cli("synth --seed 2 --count 3 --out " + pred, dir.path).status == 0);
  CHECK(run_cli("eval --gold " + gold + " --pred " + pred, dir.path).status == 2);
  CHECK(run_cli("eval --gold " + gold + " --pred " + pred + " --allow-missing",
                dir.path).status == 0);
}

TEST_CASE("parallel extraction matches serial extraction byte for byte") {
  ScratchDir dir("jobs");
  const std::string corpus = dir.file("corpus.jsonl");
  const std::string serial = dir.file("serial.jsonl");
  const std::string parallel = dir.file("parallel.jsonl");
  CHECK(run_cli("synth --seed 8 --count 40 --out " + corpus, dir.path).status ==
        0);
  CHECK(run_cli("extract --in " + corpus + " --out " + serial +
                    " --lexicon-only --jobs 1",
                dir.path).status == 0);
  CHECK(run_cli("extract --in " + corpus + " --out " + parallel +
                    " --lexicon-only --jobs 4",
                dir.path).status == 0);
  CHECK(slurp(serial) == slurp(parallel));
}

TEST_CASE("the lexicon environment variable extends the defaults") {
  ScratchDir dir("env_lexicon");
  const std::string lexicon = dir.file("extra.lex");
  std::ofstream(lexicon) << "COMPOSITION\tfrobulated texture\n";
  const std::string input = dir.file("in.jsonl");
  std::ofstream(input) << "{\"id\": \"d1\", \"text\": "
                          "\"A nodule with frobulated texture.\"}\n";
  const std::string pred = dir.file("out.jsonl");

  // Without the variable the phrase is unknown, so no COMPOSITION
  // mention appears (the echoed document text is not a match).
  unsetenv("NODULE_EXTRACT_LEXICON");
  CHECK(run_cli("extract --in " + input + " --out " + pred + " --lexicon-only",
                dir.path).status == 0);
  CHECK(slurp(pred).find("COMPOSITION") == std::string::npos);

  setenv("NODULE_EXTRACT_LEXICON", lexicon.c_str(), 1);
  CHECK(run_cli("extract --in " + input + " --out " + pred + " --lexicon-only",
                dir.path).status == 0);
  unsetenv("NODULE_EXTRACT_LEXICON");
  const std::string output = slurp(pred);
  CHECK(output.find("COMPOSITION") != std::string::npos);
  // Defaults still apply alongside the extension.
  CHECK(output.find("THYROID_NODULE") != std::string::npos);
}
