// Copyright (c) 2026 spkcodes authors
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
//
// End-to-end checks of the installed CLI binary: exit codes, file outputs,
// and determinism of generated artifacts.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "spkcodes/util.hpp"
#include "test_common.hpp"

using namespace spk;
using namespace spk::testing;

namespace {

struct RunResult {
  int exit_code;
  std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args, const std::string& log_name) {
  const std::string log = "spkcodes_test_scratch/" + log_name + ".log";
  std::filesystem::create_directories("spkcodes_test_scratch");
  const std::string cmd =
      std::string(SPKCODES_CLI_PATH) + " " + args + " > " + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult res;
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  res.output = read_file(log);
  return res;
}

const char* kGenConfig = R"({
  "dataset": {
    "generate": {
      "num_seen_speakers": 3,
      "num_unseen_speakers": 1,
      "train_frames": 16,
      "valid_frames": 6,
      "test_frames": 6,
      "adapt_frames": 10,
      "input_dim": 4,
      "output_dim": 3,
      "mode": "affine",
      "noise_sigma": 0.02,
      "seed": 11
    }
  },
  "network": {
    "hidden_width": 6,
    "depth": 2,
    "strategy": "affine",
    "scale_dim": 2,
    "bias_dim": 2,
    "mode": "nonlinear",
    "seed": 5
  },
  "train": {"epochs": 6, "batch_size": 8, "learning_rate": 0.005, "seed": 5},
  "adapt": {"epochs": 5, "learning_rate": 0.01, "sizes": [6], "seed": 5},
  "seeds": [5]
})";

std::string write_config(const std::string& name, const std::string& body) {
  const std::string path = "spkcodes_test_scratch/" + name;
  write_file(path, body);
  return path;
}

}  // namespace

TEST_CASE("gen-data writes a deterministic dataset and a manifest") {
  const std::string cfg = write_config("gen.json", kGenConfig);
  const std::string d1 = scratch_dir("cli_data1");
  const std::string d2 = scratch_dir("cli_data2");

  RunResult r1 = run_cli("gen-data --config " + cfg + " --out " + d1, "gen1");
  CHECK(r1.exit_code == 0);
  CHECK(r1.output.find("seen speakers: 3 x 16 train") != std::string::npos);
  CHECK(std::filesystem::exists(d1 + "/meta.json"));
  CHECK(std::filesystem::exists(d1 + "/frames.csv"));

  RunResult r2 = run_cli("gen-data --config " + cfg + " --out " + d2, "gen2");
  CHECK(r2.exit_code == 0);
  CHECK(read_file(d1 + "/frames.csv") == read_file(d2 + "/frames.csv"));
  CHECK(read_file(d1 + "/meta.json") == read_file(d2 + "/meta.json"));
}

TEST_CASE("a config with a missing field exits 1 naming the field") {
  const std::string cfg = write_config(
      "broken.json", R"({"dataset": {"generate": {"num_seen_speakers": 2}}})");
  RunResult r = run_cli("gen-data --config " + cfg + " --out spkcodes_test_scratch/x",
                        "broken");
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("num_unseen_speakers") != std::string::npos);
}

TEST_CASE("invalid JSON exits 1") {
  const std::string cfg = write_config("notjson.json", "{oops");
  RunResult r = run_cli("gen-data --config " + cfg, "notjson");
  CHECK(r.exit_code == 1);
}

TEST_CASE("train, adapt, and eval run end to end") {
  const std::string cfg = write_config("train.json", kGenConfig);
  const std::string out = scratch_dir("cli_run");

  RunResult train = run_cli("train --config " + cfg + " --out " + out, "train");
  CHECK(train.exit_code == 0);
  CHECK(std::filesystem::exists(out + "/report-0001.json"));
  CHECK(std::filesystem::exists(out + "/summary-0001.csv"));
  CHECK(std::filesystem::exists(out + "/model-seed5.json"));
  CHECK(std::filesystem::exists(out + "/history-seed5.csv"));

  RunResult adapt = run_cli("adapt --config " + cfg + " --out " + out, "adapt");
  CHECK(adapt.exit_code == 0);
  CHECK(std::filesystem::exists(out + "/report-0002.json"));
  CHECK(std::filesystem::exists(out + "/model-seed5-adapted-size6.json"));

  RunResult eval = run_cli("eval --config " + cfg + " --model " + out +
                               "/model-seed5.json --out " + out,
                           "eval");
  CHECK(eval.exit_code == 0);
  CHECK(eval.output.find("test: rmse") != std::string::npos);

  // Purity: evaluating the same checkpoint twice prints the same numbers.
  RunResult eval2 = run_cli("eval --config " + cfg + " --model " + out +
                                "/model-seed5.json --out " + out,
                            "eval2");
  CHECK(eval.output == eval2.output);
}

TEST_CASE("gradcheck subcommand exits zero") {
  RunResult r = run_cli("gradcheck", "gradcheck");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("ok") != std::string::npos);
}

TEST_CASE("bench writes a timing table") {
  const std::string cfg = write_config(
      "bench.json", R"({"network": {"hidden_width": 8, "depth": 2}, "repeats": 20})");
  const std::string out = scratch_dir("cli_bench");
  RunResult r = run_cli("bench --config " + cfg + " --out " + out, "bench");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("strategy,mode,micros_per_forward") != std::string::npos);
  CHECK(std::filesystem::exists(out + "/bench.csv"));
}

TEST_CASE("a runtime failure exits 2") {
  const std::string cfg = write_config("eval.json", kGenConfig);
  RunResult r = run_cli(
      "eval --config " + cfg + " --model spkcodes_test_scratch/nonexistent.json",
      "eval_missing");
  CHECK(r.exit_code == 2);
}

TEST_CASE("unknown subcommand fails") {
  RunResult r = run_cli("frobnicate", "unknown");
  CHECK(r.exit_code != 0);
}

TEST_CASE("missing config exits 1") {
  RunResult r = run_cli("train", "noconfig");
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("--config") != std::string::npos);
}
