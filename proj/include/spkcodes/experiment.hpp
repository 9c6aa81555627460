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
// Experiment harness: declarative run specs, training/adaptation/eval cells,
// code-size sweeps, multi-strategy comparison grids, and metrics reports.
// Reports are reproducible byte for byte: wall-clock timing lives in a
// separate sidecar file, never in the canonical report.

#ifndef SPKCODES_EXPERIMENT_HPP_
#define SPKCODES_EXPERIMENT_HPP_

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "spkcodes/model.hpp"
#include "spkcodes/synthgen.hpp"
#include "spkcodes/training.hpp"

namespace spk {

struct ExperimentSpec {
  std::optional<GenConfig> gen;  // inline dataset definition
  std::string dataset_path;      // or a directory written by gen-data
  NetworkConfig net;             // dims are filled from the dataset
  TrainConfig train;
  AdaptConfig adapt;
  std::vector<int> adapt_sizes = {10, 40, 160};
  std::vector<StrategySpec> compare_strategies;
  std::vector<InjectionMode> compare_modes = {InjectionMode::nonlinear,
                                              InjectionMode::linear};
  std::vector<int> sweep_sizes = {1, 4, 16, 64};
  std::vector<std::uint64_t> seeds = {101, 202, 303};
  std::string out_dir = "out";
  int threads = 1;
};

// Parses a spec document; error messages name the offending field.
ExperimentSpec parse_spec(const nlohmann::json& j);
GenConfig parse_gen_config(const nlohmann::json& j);

// Desk-scale default comparison grid: all five code strategies at an equal
// per-speaker budget of 16 code entries.
std::vector<StrategySpec> default_compare_strategies();

// Loads the dataset from disk or generates it inline.
SpeakerDataset resolve_dataset(const ExperimentSpec& spec);

// ---- evaluation ----

struct EvalResult {
  std::map<std::string, double> per_speaker;  // RMSE per speaker
  double aggregate = 0.0;                     // pooled RMSE over all frames
  std::size_t frames = 0;
};

// RMSE of an arbitrary predictor on one split; usable with a Network or any
// stand-in oracle.
EvalResult evaluate(
    const std::function<Vector(const Vector& x, const std::string& speaker)>&
        predict,
    const SpeakerDataset& ds, Split split,
    const std::vector<std::string>& speakers);

EvalResult evaluate_network(const Network& net, const SpeakerDataset& ds,
                            Split split, const std::vector<std::string>& speakers);

// ---- metrics report ----

struct CellResult {
  StrategySpec strategy;
  InjectionMode mode = InjectionMode::nonlinear;
  int adapt_size = 0;  // 0 = multi-speaker row, no adaptation
  std::uint64_t seed = 0;
  bool failed = false;
  std::string fail_reason;
  double train_rmse = 0.0;
  double valid_rmse = 0.0;
  double test_rmse = 0.0;
  bool has_adapted = false;
  double adapted_rmse = 0.0;
  std::map<std::string, double> adapted_per_speaker;
  ParamCounts params;
  int epochs_run = 0;
  double wall_seconds = 0.0;  // sidecar only
};

struct MetricsReport {
  std::string command;
  std::string dataset_sha256;
  nlohmann::json config_echo;
  std::vector<CellResult> cells;
};

// Canonical serializations: cells sorted, doubles exact, no wall-clock data.
nlohmann::json report_json(const MetricsReport& r);
std::string report_csv(const MetricsReport& r);
std::string timing_csv(const MetricsReport& r);
// Renders an aligned text table of the report cells.
std::string report_table(const MetricsReport& r);

struct ReportPaths {
  std::string json_path;
  std::string csv_path;
  std::string timing_path;
};

// Appends report-NNNN.{json,csv} plus timing-NNNN.csv to the run directory;
// existing files are never overwritten.
ReportPaths write_report(const MetricsReport& r, const std::string& out_dir);

// ---- runners ----

struct TrainedModel {
  Network net;
  TrainHistory history;
  double wall_seconds = 0.0;
};

// Builds a network for the dataset (dims filled in), registers every seen
// speaker, and trains. ncfg.strategy/mode/seed must already be set.
TrainedModel train_model(const SpeakerDataset& ds, NetworkConfig ncfg,
                         const TrainConfig& tcfg);

// Adapts every unseen speaker on its first `adapt_size` adaptation frames
// (codes only by default), then evaluates on the unseen test split.
// The input network is copied; the caller's model is untouched.
struct AdaptOutcome {
  Network net;  // with all unseen speakers registered and adapted
  EvalResult unseen_test;
};
AdaptOutcome adapt_all_unseen(const Network& base, const SpeakerDataset& ds,
                              int adapt_size, const AdaptConfig& acfg);

// One full comparison grid: strategies x modes x seeds, each trained on the
// identical dataset, then adapted at every requested size. Failed cells are
// reported with their reason. `threads` > 1 runs cells concurrently.
std::vector<CellResult> run_compare(const SpeakerDataset& ds,
                                    const ExperimentSpec& spec);

// Scaling-code size sweep: one multi-speaker model per size per seed.
std::vector<CellResult> run_sweep(const SpeakerDataset& ds,
                                  const ExperimentSpec& spec);

// ---- gradient-check grid ----

struct GradcheckCell {
  StrategySpec strategy;
  InjectionMode mode;
  GradcheckReport report;
};

struct GradcheckGrid {
  std::vector<GradcheckCell> cells;
  bool all_ok(double tol = 1e-5) const;
};

// Runs the training-module gradient check for every strategy and both
// injection modes on small square networks (width 4, depth 2).
GradcheckGrid run_gradcheck_grid(std::uint64_t seed = 12345);

// ---- bench ----

struct BenchRow {
  StrategySpec strategy;
  InjectionMode mode;
  double micros_per_forward = 0.0;
};

std::vector<BenchRow> run_bench(int hidden_width, int depth, int repeats);
std::string bench_csv(const std::vector<BenchRow>& rows);

// Spearman rank correlation, used by the sweep trend checks.
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

// Median of a non-empty vector (average of middle two for even sizes).
double median(std::vector<double> xs);

}  // namespace spk

#endif  // SPKCODES_EXPERIMENT_HPP_
