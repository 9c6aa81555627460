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
// spkcodes CLI: dataset generation, multi-speaker training, unseen-speaker
// adaptation, evaluation, code-size sweeps, strategy comparisons, gradient
// checking, and forward-pass timing.
//
// Exit codes: 0 success, 1 validation/config error, 2 runtime failure.

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "spkcodes/experiment.hpp"
#include "spkcodes/model.hpp"
#include "spkcodes/synthgen.hpp"
#include "spkcodes/training.hpp"
#include "spkcodes/util.hpp"

namespace {

using nlohmann::json;
using namespace spk;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::vector<std::uint64_t> seeds;
  int threads = 0;
};

json load_config(const std::string& path) {
  if (path.empty()) throw ValidationError("--config <path> is required");
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

ExperimentSpec spec_from_args(const CommonArgs& args) {
  ExperimentSpec spec = parse_spec(load_config(args.config_path));
  if (!args.out_dir.empty()) spec.out_dir = args.out_dir;
  if (!args.seeds.empty()) spec.seeds = args.seeds;
  if (args.threads > 0) spec.threads = args.threads;
  return spec;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON experiment spec");
  cmd->add_option("--out", args.out_dir, "output directory (overrides spec)");
  cmd->add_option("--seed", args.seeds, "seed list (overrides spec)");
  cmd->add_option("--threads", args.threads, "worker threads for grids");
}

std::string model_path(const std::string& out_dir, const std::string& stem) {
  return out_dir + "/" + stem + ".json";
}

int cmd_gen_data(const CommonArgs& args) {
  json cfg = load_config(args.config_path);
  const json& gen_json = cfg.contains("dataset") && cfg.at("dataset").contains("generate")
                             ? cfg.at("dataset").at("generate")
                             : cfg;
  GenConfig gen = parse_gen_config(gen_json);
  if (!args.seeds.empty()) gen.seed = args.seeds.front();
  std::string dir = args.out_dir;
  if (dir.empty()) dir = parse_spec(cfg).out_dir;
  SpeakerDataset ds = generate(gen);
  save_dataset(ds, dir);
  std::printf("dataset written to %s\n", dir.c_str());
  std::printf("  sha256: %s\n", dataset_hash(ds).c_str());
  std::printf("  seen speakers: %d x %d train / %d valid / %d test frames\n",
              gen.num_seen_speakers, gen.train_frames, gen.valid_frames,
              gen.test_frames);
  std::printf("  unseen speakers: %d x %d adapt / %d valid / %d test frames\n",
              gen.num_unseen_speakers, gen.adapt_frames, gen.valid_frames,
              gen.test_frames);
  std::printf("  total frames: %zu\n", ds.frames.size());
  return 0;
}

int cmd_train(const CommonArgs& args) {
  ExperimentSpec spec = spec_from_args(args);
  SpeakerDataset ds = resolve_dataset(spec);
  if (spec.seeds.empty()) throw ValidationError("train: seed list is empty");

  MetricsReport report;
  report.command = "train";
  report.dataset_sha256 = dataset_hash(ds);
  report.config_echo = load_config(args.config_path);
  for (std::uint64_t seed : spec.seeds) {
    NetworkConfig ncfg = spec.net;
    ncfg.seed = seed;
    TrainConfig tcfg = spec.train;
    tcfg.seed = seed;
    TrainedModel tm = train_model(ds, ncfg, tcfg);

    CellResult cell;
    cell.strategy = ncfg.strategy;
    cell.mode = ncfg.mode;
    cell.seed = seed;
    cell.params = tm.net.count_params();
    cell.epochs_run = tm.history.epochs_run();
    cell.train_rmse = evaluate_network(tm.net, ds, Split::train, ds.seen).aggregate;
    cell.valid_rmse = evaluate_network(tm.net, ds, Split::valid, ds.seen).aggregate;
    cell.test_rmse = evaluate_network(tm.net, ds, Split::test, ds.seen).aggregate;
    cell.wall_seconds = tm.wall_seconds;
    report.cells.push_back(cell);

    const std::string stem = "model-seed" + std::to_string(seed);
    tm.net.save(model_path(spec.out_dir, stem));
    write_file(spec.out_dir + "/history-seed" + std::to_string(seed) + ".csv",
               history_csv(tm.history));
  }
  ReportPaths paths = write_report(report, spec.out_dir);
  std::cout << report_table(report);
  std::printf("report: %s\n", paths.json_path.c_str());
  return 0;
}

int cmd_adapt(const CommonArgs& args) {
  ExperimentSpec spec = spec_from_args(args);
  SpeakerDataset ds = resolve_dataset(spec);

  MetricsReport report;
  report.command = "adapt";
  report.dataset_sha256 = dataset_hash(ds);
  report.config_echo = load_config(args.config_path);
  for (std::uint64_t seed : spec.seeds) {
    const std::string stem = "model-seed" + std::to_string(seed);
    Network base = Network::load(model_path(spec.out_dir, stem));
    for (int size : spec.adapt_sizes) {
      AdaptConfig acfg = spec.adapt;
      acfg.base.seed = seed;
      AdaptOutcome ao = adapt_all_unseen(base, ds, size, acfg);
      CellResult cell;
      cell.strategy = base.config().strategy;
      cell.mode = base.config().mode;
      cell.adapt_size = size;
      cell.seed = seed;
      cell.params = base.count_params();
      cell.has_adapted = true;
      cell.adapted_rmse = ao.unseen_test.aggregate;
      cell.adapted_per_speaker = ao.unseen_test.per_speaker;
      cell.train_rmse = evaluate_network(base, ds, Split::train, ds.seen).aggregate;
      cell.valid_rmse = evaluate_network(base, ds, Split::valid, ds.seen).aggregate;
      cell.test_rmse = evaluate_network(base, ds, Split::test, ds.seen).aggregate;
      report.cells.push_back(cell);
      ao.net.save(model_path(spec.out_dir,
                             stem + "-adapted-size" + std::to_string(size)));
    }
  }
  ReportPaths paths = write_report(report, spec.out_dir);
  std::cout << report_table(report);
  std::printf("report: %s\n", paths.json_path.c_str());
  return 0;
}

int cmd_eval(const CommonArgs& args, const std::string& model_file) {
  ExperimentSpec spec = spec_from_args(args);
  SpeakerDataset ds = resolve_dataset(spec);
  if (model_file.empty()) throw ValidationError("eval: --model <path> is required");
  Network net = Network::load(model_file);
  for (Split split : {Split::train, Split::valid, Split::test}) {
    std::vector<std::string> ids;
    for (const std::string& id : net.speaker_ids()) {
      if (!ds.select(id, split).empty()) ids.push_back(id);
    }
    if (ids.empty()) continue;
    EvalResult res = evaluate_network(net, ds, split, ids);
    std::printf("%s: rmse %.6f over %zu values\n", split_name(split).c_str(),
                res.aggregate, res.frames);
    for (const auto& [id, rmse] : res.per_speaker) {
      std::printf("  %-6s %.6f\n", id.c_str(), rmse);
    }
  }
  return 0;
}

int cmd_sweep(const CommonArgs& args) {
  ExperimentSpec spec = spec_from_args(args);
  SpeakerDataset ds = resolve_dataset(spec);
  MetricsReport report;
  report.command = "sweep";
  report.dataset_sha256 = dataset_hash(ds);
  report.config_echo = load_config(args.config_path);
  report.cells = run_sweep(ds, spec);
  ReportPaths paths = write_report(report, spec.out_dir);
  std::cout << report_table(report);
  std::printf("report: %s\n", paths.json_path.c_str());
  return 0;
}

int cmd_compare(const CommonArgs& args) {
  ExperimentSpec spec = spec_from_args(args);
  if (spec.compare_strategies.empty()) {
    spec.compare_strategies = default_compare_strategies();
  }
  SpeakerDataset ds = resolve_dataset(spec);
  MetricsReport report;
  report.command = "compare";
  report.dataset_sha256 = dataset_hash(ds);
  report.config_echo = load_config(args.config_path);
  report.cells = run_compare(ds, spec);
  ReportPaths paths = write_report(report, spec.out_dir);
  std::cout << report_table(report);
  std::printf("report: %s\n", paths.json_path.c_str());
  return 0;
}

int cmd_gradcheck(const CommonArgs& args) {
  std::uint64_t seed = args.seeds.empty() ? 12345 : args.seeds.front();
  GradcheckGrid grid = run_gradcheck_grid(seed);
  bool ok = true;
  for (const GradcheckCell& c : grid.cells) {
    const double worst = c.report.overall();
    const bool cell_ok = c.report.ok(1e-5);
    ok = ok && cell_ok;
    std::printf("%-14s %-10s max_rel %.3e shared %.3e adapters %.3e codes %.3e %s\n",
                strategy_name(c.strategy.kind).c_str(),
                injection_mode_name(c.mode).c_str(), worst,
                c.report.shared.max_rel, c.report.adapters.max_rel,
                c.report.codes.max_rel, cell_ok ? "ok" : "FAIL");
  }
  if (!ok) {
    std::fprintf(stderr, "gradient check failed\n");
    return 2;
  }
  return 0;
}

int cmd_bench(const CommonArgs& args) {
  ExperimentSpec spec;
  spec.out_dir = args.out_dir.empty() ? "out" : args.out_dir;
  int width = 64, depth = 3, repeats = 2000;
  if (!args.config_path.empty()) {
    json cfg = load_config(args.config_path);
    if (cfg.contains("network")) {
      width = cfg.at("network").value("hidden_width", width);
      depth = cfg.at("network").value("depth", depth);
    }
    repeats = cfg.value("repeats", repeats);
  }
  std::vector<BenchRow> rows = run_bench(width, depth, repeats);
  std::string csv = bench_csv(rows);
  std::fputs(csv.c_str(), stdout);
  write_file(spec.out_dir + "/bench.csv", csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"factorized speaker-adaptive network toolkit"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string eval_model;

  CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
  add_common(gen, args);
  CLI::App* train = app.add_subcommand("train", "train a multi-speaker model");
  add_common(train, args);
  CLI::App* adapt =
      app.add_subcommand("adapt", "adapt a trained model to unseen speakers");
  add_common(adapt, args);
  CLI::App* eval = app.add_subcommand("eval", "evaluate a model checkpoint");
  add_common(eval, args);
  eval->add_option("--model", eval_model, "model checkpoint path");
  CLI::App* sweep = app.add_subcommand("sweep", "scaling-code size sweep");
  add_common(sweep, args);
  CLI::App* compare = app.add_subcommand("compare", "multi-strategy comparison");
  add_common(compare, args);
  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "finite-difference gradient check");
  add_common(gradcheck, args);
  CLI::App* bench = app.add_subcommand("bench", "forward-pass timing");
  add_common(bench, args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_data(args);
    if (train->parsed()) return cmd_train(args);
    if (adapt->parsed()) return cmd_adapt(args);
    if (eval->parsed()) return cmd_eval(args, eval_model);
    if (sweep->parsed()) return cmd_sweep(args);
    if (compare->parsed()) return cmd_compare(args);
    if (gradcheck->parsed()) return cmd_gradcheck(args);
    if (bench->parsed()) return cmd_bench(args);
  } catch (const spk::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime failure: %s\n", e.what());
    return 2;
  }
  return 0;
}
