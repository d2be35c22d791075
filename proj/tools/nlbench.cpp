// Copyright 2026 The Newton Losses Authors
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

// nlbench: dataset generation, benchmarks, λ ablation, self-checks and
// gradient slices. Exit codes: 0 success, 2 configuration error, 3 numeric
// failure.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "newton_losses/bench/checks.hpp"
#include "newton_losses/bench/datasets.hpp"
#include "newton_losses/bench/experiments.hpp"
#include "newton_losses/bench/report.hpp"
#include "newton_losses/bench/slice.hpp"
#include "newton_losses/errors.hpp"

namespace {

using nl::Index;
using namespace nl::bench;

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct BenchOptions {
  ExperimentConfig cfg;
  std::string modes = "all";
  std::string optimizer = "adam";
  std::string inversion = "direct";
  std::string cost_link = "softplus";
  double lambda = 0.0;
  Index seeds = 1;
  std::string format = "tsv";
  std::string out;
  bool timing = false;
  std::string resume;
  std::string save_model;
  std::string lambdas;
  std::string task = "rank";
};

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::istringstream is(item);
    is.imbue(std::locale::classic());
    T v{};
    if (!(is >> v) || !is.eof()) throw nl::ConfigError(fmt::format("cannot parse '{}' in {}", item, what));
    values.push_back(v);
  }
  if (values.empty()) throw nl::ConfigError(fmt::format("{} is empty", what));
  return values;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw nl::ConfigError("cannot open output file " + path);
  f << text;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw nl::ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void add_training_options(CLI::App* app, BenchOptions& o, bool with_lambda) {
  auto& c = o.cfg;
  app->add_option("--method", c.method, "Loss method (neuralsort, softsort, dsn_logistic, dsn_cauchy | ss_loss, "
                                        "ss_algorithm, fy)");
  if (with_lambda) app->add_option("--lambda", o.lambda, "Regularization strength (default: preset)");
  app->add_option("--seed", c.seed, "Base seed");
  app->add_option("--seeds", o.seeds, "Number of consecutive seeds")->check(CLI::PositiveNumber);
  app->add_option("--steps", c.steps, "Training steps")->check(CLI::NonNegativeNumber);
  app->add_option("--batch", c.batch, "Sets or grids per step")->check(CLI::PositiveNumber);
  app->add_option("--n", c.n, "Ranking length");
  app->add_option("--grid", c.grid, "Grid side length");
  app->add_option("--sigma", c.sigma, "Smoothing noise scale");
  app->add_option("--samples", c.samples, "Smoothing samples");
  app->add_flag("!--no-variance-reduction", c.variance_reduction, "Disable the f(y) baseline");
  app->add_option("--tau", c.tau, "Temperature of NeuralSort/SoftSort");
  app->add_option("--beta", c.beta, "Steepness of the sorting-network CDF");
  app->add_option("--lr", c.learning_rate, "Learning rate");
  app->add_option("--optimizer", o.optimizer, "adam or sgd");
  app->add_option("--inversion", o.inversion, "direct or woodbury");
  app->add_option("--cost-link", o.cost_link, "Path task output-to-cost map: softplus or identity");
  app->add_option("--feature-dim", c.feature_dim, "Feature dimension");
  app->add_option("--hidden", c.hidden, "Hidden layer sizes")->delimiter(',');
  app->add_option("--train-size", c.train_size, "Training records");
  app->add_option("--test-size", c.test_size, "Held-out records");
  app->add_option("--min-gap", c.min_gap, "Minimum latent gap inside a ranking set");
  app->add_option("--eval-every", c.eval_every, "Evaluation interval (default: 5% of steps)");
  app->add_option("--out", o.out, "Output file (default: stdout)");
  app->add_flag("--timing", o.timing, "Record wall-clock seconds in JSON reports");
}

void finish_config(BenchOptions& o, CLI::App* app) {
  o.cfg.optimizer = nl::parse_optimizer(o.optimizer);
  o.cfg.inversion = nl::parse_inversion(o.inversion);
  o.cfg.cost_link = nl::parse_cost_link(o.cost_link);
  if (const auto* opt = app->get_option_no_throw("--lambda"); opt && opt->count() > 0) o.cfg.lambda = o.lambda;
  if (o.cfg.task == Task::path && app->count("--method") == 0) o.cfg.method = "ss_loss";
  if (o.format != "tsv" && o.format != "json" && o.format != "curves")
    throw nl::ConfigError("--format must be tsv, json or curves");
}

std::vector<Mode> parse_modes(const std::string& text) {
  if (text == "all") return {kAllModes.begin(), kAllModes.end()};
  std::vector<Mode> modes;
  for (const auto& name : parse_list<std::string>(text, "--mode")) modes.push_back(parse_mode(name));
  return modes;
}

std::string render(const std::vector<TrainReport>& reports, const std::string& format) {
  if (format == "json") return bench_document(reports).dump(2) + "\n";
  if (format == "curves") return curves_tsv(reports);
  return summary_tsv(reports);
}

void run_bench(BenchOptions& o, CLI::App* app) {
  finish_config(o, app);
  const std::vector<Mode> modes = parse_modes(o.modes);
  const bool single = modes.size() == 1 && o.seeds == 1;
  if ((!o.resume.empty() || !o.save_model.empty()) && !single)
    throw nl::ConfigError("--resume and --save-model need exactly one mode and one seed");

  std::vector<TrainReport> reports;
  if (single) {
    o.cfg.mode = modes.front();
    nl::Mlp initial;
    nl::Mlp trained;
    RunOptions opts;
    if (!o.resume.empty()) {
      initial = nl::load_checkpoint(read_file(o.resume));
      opts.initial_model = &initial;
    }
    if (!o.save_model.empty()) opts.final_model = &trained;
    opts.timing = o.timing;
    reports.push_back(run_experiment(o.cfg, opts));
    if (!o.save_model.empty()) emit(nl::save_checkpoint(trained), o.save_model);
  } else {
    for (Mode m : modes) {
      for (Index s = 0; s < o.seeds; ++s) {
        ExperimentConfig cfg = o.cfg;
        cfg.mode = m;
        cfg.seed = o.cfg.seed + static_cast<std::uint64_t>(s);
        cfg.validate();
      }
    }
    for (Mode m : modes) {
      for (Index s = 0; s < o.seeds; ++s) {
        ExperimentConfig cfg = o.cfg;
        cfg.mode = m;
        cfg.seed = o.cfg.seed + static_cast<std::uint64_t>(s);
        RunOptions opts;
        opts.timing = o.timing;
        reports.push_back(run_experiment(cfg, opts));
      }
    }
  }
  emit(render(reports, o.format), o.out);
}

void run_ablation(BenchOptions& o, CLI::App* app) {
  o.cfg.task = parse_task(o.task);
  finish_config(o, app);
  const auto lambdas = parse_list<double>(o.lambdas, "--lambdas");
  const auto reports = ablate_lambda(o.cfg, lambdas, o.seeds);
  if (o.format == "json")
    emit(ablation_document(lambdas, reports).dump(2) + "\n", o.out);
  else if (o.format == "curves")
    emit(curves_tsv(reports), o.out);
  else
    emit(ablation_tsv(lambdas, reports), o.out);
}

int run(int argc, char** argv) {
  CLI::App app{"Newton-loss benchmarks and diagnostics"};
  app.require_subcommand(1);

  // gen -----------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset as JSON lines");
  gen->require_subcommand(1);
  std::uint64_t gen_seed = 0;
  Index gen_count = 1000, gen_dim = 8, gen_n = 5, gen_grid = 4;
  double gen_gap = 0.0;
  std::string gen_out;
  auto* gen_rank = gen->add_subcommand("rank", "Ranking sets");
  auto* gen_path = gen->add_subcommand("path", "Shortest-path grids");
  for (auto* sub : {gen_rank, gen_path}) {
    sub->add_option("--seed", gen_seed, "Seed");
    sub->add_option("--count", gen_count, "Number of records");
    sub->add_option("--feature-dim", gen_dim, "Feature dimension");
    sub->add_option("--out", gen_out, "Output file (default: stdout)");
  }
  gen_rank->add_option("--n", gen_n, "Ranking length");
  gen_rank->add_option("--min-gap", gen_gap, "Minimum latent gap inside a set");
  gen_path->add_option("--grid", gen_grid, "Grid side length");
  gen_rank->callback([&] {
    std::ostringstream os;
    write_jsonl(os, gen_ranking_data(gen_seed, gen_n, gen_count, gen_dim, gen_gap));
    emit(os.str(), gen_out);
  });
  gen_path->callback([&] {
    std::ostringstream os;
    write_jsonl(os, gen_grid_data(gen_seed, gen_grid, gen_count, gen_dim));
    emit(os.str(), gen_out);
  });

  // bench ---------------------------------------------------------------
  auto* bench = app.add_subcommand("bench", "Train and evaluate one benchmark task");
  bench->require_subcommand(1);
  BenchOptions bench_rank_opts, bench_path_opts;
  bench_path_opts.cfg.task = Task::path;
  for (auto [name, opts] : {std::pair{"rank", &bench_rank_opts}, std::pair{"path", &bench_path_opts}}) {
    auto* sub = bench->add_subcommand(name, fmt::format("{} task", name));
    add_training_options(sub, *opts, true);
    sub->add_option("--mode", opts->modes, "baseline, nl_hessian, nl_fisher, a comma list, or all");
    sub->add_option("--format", opts->format, "tsv (summary), curves (per-eval TSV) or json");
    sub->add_option("--resume", opts->resume, "Start from a model checkpoint");
    sub->add_option("--save-model", opts->save_model, "Write the trained model checkpoint");
    sub->callback([sub, opts] { run_bench(*opts, sub); });
  }

  // ablate ----------------------------------------------------------------
  auto* ablate = app.add_subcommand("ablate", "Regularization sweeps");
  ablate->require_subcommand(1);
  BenchOptions ablate_opts;
  auto* ablate_lambda_cmd = ablate->add_subcommand("lambda", "Final metric against λ");
  add_training_options(ablate_lambda_cmd, ablate_opts, false);
  ablate_lambda_cmd->add_option("--task", ablate_opts.task, "rank or path");
  ablate_lambda_cmd->add_option("--lambdas", ablate_opts.lambdas, "Ascending comma-separated λ grid")->required();
  ablate_lambda_cmd->add_option("--format", ablate_opts.format, "tsv, curves or json");
  ablate_lambda_cmd->callback([&] { run_ablation(ablate_opts, ablate_lambda_cmd); });

  // check ---------------------------------------------------------------
  auto* check = app.add_subcommand("check", "Numerical self-checks");
  check->require_subcommand(1);
  std::uint64_t check_seed = 0;
  std::string check_out;
  int check_status = 0;
  auto add_check = [&](const char* name, const char* help, auto fn) {
    auto* sub = check->add_subcommand(name, help);
    sub->add_option("--seed", check_seed, "Seed");
    sub->add_option("--out", check_out, "Output file (default: stdout)");
    sub->callback([&, fn] {
      const auto results = fn(check_seed);
      emit(checks_tsv(results), check_out);
      for (const auto& r : results)
        if (!r.pass) check_status = kExitNumeric;
    });
  };
  add_check("grad", "Ranking-loss gradients against finite differences",
            [](std::uint64_t s) { return check_gradients(s); });
  add_check("lemmas", "Split-step identities", [](std::uint64_t s) { return check_lemmas(s); });
  add_check("oracles", "Dijkstra against exhaustive search", [](std::uint64_t s) { return check_oracles(s); });

  // slice ---------------------------------------------------------------
  auto* slice = app.add_subcommand("slice", "Gradient slices");
  slice->require_subcommand(1);
  auto* slice_grad = slice->add_subcommand("grad", "Gradient components along one input coordinate");
  SliceConfig slice_cfg;
  std::string slice_y = "0,1,2,3,4", slice_truth, slice_target, slice_out;
  double slice_lambda = 0.0;
  slice_grad->add_option("--method", slice_cfg.method, "neuralsort, softsort, dsn_logistic, dsn_cauchy, mse, constant");
  slice_grad->add_option("--y", slice_y, "Base point, comma separated");
  slice_grad->add_option("--coord", slice_cfg.coord, "Coordinate to sweep");
  slice_grad->add_option("--lo", slice_cfg.lo, "Sweep start");
  slice_grad->add_option("--hi", slice_cfg.hi, "Sweep end");
  slice_grad->add_option("--steps", slice_cfg.steps, "Sweep points");
  slice_grad->add_option("--tau", slice_cfg.tau, "Temperature");
  slice_grad->add_option("--beta", slice_cfg.beta, "Sorting-network steepness");
  slice_grad->add_option("--truth", slice_truth, "Ground-truth order (default: order of --y)");
  slice_grad->add_option("--target", slice_target, "Target of the mse stub");
  slice_grad->add_option("--lambda", slice_lambda, "Apply Fisher injection with this λ");
  slice_grad->add_option("--out", slice_out, "Output file (default: stdout)");
  slice_grad->callback([&] {
    const auto y = parse_list<double>(slice_y, "--y");
    slice_cfg.base = Eigen::Map<const nl::Vector>(y.data(), static_cast<Index>(y.size()));
    if (!slice_truth.empty()) slice_cfg.truth = parse_list<int>(slice_truth, "--truth");
    if (!slice_target.empty()) {
      const auto t = parse_list<double>(slice_target, "--target");
      slice_cfg.target = nl::Vector(Eigen::Map<const nl::Vector>(t.data(), static_cast<Index>(t.size())));
    }
    if (slice_grad->count("--lambda") > 0) slice_cfg.inject_lambda = slice_lambda;
    emit(slice_tsv(slice_cfg, gradient_slice(slice_cfg)), slice_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  return check_status;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const nl::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const nl::Error& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  }
}
