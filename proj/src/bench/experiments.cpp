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

#include "newton_losses/bench/experiments.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <string>
#include <utility>

#include "newton_losses/errors.hpp"
#include "newton_losses/rng.hpp"

namespace nl::bench {

namespace {

// Independent RNG streams of one run, all derived from the run seed.
enum Stream : std::uint64_t { kTrainData = 1, kTestData = 2, kModelInit = 3, kBatches = 4, kNoise = 5 };

bool is_ranking_method(std::string_view method) {
  return method == "neuralsort" || method == "softsort" || method == "dsn_logistic" || method == "dsn_cauchy";
}

double percent(Index hits, Index total) {
  return total > 0 ? 100.0 * static_cast<double>(hits) / static_cast<double>(total) : 0.0;
}

Mlp make_model(const ExperimentConfig& cfg) {
  std::vector<Index> sizes{cfg.feature_dim};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(1);
  std::vector<Activation> acts(cfg.hidden.size(), Activation::relu);
  acts.push_back(Activation::identity);
  return Mlp(sizes, acts, derive_seed(cfg.seed, {kModelInit}));
}

Mlp initial_model(const ExperimentConfig& cfg, const RunOptions& opts) {
  if (!opts.initial_model) return make_model(cfg);
  if (opts.initial_model->input_dim() != cfg.feature_dim || opts.initial_model->output_dim() != 1)
    throw ConfigError("resumed model does not match the feature dimension or is not scalar-output");
  return *opts.initial_model;
}

/// Row-major reshape of a stacked (N·k) × 1 output column into N × k.
Matrix unstack(const Matrix& column, Index per_sample) {
  const Index count = column.rows() / per_sample;
  Matrix y(count, per_sample);
  for (Index i = 0; i < count; ++i)
    for (Index j = 0; j < per_sample; ++j) y(i, j) = column(i * per_sample + j, 0);
  return y;
}

/// Inverse of unstack, scaled by k: backward() averages over the N·k stacked
/// rows, but the per-sample convention averages over the N samples only.
Matrix restack_gradient(const Matrix& g) {
  const Index k = g.cols();
  Matrix column(g.rows() * k, 1);
  for (Index i = 0; i < g.rows(); ++i)
    for (Index j = 0; j < k; ++j) column(i * k + j, 0) = static_cast<double>(k) * g(i, j);
  return column;
}

std::vector<std::size_t> draw_batch(Rng& rng, std::size_t pool, Index batch) {
  std::uniform_int_distribution<std::size_t> pick(0, pool - 1);
  std::vector<std::size_t> idx(static_cast<std::size_t>(batch));
  for (auto& i : idx) i = pick(rng);
  return idx;
}

template <typename Record>
Matrix stacked_features(const std::vector<Record>& records, const std::vector<std::size_t>& idx) {
  std::vector<const Matrix*> blocks;
  blocks.reserve(idx.size());
  for (std::size_t i : idx) blocks.push_back(&records[i].features);
  return stack_features(blocks);
}

template <typename Record>
Matrix all_features(const std::vector<Record>& records) {
  std::vector<std::size_t> idx(records.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return stacked_features(records, idx);
}

bool is_eval_step(Index step, Index every, Index total) { return step == total || step % every == 0; }

SmoothingConfig step_smoothing(const ExperimentConfig& cfg, Index step) {
  SmoothingConfig s;
  s.sigma = cfg.sigma;
  s.samples = cfg.samples;
  s.variance_reduction = cfg.variance_reduction;
  s.seed = derive_seed(cfg.seed, {kNoise, static_cast<std::uint64_t>(step)});
  return s;
}

double elapsed_seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

std::string_view to_string(Task t) { return t == Task::rank ? "rank" : "path"; }

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::baseline: return "baseline";
    case Mode::nl_hessian: return "nl_hessian";
    case Mode::nl_fisher: return "nl_fisher";
  }
  return "?";
}

Task parse_task(std::string_view name) {
  if (name == "rank") return Task::rank;
  if (name == "path") return Task::path;
  throw ConfigError("unknown task '" + std::string(name) + "' (expected rank or path)");
}

Mode parse_mode(std::string_view name) {
  for (Mode m : kAllModes)
    if (to_string(m) == name) return m;
  throw ConfigError("unknown mode '" + std::string(name) + "' (expected baseline, nl_hessian or nl_fisher)");
}

double default_lambda(Task task, std::string_view method, Mode mode, Index size) {
  const bool hessian = mode == Mode::nl_hessian;
  if (mode == Mode::baseline) return 0.0;
  if (task == Task::rank) {
    const bool long_sets = size >= 8;
    if (method == "neuralsort") return hessian ? 0.01 : (long_sets ? 100.0 : 0.1);
    if (method == "softsort") return hessian ? (long_sets ? 1.0 : 10.0) : (long_sets ? 100.0 : 10.0);
    return 0.1;
  }
  if (method == "ss_loss") return hessian ? 1000.0 : 0.1;
  return 1000.0;
}

double ExperimentConfig::resolved_lambda() const {
  if (mode == Mode::baseline) return 0.0;
  return lambda ? *lambda : default_lambda(task, method, mode, task == Task::rank ? n : grid);
}

Index ExperimentConfig::resolved_eval_every() const {
  if (eval_every > 0) return eval_every;
  return std::max<Index>(1, steps / 20);
}

SortConfig ExperimentConfig::sort_config() const {
  SortConfig sc = SortConfig::defaults(parse_sort_method(method), n);
  if (tau) sc.tau = *tau;
  if (beta) sc.beta = *beta;
  return sc;
}

PathMethod ExperimentConfig::path_method() const { return parse_path_method(method); }

void ExperimentConfig::validate() const {
  if (task == Task::rank) {
    if (!is_ranking_method(method))
      throw ConfigError("unknown ranking method '" + method +
                        "' (expected neuralsort, softsort, dsn_logistic or dsn_cauchy)");
    if (n < 2) throw ConfigError("ranking length must be at least 2");
    sort_config().validate();
    if (!(min_gap >= 0.0)) throw ConfigError("min_gap must be nonnegative");
  } else {
    const PathMethod pm = path_method();
    if (pm == PathMethod::ss_algorithm && mode == Mode::nl_hessian)
      throw ConfigError(
          "nl_hessian is not available for ss_algorithm: the Hessian of the loss through a smoothed "
          "algorithm is intractable; use nl_fisher");
    if (grid < 2) throw ConfigError("grid size must be at least 2");
    SmoothingConfig s;
    s.sigma = sigma;
    s.samples = samples;
    s.validate();
  }
  if (mode != Mode::baseline) {
    const double l = resolved_lambda();
    if (!(l > 0.0) || !std::isfinite(l)) throw ConfigError("lambda must be positive and finite");
  }
  if (steps < 0) throw ConfigError("steps must be nonnegative");
  if (batch < 1) throw ConfigError("batch must be at least 1");
  if (train_size < 1 || test_size < 1) throw ConfigError("train and test sizes must be positive");
  if (feature_dim < 1) throw ConfigError("feature_dim must be positive");
  for (Index h : hidden)
    if (h < 1) throw ConfigError("hidden layer sizes must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["task"] = to_string(task);
  j["method"] = method;
  j["mode"] = to_string(mode);
  j["lambda"] = mode == Mode::baseline ? nlohmann::json(nullptr) : nlohmann::json(resolved_lambda());
  j["seed"] = seed;
  j["steps"] = steps;
  j["batch"] = batch;
  if (task == Task::rank) {
    const SortConfig sc = sort_config();
    j["n"] = n;
    j["tau"] = sc.tau;
    j["beta"] = sc.beta;
    j["min_gap"] = min_gap;
  } else {
    j["grid"] = grid;
    j["cost_link"] = nl::to_string(cost_link);
    j["sigma"] = sigma;
    j["samples"] = samples;
    j["variance_reduction"] = variance_reduction;
  }
  j["optimizer"] = nl::to_string(optimizer);
  j["learning_rate"] = learning_rate;
  j["feature_dim"] = feature_dim;
  j["hidden"] = hidden;
  j["train_size"] = train_size;
  j["test_size"] = test_size;
  j["eval_every"] = resolved_eval_every();
  j["inversion"] = nl::to_string(inversion);
  return j;
}

double TrainReport::headline_metric() const {
  const EvalPoint& e = final_eval();
  return config.task == Task::rank ? e.element_rank.value_or(0.0) : e.perfect_match.value_or(0.0);
}

RankingAccuracy ranking_accuracy(const RankingDataset& data, const Matrix& scores) {
  if (scores.rows() != static_cast<Index>(data.records.size()) || scores.cols() != data.n)
    throw ShapeMismatch("ranking_accuracy: scores shape does not match the dataset");
  Index exact = 0;
  Index elements = 0;
  for (Index i = 0; i < scores.rows(); ++i) {
    const auto& truth = data.records[static_cast<std::size_t>(i)].ranking.order();
    const auto predicted = hard_rank(scores.row(i)).order();
    Index hits = 0;
    for (std::size_t r = 0; r < truth.size(); ++r) hits += predicted[r] == truth[r] ? 1 : 0;
    elements += hits;
    exact += hits == data.n ? 1 : 0;
  }
  return {percent(exact, scores.rows()), percent(elements, scores.rows() * data.n)};
}

double perfect_match_rate(const GridDataset& data, const Matrix& costs) {
  const Index cells = data.size * data.size;
  if (costs.rows() != static_cast<Index>(data.records.size()) || costs.cols() != cells)
    throw ShapeMismatch("perfect_match_rate: cost shape does not match the dataset");
  Index hits = 0;
  for (Index i = 0; i < costs.rows(); ++i) {
    const Vector path = shortest_path_indicator(costs.row(i).transpose(), data.size, data.size);
    hits += path == data.records[static_cast<std::size_t>(i)].path.flatten() ? 1 : 0;
  }
  return percent(hits, costs.rows());
}

Matrix step_output_gradient(const Matrix& y, const LossProbe& probe, Mode mode, double lambda, Inversion inversion,
                            const SmoothingConfig& smoothing) {
  switch (mode) {
    case Mode::baseline:
      return probe.gradients(y);
    case Mode::nl_hessian: {
      NewtonConfig nc;
      nc.variant = CurvatureVariant::hessian;
      nc.lambda = lambda;
      nc.hessian_fallback = probe.sample_value ? HessianSource::smoothing : HessianSource::finite_diff;
      nc.smoothing = smoothing;
      return newton_loss_eval(y, newton_target(y, probe, nc)).grad;
    }
    case Mode::nl_fisher: {
      // The injection expects mean-reduced rows and returns mean-reduced
      // rows; convert from and back to the per-sample convention.
      const double count = static_cast<double>(y.rows());
      return count * inject_fisher(probe.gradients(y) / count, lambda, inversion);
    }
  }
  throw ConfigError("unknown training mode");
}

TrainReport run_ranking_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  if (cfg.task != Task::rank) throw ConfigError("run_ranking_experiment needs task=rank");
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  const SortConfig sort_cfg = cfg.sort_config();
  const double lambda = cfg.resolved_lambda();

  const RankingDataset train =
      gen_ranking_data(derive_seed(cfg.seed, {kTrainData}), cfg.n, cfg.train_size, cfg.feature_dim, cfg.min_gap);
  const RankingDataset test =
      gen_ranking_data(derive_seed(cfg.seed, {kTestData}), cfg.n, cfg.test_size, cfg.feature_dim, cfg.min_gap);
  const Matrix test_inputs = all_features(test.records);

  Mlp model = initial_model(cfg, opts);
  OptimizerState opt = cfg.optimizer == OptimizerKind::adam ? OptimizerState::adam(cfg.learning_rate)
                                                            : OptimizerState::sgd(cfg.learning_rate);
  Rng batch_rng = make_rng(cfg.seed, {kBatches});
  const Index every = cfg.resolved_eval_every();

  TrainReport report{cfg, {}, std::nullopt};
  auto evaluate = [&](Index step) {
    const Matrix scores = unstack(forward(model, test_inputs).outputs, cfg.n);
    const RankingAccuracy acc = ranking_accuracy(test, scores);
    report.evals.push_back({step, acc.exact_match, acc.element_rank, std::nullopt});
  };

  evaluate(0);
  for (Index step = 1; step <= cfg.steps; ++step) {
    const auto idx = draw_batch(batch_rng, train.records.size(), cfg.batch);
    std::vector<GroundTruthRanking> truths;
    truths.reserve(idx.size());
    for (std::size_t i : idx) truths.push_back(train.records[i].ranking);

    const ForwardResult fwd = forward(model, stacked_features(train.records, idx));
    const Matrix y = unstack(fwd.outputs, cfg.n);
    const LossProbe probe = make_ranking_probe(std::move(truths), sort_cfg);
    const Matrix g = step_output_gradient(y, probe, cfg.mode, lambda, cfg.inversion, step_smoothing(cfg, step));
    optimizer_step(opt, model, backward(model, fwd.tape, restack_gradient(g)));

    if (is_eval_step(step, every, cfg.steps)) evaluate(step);
  }

  if (opts.final_model) *opts.final_model = model;
  if (opts.timing) report.wall_clock_seconds = elapsed_seconds(started);
  return report;
}

TrainReport run_path_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  if (cfg.task != Task::path) throw ConfigError("run_path_experiment needs task=path");
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  const double lambda = cfg.resolved_lambda();
  const Index cells = cfg.grid * cfg.grid;

  const GridDataset train = gen_grid_data(derive_seed(cfg.seed, {kTrainData}), cfg.grid, cfg.train_size, cfg.feature_dim);
  const GridDataset test = gen_grid_data(derive_seed(cfg.seed, {kTestData}), cfg.grid, cfg.test_size, cfg.feature_dim);
  const Matrix test_inputs = all_features(test.records);

  Mlp model = initial_model(cfg, opts);
  OptimizerState opt = cfg.optimizer == OptimizerKind::adam ? OptimizerState::adam(cfg.learning_rate)
                                                            : OptimizerState::sgd(cfg.learning_rate);
  Rng batch_rng = make_rng(cfg.seed, {kBatches});
  const Index every = cfg.resolved_eval_every();

  TrainReport report{cfg, {}, std::nullopt};
  auto evaluate = [&](Index step) {
    Matrix costs = unstack(forward(model, test_inputs).outputs, cells);
    for (Index i = 0; i < costs.rows(); ++i)
      costs.row(i) = apply_cost_link(costs.row(i).transpose(), cfg.cost_link).transpose();
    report.evals.push_back({step, std::nullopt, std::nullopt, perfect_match_rate(test, costs)});
  };

  PathProbeConfig probe_cfg;
  probe_cfg.method = cfg.path_method();
  probe_cfg.link = cfg.cost_link;
  probe_cfg.height = cfg.grid;
  probe_cfg.width = cfg.grid;

  evaluate(0);
  for (Index step = 1; step <= cfg.steps; ++step) {
    const auto idx = draw_batch(batch_rng, train.records.size(), cfg.batch);
    std::vector<PathMask> truths;
    truths.reserve(idx.size());
    for (std::size_t i : idx) truths.push_back(train.records[i].path);

    const ForwardResult fwd = forward(model, stacked_features(train.records, idx));
    const Matrix y = unstack(fwd.outputs, cells);
    probe_cfg.smoothing = step_smoothing(cfg, step);
    const LossProbe probe = make_path_probe(std::move(truths), probe_cfg);
    const Matrix g = step_output_gradient(y, probe, cfg.mode, lambda, cfg.inversion, probe_cfg.smoothing);
    optimizer_step(opt, model, backward(model, fwd.tape, restack_gradient(g)));

    if (is_eval_step(step, every, cfg.steps)) evaluate(step);
  }

  if (opts.final_model) *opts.final_model = model;
  if (opts.timing) report.wall_clock_seconds = elapsed_seconds(started);
  return report;
}

TrainReport run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  return cfg.task == Task::rank ? run_ranking_experiment(cfg, opts) : run_path_experiment(cfg, opts);
}

std::vector<TrainReport> run_seeds(const ExperimentConfig& base, const std::vector<Mode>& modes, Index seeds) {
  if (seeds < 1) throw ConfigError("need at least one seed");
  if (modes.empty()) throw ConfigError("need at least one mode");
  // Validate every cell before spending time on any run.
  for (Mode m : modes) {
    ExperimentConfig cfg = base;
    cfg.mode = m;
    cfg.validate();
  }
  std::vector<TrainReport> reports;
  for (Mode m : modes) {
    for (Index s = 0; s < seeds; ++s) {
      ExperimentConfig cfg = base;
      cfg.mode = m;
      cfg.seed = base.seed + static_cast<std::uint64_t>(s);
      reports.push_back(run_experiment(cfg));
    }
  }
  return reports;
}

std::vector<TrainReport> ablate_lambda(const ExperimentConfig& base, const std::vector<double>& lambdas, Index seeds) {
  if (lambdas.empty()) throw ConfigError("lambda grid is empty");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0) || !std::isfinite(lambdas[i])) throw ConfigError("lambda values must be positive");
    if (i > 0 && !(lambdas[i] > lambdas[i - 1])) throw ConfigError("lambda values must be ascending");
  }
  std::vector<Mode> curvature_modes;
  for (Mode m : {Mode::nl_hessian, Mode::nl_fisher}) {
    ExperimentConfig probe = base;
    probe.mode = m;
    probe.lambda = lambdas.front();
    try {
      probe.validate();
      curvature_modes.push_back(m);
    } catch (const ConfigError&) {
      if (m == Mode::nl_fisher) throw;
    }
  }

  ExperimentConfig baseline = base;
  baseline.lambda.reset();
  std::vector<TrainReport> reports = run_seeds(baseline, {Mode::baseline}, seeds);
  for (double l : lambdas) {
    ExperimentConfig cfg = base;
    cfg.lambda = l;
    auto runs = run_seeds(cfg, curvature_modes, seeds);
    for (auto& r : runs) reports.push_back(std::move(r));
  }
  return reports;
}

std::vector<SummaryRow> summarize(const std::vector<TrainReport>& reports) {
  std::vector<SummaryRow> rows;
  std::vector<std::vector<double>> values;
  for (const TrainReport& r : reports) {
    const Mode mode = r.config.mode;
    const double lambda = r.config.resolved_lambda();
    std::size_t k = 0;
    while (k < rows.size() && !(rows[k].mode == mode && rows[k].lambda == lambda)) ++k;
    if (k == rows.size()) {
      rows.push_back({mode, lambda, r.config.task == Task::rank ? "element_rank" : "perfect_match", 0, 0.0, 0.0});
      values.emplace_back();
    }
    values[k].push_back(r.headline_metric());
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& v = values[k];
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    rows[k].seeds = static_cast<Index>(v.size());
    rows[k].mean = mean;
    rows[k].std = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  }
  return rows;
}

}  // namespace nl::bench
