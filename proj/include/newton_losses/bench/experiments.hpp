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

// Desk-scale training pipelines for the ranking and shortest-path tasks.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "newton_losses/bench/datasets.hpp"
#include "newton_losses/diffsort.hpp"
#include "newton_losses/net.hpp"
#include "newton_losses/newton.hpp"
#include "newton_losses/probes.hpp"

namespace nl::bench {

enum class Task { rank, path };

/// baseline: train on the loss itself. nl_hessian: regress onto the Hessian
/// Newton target. nl_fisher: inject the empirical-Fisher preconditioner into
/// the backward pass of the original loss.
enum class Mode { baseline, nl_hessian, nl_fisher };

inline constexpr std::array<Mode, 3> kAllModes = {Mode::baseline, Mode::nl_hessian, Mode::nl_fisher};

std::string_view to_string(Task t);
std::string_view to_string(Mode m);
Task parse_task(std::string_view name);
Mode parse_mode(std::string_view name);

struct ExperimentConfig {
  Task task = Task::rank;
  /// Ranking: neuralsort, softsort, dsn_logistic, dsn_cauchy.
  /// Path: ss_loss, ss_algorithm, fy.
  std::string method = "neuralsort";
  Mode mode = Mode::baseline;
  std::optional<double> lambda;  // unset: preset for (task, method, mode, size)
  std::uint64_t seed = 0;
  Index steps = 2000;
  Index batch = 20;  // ranking sets or grids per step
  Index n = 5;       // ranking length
  Index grid = 4;    // grid side length
  CostLink cost_link = CostLink::softplus;  // raw output to cell cost
  std::optional<double> tau;
  std::optional<double> beta;
  double sigma = 0.1;
  Index samples = 10;
  bool variance_reduction = true;
  OptimizerKind optimizer = OptimizerKind::adam;
  double learning_rate = 1e-3;
  Index feature_dim = 8;
  std::vector<Index> hidden = {64, 64};
  Index train_size = 4000;
  Index test_size = 500;
  double min_gap = 0.0;      // ranking data: minimum latent gap inside a set
  Index eval_every = 0;      // 0: every 5% of the steps
  Inversion inversion = Inversion::direct;

  double resolved_lambda() const;
  Index resolved_eval_every() const;
  SortConfig sort_config() const;
  PathMethod path_method() const;

  /// Throws ConfigError, including for mode combinations without a
  /// tractable curvature (nl_hessian with ss_algorithm).
  void validate() const;

  /// Echo with every preset resolved; the config hash is taken over this.
  nlohmann::json to_json() const;
};

/// Preset regularization strength of a (task, method, mode, size) cell.
double default_lambda(Task task, std::string_view method, Mode mode, Index size);

struct EvalPoint {
  Index step = 0;
  std::optional<double> exact_match;    // % of fully correct rankings
  std::optional<double> element_rank;   // % of correctly placed elements
  std::optional<double> perfect_match;  // % of exactly recovered paths
};

struct TrainReport {
  ExperimentConfig config;
  std::vector<EvalPoint> evals;  // ascending steps; the last one is final
  std::optional<double> wall_clock_seconds;

  const EvalPoint& final_eval() const { return evals.back(); }
  /// element_rank for ranking, perfect_match for paths.
  double headline_metric() const;
};

struct RunOptions {
  const Mlp* initial_model = nullptr;  // resume from these weights
  Mlp* final_model = nullptr;          // receives the trained weights
  bool timing = false;                 // record wall-clock seconds
};

struct RankingAccuracy {
  double exact_match = 0.0;
  double element_rank = 0.0;
};

/// Scores are count × n; the predicted ranking of a set is hard_rank of its row.
RankingAccuracy ranking_accuracy(const RankingDataset& data, const Matrix& scores);

/// Costs are count × cells (row-major cells); a prediction counts when its
/// Dijkstra path equals the stored path.
double perfect_match_rate(const GridDataset& data, const Matrix& costs);

/// Output gradient of one training step, per-sample convention (row i is
/// the gradient with respect to y_i, without the batch 1/N).
/// The smoothing config feeds the Hessian estimate of probes that only
/// expose per-sample values.
Matrix step_output_gradient(const Matrix& y, const LossProbe& probe, Mode mode, double lambda,
                            Inversion inversion = Inversion::direct, const SmoothingConfig& smoothing = {});

TrainReport run_ranking_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});
TrainReport run_path_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});
TrainReport run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// Runs `seeds` consecutive seeds starting at base.seed for every mode.
std::vector<TrainReport> run_seeds(const ExperimentConfig& base, const std::vector<Mode>& modes, Index seeds);

/// One baseline run plus one nl_hessian and one nl_fisher run per λ, for
/// every seed. Modes without a tractable curvature are skipped.
std::vector<TrainReport> ablate_lambda(const ExperimentConfig& base, const std::vector<double>& lambdas, Index seeds);

struct SummaryRow {
  Mode mode = Mode::baseline;
  double lambda = 0.0;
  std::string metric;
  Index seeds = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single seed
};

/// Final-metric mean and spread, grouped by (mode, λ) in first-seen order.
std::vector<SummaryRow> summarize(const std::vector<TrainReport>& reports);

}  // namespace nl::bench
