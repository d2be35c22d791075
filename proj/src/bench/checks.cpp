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

#include "newton_losses/bench/checks.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "newton_losses/bench/report.hpp"
#include "newton_losses/diffsort.hpp"
#include "newton_losses/net.hpp"
#include "newton_losses/newton.hpp"
#include "newton_losses/probes.hpp"
#include "newton_losses/rng.hpp"
#include "newton_losses/shortest_path.hpp"

namespace nl::bench {

namespace {

constexpr double kGradTolerance = 1e-5;
constexpr double kGdLemmaTolerance = 1e-10;
constexpr double kNewtonLemmaTolerance = 1e-6;

Matrix normal_matrix(Rng& rng, Index rows, Index cols, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = normal(rng);
  return m;
}

CheckResult make(std::string name, double value, double tol) {
  return {std::move(name), value, tol, value <= tol};
}

double relative_error(const Vector& a, const Vector& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-8});
  return (a - b).norm() / scale;
}

}  // namespace

std::vector<CheckResult> check_gradients(std::uint64_t seed, int trials, int n) {
  std::vector<CheckResult> out;
  for (SortMethod method : {SortMethod::neuralsort, SortMethod::softsort, SortMethod::dsn_logistic,
                            SortMethod::dsn_cauchy}) {
    const SortConfig cfg = SortConfig::defaults(method, n);
    Rng rng = make_rng(seed, {static_cast<std::uint64_t>(method)});
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
      const Vector y = normal_matrix(rng, n, 1);
      const Vector perm = normal_matrix(rng, n, 1);
      const GroundTruthRanking truth = hard_rank(perm);
      const Vector analytic = ranking_loss<double>(y, truth, cfg).grad;
      Vector numeric(n);
      const double h = 1e-6;
      Vector probe = y;
      for (int k = 0; k < n; ++k) {
        probe(k) = y(k) + h;
        const double up = ranking_loss<double>(probe, truth, cfg).value;
        probe(k) = y(k) - h;
        const double down = ranking_loss<double>(probe, truth, cfg).value;
        probe(k) = y(k);
        numeric(k) = (up - down) / (2 * h);
      }
      worst = std::max(worst, relative_error(analytic, numeric));
    }
    out.push_back(make(fmt::format("grad_{}", to_string(method)), worst, kGradTolerance));
  }
  return out;
}

std::vector<CheckResult> check_lemmas(std::uint64_t seed) {
  std::vector<CheckResult> out;
  const Index batch = 6;
  const Index in = 4;
  const Index width = 5;

  {
    const Mlp model({in, 8, width}, {Activation::tanh, Activation::identity}, derive_seed(seed, {1}));
    Rng rng = make_rng(seed, {2});
    const Batch b{normal_matrix(rng, batch, in), {}};
    const LossProbe mse = make_mse_probe(normal_matrix(rng, batch, width));
    out.push_back(make("split_gd_mse", split_step_check_gd(model, b, mse, 0.1).max_param_deviation,
                       kGdLemmaTolerance));

    std::vector<GroundTruthRanking> truths;
    for (Index i = 0; i < batch; ++i) truths.push_back(hard_rank(Vector(normal_matrix(rng, width, 1))));
    const LossProbe ranking =
        make_ranking_probe(std::move(truths), SortConfig::defaults(SortMethod::neuralsort, width));
    out.push_back(make("split_gd_neuralsort", split_step_check_gd(model, b, ranking, 0.1).max_param_deviation,
                       kGdLemmaTolerance));
  }
  {
    const Mlp model({2, 1, 1}, {Activation::tanh, Activation::identity}, derive_seed(seed, {3}));
    Rng rng = make_rng(seed, {4});
    const Vector x = normal_matrix(rng, 2, 1);
    const double target = 0.7;
    LossProbe quartic;
    quartic.gradients = [target](const Matrix& y) -> Matrix {
      const Matrix r = y.array() - target;
      return r.array().cube() + r.array();
    };
    quartic.hessian = [target](const Matrix& y) -> Matrix {
      const double r = y(0, 0) - target;
      return Matrix::Constant(1, 1, 3 * r * r + 1);
    };
    out.push_back(make("split_newton_quartic", split_step_check_newton(model, x, quartic, 1.0).max_param_deviation,
                       kNewtonLemmaTolerance));
  }
  return out;
}

std::vector<CheckResult> check_oracles(std::uint64_t seed, int grids_per_size) {
  std::vector<CheckResult> out;
  for (Index size : {3, 4, 5}) {
    Rng rng = make_rng(seed, {static_cast<std::uint64_t>(size)});
    std::uniform_real_distribution<double> cost(0.1, 2.0);
    double worst_cost = 0.0;
    double mask_mismatch = 0.0;
    for (int g = 0; g < grids_per_size; ++g) {
      Matrix c(size, size);
      for (Index r = 0; r < size; ++r)
        for (Index k = 0; k < size; ++k) c(r, k) = cost(rng);
      const GridInstance inst(c);
      const PathMask fast = dijkstra_grid(inst);
      const BruteForceResult slow = brute_force_search(inst);
      const double gap = std::abs(path_cost(inst, fast) - slow.cost) / slow.cost;
      worst_cost = std::max(worst_cost, gap);
      if (slow.optimal_paths == 1 && !(fast == slow.mask)) mask_mismatch += 1.0;
    }
    out.push_back(make(fmt::format("dijkstra_cost_{}x{}", size, size), worst_cost, 1e-12));
    out.push_back(make(fmt::format("dijkstra_mask_{}x{}", size, size), mask_mismatch, 0.0));
  }
  return out;
}

std::string checks_tsv(const std::vector<CheckResult>& results) {
  std::string out = "check\tvalue\ttolerance\tstatus\n";
  for (const auto& r : results)
    out += fmt::format("{}\t{}\t{}\t{}\n", r.name, format_number(r.value), format_number(r.tolerance),
                       r.pass ? "pass" : "fail");
  return out;
}

}  // namespace nl::bench
