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

#include "newton_losses/bench/slice.hpp"

#include <fmt/format.h>

#include <functional>

#include "newton_losses/bench/report.hpp"
#include "newton_losses/diffsort.hpp"
#include "newton_losses/errors.hpp"
#include "newton_losses/newton.hpp"

namespace nl::bench {

namespace {

using GradientAt = std::function<Vector(const Vector&)>;

GradientAt slice_gradient(const SliceConfig& cfg) {
  const Index dim = cfg.base.size();
  if (cfg.method == "constant") return [dim](const Vector&) { return Vector(Vector::Zero(dim)); };
  if (cfg.method == "mse") {
    const Vector target = cfg.target.value_or(Vector::Zero(dim));
    if (target.size() != dim) throw ConfigError("slice: target size differs from the base point");
    return [target](const Vector& y) { return Vector(y - target); };
  }
  SortConfig sc = SortConfig::defaults(parse_sort_method(cfg.method), dim);
  if (cfg.tau) sc.tau = *cfg.tau;
  if (cfg.beta) sc.beta = *cfg.beta;
  sc.validate();
  GroundTruthRanking truth = cfg.truth ? GroundTruthRanking(*cfg.truth) : hard_rank(cfg.base);
  if (truth.n() != dim) throw ConfigError("slice: ground-truth order length differs from the base point");
  return [sc, truth](const Vector& y) { return ranking_loss<double>(y, truth, sc).grad; };
}

}  // namespace

SliceTable gradient_slice(const SliceConfig& cfg) {
  const Index dim = cfg.base.size();
  if (dim < 1) throw ConfigError("slice: empty base point");
  if (cfg.coord < 0 || cfg.coord >= dim) throw ConfigError("slice: coordinate out of range");
  if (cfg.steps < 2) throw ConfigError("slice: need at least 2 steps");
  if (!(cfg.hi > cfg.lo)) throw ConfigError("slice: range must satisfy lo < hi");
  if (cfg.inject_lambda && !(*cfg.inject_lambda > 0.0)) throw ConfigError("slice: lambda must be positive");
  const GradientAt grad = slice_gradient(cfg);

  SliceTable table{Vector(cfg.steps), Matrix(cfg.steps, dim)};
  Vector y = cfg.base;
  for (Index s = 0; s < cfg.steps; ++s) {
    const double t = static_cast<double>(s) / static_cast<double>(cfg.steps - 1);
    y(cfg.coord) = s + 1 == cfg.steps ? cfg.hi : cfg.lo + t * (cfg.hi - cfg.lo);
    table.coord_values(s) = y(cfg.coord);
    Matrix row = grad(y).transpose();
    if (cfg.inject_lambda) row = inject_fisher(row, *cfg.inject_lambda);
    table.gradients.row(s) = row;
  }
  return table;
}

std::string slice_tsv(const SliceConfig& cfg, const SliceTable& table) {
  std::string out = fmt::format("y{}", cfg.coord);
  for (Index k = 0; k < table.gradients.cols(); ++k) out += fmt::format("\tgrad{}", k);
  out += '\n';
  for (Index s = 0; s < table.gradients.rows(); ++s) {
    out += format_number(table.coord_values(s));
    for (Index k = 0; k < table.gradients.cols(); ++k) out += "\t" + format_number(table.gradients(s, k));
    out += '\n';
  }
  return out;
}

}  // namespace nl::bench
