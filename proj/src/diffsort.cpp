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

#include "newton_losses/diffsort.hpp"

#include <algorithm>

namespace nl {

std::string_view to_string(SortMethod method) {
  switch (method) {
    case SortMethod::neuralsort: return "neuralsort";
    case SortMethod::softsort: return "softsort";
    case SortMethod::dsn_logistic: return "dsn_logistic";
    case SortMethod::dsn_cauchy: return "dsn_cauchy";
  }
  return "unknown";
}

SortMethod parse_sort_method(std::string_view name) {
  for (const SortMethod m : {SortMethod::neuralsort, SortMethod::softsort, SortMethod::dsn_logistic,
                             SortMethod::dsn_cauchy}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown sorting method '" + std::string(name) + "'");
}

SortConfig SortConfig::defaults(SortMethod method, Index n) {
  SortConfig cfg;
  cfg.method = method;
  switch (method) {
    case SortMethod::neuralsort: cfg.tau = 1.0; break;
    case SortMethod::softsort: cfg.tau = 0.1; break;
    case SortMethod::dsn_logistic: cfg.beta = 10.0; break;
    case SortMethod::dsn_cauchy: cfg.beta = n >= 10 ? 100.0 : 10.0; break;
  }
  return cfg;
}

void SortConfig::validate() const {
  const bool dsn = method == SortMethod::dsn_logistic || method == SortMethod::dsn_cauchy;
  if (dsn && !(beta > 0.0)) throw ConfigError("sort config: beta must be positive");
  if (!dsn && !(tau > 0.0)) throw ConfigError("sort config: tau must be positive");
}

GroundTruthRanking::GroundTruthRanking(std::vector<int> order) : order_(std::move(order)) {
  std::vector<bool> seen(order_.size(), false);
  for (const int idx : order_) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= order_.size() || seen[static_cast<std::size_t>(idx)])
      throw ConfigError("ranking is not a permutation");
    seen[static_cast<std::size_t>(idx)] = true;
  }
}

std::vector<int> GroundTruthRanking::ranks() const {
  std::vector<int> r(order_.size());
  for (std::size_t pos = 0; pos < order_.size(); ++pos) r[static_cast<std::size_t>(order_[pos])] = static_cast<int>(pos);
  return r;
}

Matrix GroundTruthRanking::matrix() const {
  Matrix q = Matrix::Zero(n(), n());
  for (std::size_t pos = 0; pos < order_.size(); ++pos) q(static_cast<Index>(pos), order_[pos]) = 1.0;
  return q;
}

Matrix ranking_hessian(const Vector& y, const GroundTruthRanking& truth, const SortConfig& cfg) {
  using D = Dual<double>;
  const Index n = y.size();
  Matrix hess(n, n);
  VectorX<D> yd(n);
  for (Index k = 0; k < n; ++k) {
    for (Index j = 0; j < n; ++j) yd(j) = D(y(j), j == k ? 1.0 : 0.0);
    const LossEval<D> eval = ranking_loss(yd, truth, cfg);
    for (Index j = 0; j < n; ++j) hess(j, k) = eval.grad(j).d;
  }
  require_finite(hess, "ranking_hessian");
  return symmetrize(hess);
}

}  // namespace nl
