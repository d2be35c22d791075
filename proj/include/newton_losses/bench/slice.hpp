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

// One-dimensional gradient slices: sweep one input coordinate of a loss and
// record every gradient component, optionally after Fisher injection.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "newton_losses/linalg.hpp"

namespace nl::bench {

struct SliceConfig {
  /// neuralsort, softsort, dsn_logistic, dsn_cauchy, or the stubs mse and
  /// constant.
  std::string method = "neuralsort";
  Vector base;  // the point being sliced; its size is the input dimension
  Index coord = 0;
  double lo = -10.0;
  double hi = 10.0;
  Index steps = 201;
  std::optional<double> tau;
  std::optional<double> beta;
  /// Ground-truth order for the ranking losses; defaults to hard_rank(base).
  std::optional<std::vector<int>> truth;
  /// Target of the mse stub; defaults to zeros.
  std::optional<Vector> target;
  /// When set, each gradient row g is replaced by inject_fisher(g, λ).
  std::optional<double> inject_lambda;
};

struct SliceTable {
  Vector coord_values;  // steps entries, lo to hi inclusive
  Matrix gradients;     // steps × dim
};

SliceTable gradient_slice(const SliceConfig& cfg);

/// Header "y<coord>\tgrad0\t...\tgrad<dim-1>", one row per sweep point.
std::string slice_tsv(const SliceConfig& cfg, const SliceTable& table);

}  // namespace nl::bench
