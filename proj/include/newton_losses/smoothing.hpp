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

// Monte-Carlo derivative estimators for black-box functions under Gaussian
// input noise ε ~ N(0, σ²I). For this family ∇ν(ε) = ε/σ² and
// ∇²ν(ε) = I/σ², which gives the score-function estimators
//
//   ∇ E[f(y+ε)]  = E[(f(y+ε) − b) · ε/σ²]
//   ∇² E[f(y+ε)] = E[(f(y+ε) − b) · (εεᵀ/σ⁴ − I/σ²)]
//
// with baseline b = f(y) when variance reduction is on and 0 otherwise.
// Draw s uses its own RNG stream derived from (seed, s), so estimates are
// reproducible bit for bit.

#pragma once

#include <cstdint>
#include <functional>

#include "newton_losses/linalg.hpp"

namespace nl {

struct SmoothingConfig {
  double sigma = 0.1;
  Index samples = 10;
  bool variance_reduction = true;
  std::uint64_t seed = 0;

  void validate() const;
};

using ScalarBlackBox = std::function<double(const Vector&)>;
using VectorBlackBox = std::function<Vector(const Vector&)>;

/// Sample mean and its standard error (entrywise).
template <typename T>
struct Estimate {
  T mean;
  T std_error;
};

/// Noise draws as columns (m × samples), already scaled by σ.
Matrix draw_perturbations(Index dim, const SmoothingConfig& cfg);

Estimate<Vector> smooth_grad_estimate(const ScalarBlackBox& f, const Vector& y, const SmoothingConfig& cfg);
Estimate<Matrix> smooth_hessian_estimate(const ScalarBlackBox& f, const Vector& y, const SmoothingConfig& cfg);
/// Smoothed vector map: E[f(y+ε)] and its Jacobian from the same draws.
struct SmoothedMap {
  Vector value;
  Estimate<Matrix> jacobian;
};
SmoothedMap smooth_map(const VectorBlackBox& f, const Vector& y, const SmoothingConfig& cfg);

/// Row r estimates the gradient of output r; all rows share one set of draws.
Estimate<Matrix> smooth_jacobian_estimate(const VectorBlackBox& f, const Vector& y, const SmoothingConfig& cfg);

inline Vector smooth_grad(const ScalarBlackBox& f, const Vector& y, const SmoothingConfig& cfg) {
  return smooth_grad_estimate(f, y, cfg).mean;
}
inline Matrix smooth_hessian(const ScalarBlackBox& f, const Vector& y, const SmoothingConfig& cfg) {
  return smooth_hessian_estimate(f, y, cfg).mean;
}
inline Matrix smooth_jacobian(const VectorBlackBox& f, const Vector& y, const SmoothingConfig& cfg) {
  return smooth_jacobian_estimate(f, y, cfg).mean;
}

/// Perturbed-optimizer Fenchel-Young gradient E[argmax⟨y+ε, w⟩] − w*. The
/// loss value itself is never needed.
Estimate<Vector> fy_loss_grad_estimate(const Vector& y, const Vector& w_star, const VectorBlackBox& argmax_solver,
                                       const SmoothingConfig& cfg);
inline Vector fy_loss_grad(const Vector& y, const Vector& w_star, const VectorBlackBox& argmax_solver,
                           const SmoothingConfig& cfg) {
  return fy_loss_grad_estimate(y, w_star, argmax_solver, cfg).mean;
}

}  // namespace nl
