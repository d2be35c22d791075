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

// Newton losses: replace a hard-to-optimize loss ℓ on model outputs by the
// quadratic ½‖z* − y‖², where z* is one Tikhonov-damped Newton (or empirical
// Fisher) step on ℓ taken from the current outputs ȳ:
//
//   z*_i = ȳ_i − (C + λI)⁻¹ ∇_{ȳ_i} ℓ,
//   C = (1/N) Σ_j ∇²_{ȳ_j} ℓ          (Hessian variant)
//   C = (1/N) Σ_j ∇_{ȳ_j}ℓ ∇_{ȳ_j}ℓᵀ   (empirical Fisher variant).
//
// Gradient descent on the surrogate then moves every output by exactly one
// damped Newton step of the original loss.
//
// Conventions: a batch Y is N × m (one sample per row). Per-sample gradients
// are ∇ℓ_i without the 1/N of the batch mean; the batch loss is the mean.

#pragma once

#include <functional>
#include <string_view>

#include "newton_losses/linalg.hpp"
#include "newton_losses/net.hpp"
#include "newton_losses/smoothing.hpp"

namespace nl {

/// A loss on model outputs, queried at a batch Y (N × m).
struct LossProbe {
  /// Batch-mean loss. May be empty for losses known only through gradients.
  std::function<double(const Matrix&)> value;
  /// Row i is ∇_{y_i} ℓ_i.
  std::function<Matrix(const Matrix&)> gradients;
  /// Optional (1/N) Σ ∇²_{y_i} ℓ_i, m × m.
  std::function<Matrix(const Matrix&)> hessian;
  /// Optional ℓ_i(y_i) with the rest of the batch fixed; enables the
  /// smoothing-based Hessian estimate.
  std::function<double(Index, const Matrix&, const Vector&)> sample_value;

  bool has_hessian() const { return static_cast<bool>(hessian); }
};

enum class CurvatureVariant { hessian, fisher };
enum class Inversion { direct, woodbury };
enum class HessianSource { analytic, finite_diff, smoothing };

std::string_view to_string(CurvatureVariant v);
std::string_view to_string(Inversion v);
std::string_view to_string(HessianSource v);
Inversion parse_inversion(std::string_view name);
HessianSource parse_hessian_source(std::string_view name);

struct NewtonConfig {
  CurvatureVariant variant = CurvatureVariant::hessian;
  double lambda = 0.1;
  Inversion inversion = Inversion::direct;
  /// Used only when the probe has no Hessian of its own.
  HessianSource hessian_fallback = HessianSource::finite_diff;
  SmoothingConfig smoothing;

  void validate() const;
};

struct NewtonTarget {
  Matrix z_star;  // N × m, a constant: nothing differentiates through it
  CurvatureVariant variant = CurvatureVariant::hessian;
  double lambda = 0.0;
};

/// (1/N) Σ ∇²ℓ_i: the probe's own Hessian if it has one, otherwise the
/// requested fallback (central differences of the per-sample gradients, or a
/// stochastic-smoothing estimate from sample_value).
Matrix batch_hessian(const Matrix& y, const LossProbe& probe, HessianSource fallback = HessianSource::finite_diff,
                     const SmoothingConfig& smoothing = {});

/// (1/N) GᵀG for per-sample gradient rows G.
Matrix empirical_fisher(const Matrix& per_sample_grads);

NewtonTarget newton_target_hessian(const Matrix& y_bar, const LossProbe& probe, double lambda,
                                   HessianSource fallback = HessianSource::finite_diff,
                                   const SmoothingConfig& smoothing = {});
NewtonTarget newton_target_fisher(const Matrix& y_bar, const LossProbe& probe, double lambda,
                                  Inversion inversion = Inversion::direct);
NewtonTarget newton_target(const Matrix& y_bar, const LossProbe& probe, const NewtonConfig& cfg);

struct BatchLossEval {
  double value = 0.0;
  Matrix grad;  // per-sample gradient rows
};

/// value = (1/N)·½‖z* − y‖², grad row i = y_i − z*_i.
BatchLossEval newton_loss_eval(const Matrix& y, const NewtonTarget& target);

/// Backward-pass replacement for a mean-reduced loss: given incoming rows
/// G (per-sample gradients already scaled by 1/N), returns G·(N·GᵀG + λI)⁻¹.
/// The forward pass is the identity.
Matrix inject_fisher(const Matrix& batch_grads, double lambda, Inversion inversion = Inversion::direct);

/// Per-sample MSE probe ℓ_i = ½‖y_i − t_i‖².
LossProbe make_mse_probe(const Matrix& targets);

// Split-step harness -----------------------------------------------------

struct SplitStepReport {
  Vector direct;  // θ after the one-step update
  Vector split;   // θ after the z-step followed by the θ-step
  double max_param_deviation = 0.0;
};

/// Compares θ − η∇_θ ℓ(f(x;θ)) with a unit gradient step on z followed by an
/// η-step on (1/N)·½‖z − f(x;θ)‖².
SplitStepReport split_step_check_gd(const Mlp& model, const Batch& batch, const LossProbe& probe, double eta);

/// One Newton step θ − η(∇²_θ L)⁺∇_θ L on L(θ) = ℓ(f(x;θ)) for a scalar
/// output model; second derivatives in θ by central differences. The
/// pseudo-inverse gives the minimum-norm step, since a single sample leaves
/// the θ-Hessian rank deficient. Throws SingularMatrix if it vanishes.
Vector newton_step_direct(const Mlp& model, const Vector& x, const LossProbe& probe, double eta);
/// Newton step on z (unit rate, exact ℓ'') then an η Newton step on ½(z − f)².
Vector newton_step_split(const Mlp& model, const Vector& x, const LossProbe& probe, double eta);
SplitStepReport split_step_check_newton(const Mlp& model, const Vector& x, const LossProbe& probe, double eta);

}  // namespace nl
