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

#include "newton_losses/smoothing.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "newton_losses/errors.hpp"
#include "newton_losses/rng.hpp"

namespace nl {

namespace {

// Running mean / variance of matrix-valued samples (Welford).
class Accumulator {
 public:
  Accumulator(Index rows, Index cols) : mean_(Matrix::Zero(rows, cols)), m2_(Matrix::Zero(rows, cols)) {}

  void add(const Matrix& x) {
    ++count_;
    const Matrix delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_.array() += delta.array() * (x - mean_).array();
  }

  Estimate<Matrix> finish() const {
    Matrix se(mean_.rows(), mean_.cols());
    if (count_ < 2) {
      se.setConstant(std::numeric_limits<double>::infinity());
    } else {
      const double n = static_cast<double>(count_);
      se = (m2_ / (n - 1.0) / n).cwiseSqrt();
    }
    return {mean_, se};
  }

 private:
  Matrix mean_;
  Matrix m2_;
  std::int64_t count_ = 0;
};

double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw NonFiniteResult(std::string(what) + ": black box returned a non-finite value");
  return v;
}

Vector checked(const Vector& v, Index dim, const char* what) {
  if (v.size() != dim) throw ShapeMismatch(std::string(what) + ": black box output has the wrong size");
  if (!v.allFinite()) throw NonFiniteResult(std::string(what) + ": black box returned non-finite values");
  return v;
}

Estimate<Vector> as_vector(const Estimate<Matrix>& e) { return {e.mean.col(0), e.std_error.col(0)}; }

}  // namespace

void SmoothingConfig::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("smoothing: sigma must be positive");
  if (samples < 1) throw ConfigError("smoothing: need at least one sample");
}

Matrix draw_perturbations(Index dim, const SmoothingConfig& cfg) {
  cfg.validate();
  Matrix eps(dim, cfg.samples);
  for (Index s = 0; s < cfg.samples; ++s) {
    Rng rng = make_rng(cfg.seed, {static_cast<std::uint64_t>(s)});
    std::normal_distribution<double> normal(0.0, cfg.sigma);
    for (Index i = 0; i < dim; ++i) eps(i, s) = normal(rng);
  }
  return eps;
}

Estimate<Vector> smooth_grad_estimate(const ScalarBlackBox& f, const Vector& y, const SmoothingConfig& cfg) {
  const Matrix eps = draw_perturbations(y.size(), cfg);
  const double baseline = cfg.variance_reduction ? checked(f(y), "smooth_grad") : 0.0;
  const double inv_var = 1.0 / (cfg.sigma * cfg.sigma);
  Accumulator acc(y.size(), 1);
  for (Index s = 0; s < cfg.samples; ++s) {
    const double delta = checked(f(y + eps.col(s)), "smooth_grad") - baseline;
    acc.add(delta * inv_var * eps.col(s));
  }
  return as_vector(acc.finish());
}

Estimate<Matrix> smooth_hessian_estimate(const ScalarBlackBox& f, const Vector& y, const SmoothingConfig& cfg) {
  const Index m = y.size();
  const Matrix eps = draw_perturbations(m, cfg);
  const double baseline = cfg.variance_reduction ? checked(f(y), "smooth_hessian") : 0.0;
  const double inv_var = 1.0 / (cfg.sigma * cfg.sigma);
  Accumulator acc(m, m);
  for (Index s = 0; s < cfg.samples; ++s) {
    const double delta = checked(f(y + eps.col(s)), "smooth_hessian") - baseline;
    Matrix weight = (eps.col(s) * eps.col(s).transpose()) * (inv_var * inv_var);
    weight.diagonal().array() -= inv_var;
    acc.add(delta * weight);
  }
  Estimate<Matrix> out = acc.finish();
  out.mean = symmetrize(out.mean);
  return out;
}

SmoothedMap smooth_map(const VectorBlackBox& f, const Vector& y, const SmoothingConfig& cfg) {
  const Index m = y.size();
  const Matrix eps = draw_perturbations(m, cfg);
  const double inv_var = 1.0 / (cfg.sigma * cfg.sigma);
  const Vector center = f(y);
  const Index k = center.size();
  checked(center, k, "smooth_jacobian");
  const Vector baseline = cfg.variance_reduction ? center : Vector::Zero(k);
  Accumulator jac(k, m);
  Vector total = Vector::Zero(k);
  for (Index s = 0; s < cfg.samples; ++s) {
    const Vector out = checked(f(y + eps.col(s)), k, "smooth_jacobian");
    total += out;
    jac.add((out - baseline) * (inv_var * eps.col(s)).transpose());
  }
  return {total / static_cast<double>(cfg.samples), jac.finish()};
}

Estimate<Matrix> smooth_jacobian_estimate(const VectorBlackBox& f, const Vector& y, const SmoothingConfig& cfg) {
  return smooth_map(f, y, cfg).jacobian;
}

Estimate<Vector> fy_loss_grad_estimate(const Vector& y, const Vector& w_star, const VectorBlackBox& argmax_solver,
                                       const SmoothingConfig& cfg) {
  if (w_star.size() != y.size()) throw ShapeMismatch("fy_loss_grad: target size mismatch");
  const Matrix eps = draw_perturbations(y.size(), cfg);
  Accumulator acc(y.size(), 1);
  for (Index s = 0; s < cfg.samples; ++s) {
    acc.add(checked(argmax_solver(y + eps.col(s)), y.size(), "fy_loss_grad") - w_star);
  }
  return as_vector(acc.finish());
}

}  // namespace nl
