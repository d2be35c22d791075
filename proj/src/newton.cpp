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

#include "newton_losses/newton.hpp"

#include <cmath>
#include <string>

#include "newton_losses/errors.hpp"
#include "newton_losses/rng.hpp"

namespace nl {

namespace {

void check_batch(const Matrix& y, const char* what) {
  if (y.rows() < 1 || y.cols() < 1) throw ShapeMismatch(std::string(what) + ": empty batch");
  require_finite(y, what);
}

Matrix checked_gradients(const LossProbe& probe, const Matrix& y, const char* what) {
  if (!probe.gradients) throw ConfigError(std::string(what) + ": probe has no gradient callback");
  Matrix g = probe.gradients(y);
  if (g.rows() != y.rows() || g.cols() != y.cols())
    throw ShapeMismatch(std::string(what) + ": gradient rows do not match the batch");
  require_finite(g, what);
  return g;
}

}  // namespace

std::string_view to_string(CurvatureVariant v) { return v == CurvatureVariant::hessian ? "hessian" : "fisher"; }
std::string_view to_string(Inversion v) { return v == Inversion::direct ? "direct" : "woodbury"; }
std::string_view to_string(HessianSource v) {
  switch (v) {
    case HessianSource::analytic: return "analytic";
    case HessianSource::finite_diff: return "finite_diff";
    case HessianSource::smoothing: return "smoothing";
  }
  return "analytic";
}

Inversion parse_inversion(std::string_view name) {
  if (name == "direct") return Inversion::direct;
  if (name == "woodbury") return Inversion::woodbury;
  throw ConfigError("unknown inversion '" + std::string(name) + "'");
}

HessianSource parse_hessian_source(std::string_view name) {
  for (const HessianSource s : {HessianSource::analytic, HessianSource::finite_diff, HessianSource::smoothing})
    if (to_string(s) == name) return s;
  throw ConfigError("unknown Hessian source '" + std::string(name) + "'");
}

void NewtonConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("newton: lambda must be finite and nonnegative");
  if (variant == CurvatureVariant::fisher && !(lambda > 0.0))
    throw ConfigError("newton: the Fisher variant needs lambda > 0");
  if (hessian_fallback == HessianSource::smoothing) smoothing.validate();
}

Matrix batch_hessian(const Matrix& y, const LossProbe& probe, HessianSource fallback,
                     const SmoothingConfig& smoothing) {
  check_batch(y, "batch_hessian");
  const Index n = y.rows();
  const Index m = y.cols();
  Matrix hess;
  if (probe.has_hessian()) {
    hess = probe.hessian(y);
  } else if (fallback == HessianSource::finite_diff) {
    if (!probe.gradients) throw MissingHessian("batch_hessian: probe has neither a Hessian nor gradients");
    hess = Matrix::Zero(m, m);
    Matrix probe_y = y;
    for (Index i = 0; i < n; ++i) {
      auto row_grad = [&](const Vector& yi) -> Vector {
        probe_y.row(i) = yi.transpose();
        return probe.gradients(probe_y).row(i).transpose();
      };
      hess += finite_diff_hessian<double>(row_grad, Vector(y.row(i).transpose()));
      probe_y.row(i) = y.row(i);
    }
    hess /= static_cast<double>(n);
  } else if (fallback == HessianSource::smoothing) {
    if (!probe.sample_value) throw MissingHessian("batch_hessian: smoothing needs per-sample loss values");
    hess = Matrix::Zero(m, m);
    for (Index i = 0; i < n; ++i) {
      SmoothingConfig cfg = smoothing;
      cfg.seed = derive_seed(smoothing.seed, {static_cast<std::uint64_t>(i)});
      auto fi = [&](const Vector& yi) { return probe.sample_value(i, y, yi); };
      hess += smooth_hessian(fi, Vector(y.row(i).transpose()), cfg);
    }
    hess /= static_cast<double>(n);
  } else {
    throw MissingHessian("batch_hessian: probe provides no Hessian");
  }
  if (hess.rows() != m || hess.cols() != m) throw ShapeMismatch("batch_hessian: Hessian must be m × m");
  require_finite(hess, "batch_hessian");
  return symmetrize(hess);
}

Matrix empirical_fisher(const Matrix& per_sample_grads) {
  if (per_sample_grads.rows() < 1) throw ShapeMismatch("empirical_fisher: no gradients");
  return (per_sample_grads.transpose() * per_sample_grads) / static_cast<double>(per_sample_grads.rows());
}

NewtonTarget newton_target_hessian(const Matrix& y_bar, const LossProbe& probe, double lambda,
                                   HessianSource fallback, const SmoothingConfig& smoothing) {
  if (!(lambda >= 0.0)) throw ConfigError("newton_target_hessian: lambda must be nonnegative");
  check_batch(y_bar, "newton_target_hessian");
  const Matrix grads = checked_gradients(probe, y_bar, "newton_target_hessian");
  const Matrix hess = batch_hessian(y_bar, probe, fallback, smoothing);
  const TikhonovSolver<double> solver(hess, lambda);
  // Rows are samples; one factorization serves all of them.
  Matrix z = y_bar - solver.solve(grads.transpose()).transpose();
  require_finite(z, "newton_target_hessian");
  return {std::move(z), CurvatureVariant::hessian, lambda};
}

NewtonTarget newton_target_fisher(const Matrix& y_bar, const LossProbe& probe, double lambda, Inversion inversion) {
  if (!(lambda > 0.0)) throw ConfigError("newton_target_fisher: lambda must be positive");
  check_batch(y_bar, "newton_target_fisher");
  const Matrix grads = checked_gradients(probe, y_bar, "newton_target_fisher");
  Matrix step;
  if (inversion == Inversion::woodbury) {
    step = woodbury_solve<double>(grads, lambda, grads.transpose());
  } else {
    step = TikhonovSolver<double>(empirical_fisher(grads), lambda).solve(grads.transpose());
  }
  Matrix z = y_bar - step.transpose();
  require_finite(z, "newton_target_fisher");
  return {std::move(z), CurvatureVariant::fisher, lambda};
}

NewtonTarget newton_target(const Matrix& y_bar, const LossProbe& probe, const NewtonConfig& cfg) {
  cfg.validate();
  if (cfg.variant == CurvatureVariant::fisher) return newton_target_fisher(y_bar, probe, cfg.lambda, cfg.inversion);
  return newton_target_hessian(y_bar, probe, cfg.lambda, cfg.hessian_fallback, cfg.smoothing);
}

BatchLossEval newton_loss_eval(const Matrix& y, const NewtonTarget& target) {
  if (y.rows() != target.z_star.rows() || y.cols() != target.z_star.cols())
    throw ShapeMismatch("newton_loss_eval: output and target shapes differ");
  BatchLossEval out;
  out.grad = y - target.z_star;
  out.value = 0.5 * out.grad.squaredNorm() / static_cast<double>(y.rows());
  return out;
}

Matrix inject_fisher(const Matrix& batch_grads, double lambda, Inversion inversion) {
  if (!(lambda > 0.0)) throw ConfigError("inject_fisher: lambda must be positive");
  check_batch(batch_grads, "inject_fisher");
  const double n = static_cast<double>(batch_grads.rows());
  // (N·GᵀG + λI) is symmetric, so G·A⁻¹ = (A⁻¹Gᵀ)ᵀ.
  Matrix solved;
  if (inversion == Inversion::woodbury) {
    // N·GᵀG = (1/N)·(N·G)ᵀ(N·G).
    solved = woodbury_solve<double>(Matrix(n * batch_grads), lambda, batch_grads.transpose());
  } else {
    Matrix fisher = batch_grads.transpose() * batch_grads * n;
    solved = TikhonovSolver<double>(fisher, lambda).solve(batch_grads.transpose());
  }
  return solved.transpose();
}

LossProbe make_mse_probe(const Matrix& targets) {
  LossProbe probe;
  probe.value = [targets](const Matrix& y) {
    return 0.5 * (y - targets).squaredNorm() / static_cast<double>(y.rows());
  };
  probe.gradients = [targets](const Matrix& y) -> Matrix { return y - targets; };
  probe.hessian = [m = targets.cols()](const Matrix&) -> Matrix { return Matrix::Identity(m, m); };
  probe.sample_value = [targets](Index i, const Matrix&, const Vector& yi) {
    return 0.5 * (yi - targets.row(i).transpose()).squaredNorm();
  };
  return probe;
}

SplitStepReport split_step_check_gd(const Mlp& model, const Batch& batch, const LossProbe& probe, double eta) {
  const ForwardResult fwd = forward(model, batch);
  const Matrix& y = fwd.outputs;
  const Matrix grads = checked_gradients(probe, y, "split_step_check_gd");
  const Vector theta = model.parameters();

  SplitStepReport report;
  report.direct = theta - eta * backward(model, fwd.tape, grads).flatten();

  const Matrix z = y - grads;  // unit gradient step on the loss inputs
  report.split = theta - eta * backward(model, fwd.tape, y - z).flatten();

  report.max_param_deviation = (report.direct - report.split).cwiseAbs().maxCoeff();
  return report;
}

namespace {

// Relative pivot size below which a direction of the parameter Hessian
// counts as flat; well above the central-difference noise floor.
constexpr double kNewtonRankTolerance = 1e-7;

Matrix single_row(const Vector& x) { return x.transpose(); }

// ∇_θ of a scalar-output composition, given dL/df as a function of f.
Vector parameter_gradient(const Mlp& model, const Vector& x, const std::function<double(double)>& output_grad) {
  const ForwardResult fwd = forward(model, single_row(x));
  Matrix g(1, 1);
  g(0, 0) = output_grad(fwd.outputs(0, 0));
  return backward(model, fwd.tape, g).flatten();
}

double scalar_output(const Mlp& model, const Vector& x) { return forward(model, single_row(x)).outputs(0, 0); }

void require_scalar_model(const Mlp& model, const Vector& x) {
  if (model.output_dim() != 1) throw ShapeMismatch("Newton split step: model output must be one-dimensional");
  if (x.size() != model.input_dim()) throw ShapeMismatch("Newton split step: input width mismatch");
}

double probe_grad(const LossProbe& probe, double f) {
  Matrix y(1, 1);
  y(0, 0) = f;
  return checked_gradients(probe, y, "Newton split step")(0, 0);
}

Vector newton_step_in_theta(const Mlp& model, const Vector& x, const std::function<double(double)>& output_grad,
                            double eta) {
  const Vector theta = model.parameters();
  Mlp work = model;
  auto grad_at = [&](const Vector& t) -> Vector {
    work.set_parameters(t);
    return parameter_gradient(work, x, output_grad);
  };
  const Vector g = grad_at(theta);
  const Matrix h = finite_diff_hessian<double>(grad_at, theta);
  // With one sample the θ-Hessian of an Mlp is rank deficient (weight and
  // bias of a unit act through the same pre-activation), so the step is the
  // minimum-norm solution. Both paths share the same null space.
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
  cod.setThreshold(kNewtonRankTolerance);
  cod.compute(h);
  if (cod.rank() == 0) throw SingularMatrix("Newton split step: parameter Hessian vanishes");
  const Vector step = cod.solve(g);
  require_finite(step, "Newton split step");
  return theta - eta * step;
}

}  // namespace

Vector newton_step_direct(const Mlp& model, const Vector& x, const LossProbe& probe, double eta) {
  require_scalar_model(model, x);
  // The split identity assumes ℓ'' ≠ 0 at the current output; reject the
  // degenerate case here as the split path does.
  Matrix y(1, 1);
  y(0, 0) = scalar_output(model, x);
  [[maybe_unused]] const TikhonovSolver<double> curvature(batch_hessian(y, probe), 0.0);
  return newton_step_in_theta(model, x, [&](double f) { return probe_grad(probe, f); }, eta);
}

Vector newton_step_split(const Mlp& model, const Vector& x, const LossProbe& probe, double eta) {
  require_scalar_model(model, x);
  Matrix y(1, 1);
  y(0, 0) = scalar_output(model, x);
  const NewtonTarget target = newton_target_hessian(y, probe, 0.0);
  const double z = target.z_star(0, 0);
  return newton_step_in_theta(model, x, [z](double f) { return f - z; }, eta);
}

SplitStepReport split_step_check_newton(const Mlp& model, const Vector& x, const LossProbe& probe, double eta) {
  SplitStepReport report;
  report.direct = newton_step_direct(model, x, probe, eta);
  report.split = newton_step_split(model, x, probe, eta);
  report.max_param_deviation = (report.direct - report.split).cwiseAbs().maxCoeff();
  return report;
}

}  // namespace nl
