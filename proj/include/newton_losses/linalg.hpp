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

// Dense regularized solves shared by the curvature code.
//
// Everything here is templated on the scalar type and operates on plain
// Eigen dynamic matrices; double is the working precision of the library.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "newton_losses/errors.hpp"

namespace nl {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;
using Index = Eigen::Index;

/// Relative pivot threshold below which a factorization is declared singular.
inline constexpr double kSingularPivot = 1e-12;

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (!m.allFinite()) throw NonFiniteResult(std::string(what) + ": non-finite entries");
}

template <typename Derived>
MatrixX<typename Derived::Scalar> symmetrize(const Eigen::MatrixBase<Derived>& m) {
  return (m + m.transpose()) / typename Derived::Scalar(2);
}

/// Factorization of (M + λI) for a symmetrized M, reusable across right-hand
/// sides. One instance is one factorization; do not share a mutable instance
/// between threads.
template <typename Scalar>
class TikhonovSolver {
 public:
  TikhonovSolver(const MatrixX<Scalar>& m, Scalar lambda) {
    if (m.rows() != m.cols()) throw ShapeMismatch("solve_tikhonov: matrix must be square");
    if (!(lambda >= Scalar(0))) throw ConfigError("solve_tikhonov: lambda must be nonnegative");
    require_finite(m, "solve_tikhonov");
    MatrixX<Scalar> a = symmetrize(m);
    a.diagonal().array() += lambda;
    const Scalar scale = a.size() > 0 ? a.cwiseAbs().maxCoeff() : Scalar(0);
    ldlt_.compute(a);
    const Scalar min_pivot =
        a.size() > 0 ? ldlt_.vectorD().cwiseAbs().minCoeff() : Scalar(1);
    if (ldlt_.info() != Eigen::Success || !(scale > Scalar(0)) ||
        !(min_pivot > Scalar(kSingularPivot) * scale)) {
      throw SingularMatrix("regularized system is numerically singular");
    }
  }

  Index dim() const { return ldlt_.rows(); }

  template <typename Rhs>
  MatrixX<Scalar> solve(const Eigen::MatrixBase<Rhs>& rhs) const {
    if (rhs.rows() != dim()) throw ShapeMismatch("solve_tikhonov: right-hand side size mismatch");
    MatrixX<Scalar> x = ldlt_.solve(rhs);
    require_finite(x, "solve_tikhonov");
    return x;
  }

 private:
  Eigen::LDLT<MatrixX<Scalar>> ldlt_;
};

/// Returns (M + λI)⁻¹ g with M symmetrized on entry.
template <typename Scalar>
VectorX<Scalar> solve_tikhonov(const MatrixX<Scalar>& m, Scalar lambda, const VectorX<Scalar>& g) {
  return TikhonovSolver<Scalar>(m, lambda).solve(g);
}

/// Solves ((1/N)·GᵀG + λI) X = B through the N×N inner system
///   (1/λ)B − 1/(Nλ²) · Gᵀ ((1/(Nλ)) G Gᵀ + I_N)⁻¹ G B,
/// which is cheaper than the m×m solve whenever N < m.
template <typename Scalar, typename Rhs>
MatrixX<Scalar> woodbury_solve(const MatrixX<Scalar>& g, Scalar lambda,
                               const Eigen::MatrixBase<Rhs>& rhs) {
  const Index n = g.rows();
  if (n < 1) throw ShapeMismatch("woodbury_solve: need at least one gradient row");
  if (!(lambda > Scalar(0))) throw ConfigError("woodbury_solve: lambda must be positive");
  if (rhs.rows() != g.cols()) throw ShapeMismatch("woodbury_solve: right-hand side size mismatch");
  require_finite(g, "woodbury_solve");

  const Scalar nl = Scalar(n) * lambda;
  MatrixX<Scalar> inner = (g * g.transpose()) / nl;
  inner.diagonal().array() += Scalar(1);
  const MatrixX<Scalar> gb = g * rhs;
  const MatrixX<Scalar> correction = TikhonovSolver<Scalar>(inner, Scalar(0)).solve(gb);
  MatrixX<Scalar> x = rhs / lambda - (g.transpose() * correction) / (nl * lambda);
  require_finite(x, "woodbury_solve");
  return x;
}

template <typename Scalar>
VectorX<Scalar> woodbury_solve(const MatrixX<Scalar>& g, Scalar lambda, const VectorX<Scalar>& rhs) {
  return woodbury_solve<Scalar, VectorX<Scalar>>(g, lambda, rhs);
}

/// Default central-difference step: cbrt(eps)·max(1, ‖y‖∞).
template <typename Scalar>
Scalar default_fd_step(const VectorX<Scalar>& y) {
  const Scalar base = std::cbrt(std::numeric_limits<Scalar>::epsilon());
  const Scalar ymax = y.size() > 0 ? y.cwiseAbs().maxCoeff() : Scalar(0);
  return base * std::max(Scalar(1), ymax);
}

/// Symmetrized Hessian from central differences of a gradient callback.
/// Pass h <= 0 to use default_fd_step.
template <typename Scalar, typename GradFn>
MatrixX<Scalar> finite_diff_hessian(GradFn&& grad, const VectorX<Scalar>& y, Scalar h = Scalar(0)) {
  const Index m = y.size();
  if (!(h > Scalar(0))) h = default_fd_step(y);
  MatrixX<Scalar> hess(m, m);
  VectorX<Scalar> probe = y;
  for (Index k = 0; k < m; ++k) {
    probe(k) = y(k) + h;
    const VectorX<Scalar> up = grad(probe);
    probe(k) = y(k) - h;
    const VectorX<Scalar> down = grad(probe);
    probe(k) = y(k);
    if (up.size() != m || down.size() != m)
      throw ShapeMismatch("finite_diff_hessian: gradient size mismatch");
    if (!up.allFinite() || !down.allFinite())
      throw NonFiniteResult("finite_diff_hessian: gradient probe returned non-finite values");
    hess.col(k) = (up - down) / (Scalar(2) * h);
  }
  return symmetrize(hess);
}

}  // namespace nl
