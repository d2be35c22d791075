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

// Relaxed permutation matrices for ranking supervision.
//
// All operators sort in descending order. Row i of P is the soft indicator
// of which input element lands at sorted position i, so P·y approximates the
// descending sort of y and a hard permutation Q has Q(i, order[i]) = 1.
//
// The kernels are templated on the scalar type. Running ranking_loss with
// Dual<double> differentiates the hand-written gradient once more, which is
// how ranking_hessian gets exact second derivatives.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "newton_losses/dual.hpp"
#include "newton_losses/errors.hpp"
#include "newton_losses/linalg.hpp"

namespace nl {

enum class SortMethod { neuralsort, softsort, dsn_logistic, dsn_cauchy };

std::string_view to_string(SortMethod method);
SortMethod parse_sort_method(std::string_view name);

struct SortConfig {
  SortMethod method = SortMethod::neuralsort;
  double tau = 1.0;    // neuralsort / softsort temperature
  double beta = 10.0;  // DSN inverse temperature

  /// Temperatures tuned for the baselines: τ=1 NeuralSort, τ=0.1 SoftSort,
  /// β=10 logistic DSN, β=10 (n<10) or 100 (n≥10) Cauchy DSN.
  static SortConfig defaults(SortMethod method, Index n);
  void validate() const;
};

/// n×n relaxed permutation. Rows sum to one; DSN outputs are additionally
/// column-stochastic.
template <typename Scalar>
class PermMatrix {
 public:
  explicit PermMatrix(MatrixX<Scalar> entries) : p_(std::move(entries)) {
    if (p_.rows() != p_.cols()) throw ShapeMismatch("PermMatrix must be square");
  }

  Index n() const { return p_.rows(); }
  const MatrixX<Scalar>& matrix() const { return p_; }
  Scalar operator()(Index i, Index j) const { return p_(i, j); }

  double max_row_defect() const {
    double worst = 0.0;
    for (Index i = 0; i < n(); ++i) {
      double sum = 0.0;
      for (Index j = 0; j < n(); ++j) sum += value_of(p_(i, j));
      worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
  }
  double max_col_defect() const {
    double worst = 0.0;
    for (Index j = 0; j < n(); ++j) {
      double sum = 0.0;
      for (Index i = 0; i < n(); ++i) sum += value_of(p_(i, j));
      worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
  }
  bool entries_in_unit_interval() const {
    for (Index i = 0; i < p_.size(); ++i) {
      const double v = value_of(p_.data()[i]);
      if (!(v >= 0.0 && v <= 1.0)) return false;
    }
    return true;
  }
  bool is_row_stochastic(double tol = 1e-9) const {
    return entries_in_unit_interval() && max_row_defect() <= tol;
  }
  bool is_doubly_stochastic(double tol = 1e-9) const {
    return is_row_stochastic(tol) && max_col_defect() <= tol;
  }

 private:
  MatrixX<Scalar> p_;
};

/// A hard ranking: order[r] is the index of the element with rank r
/// (rank 0 = largest).
class GroundTruthRanking {
 public:
  explicit GroundTruthRanking(std::vector<int> order);

  Index n() const { return static_cast<Index>(order_.size()); }
  const std::vector<int>& order() const { return order_; }
  /// ranks()[j] is the rank of element j.
  std::vector<int> ranks() const;
  /// The 0/1 permutation matrix Q with Q(r, order[r]) = 1.
  Matrix matrix() const;

  friend bool operator==(const GroundTruthRanking&, const GroundTruthRanking&) = default;

 private:
  std::vector<int> order_;
};

/// Descending argsort; ties keep the lower index first.
template <typename Derived>
GroundTruthRanking hard_rank(const Eigen::MatrixBase<Derived>& y) {
  std::vector<int> order(static_cast<std::size_t>(y.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return value_of(y(a)) > value_of(y(b)); });
  return GroundTruthRanking(std::move(order));
}

template <typename Scalar>
struct LossEval {
  Scalar value{};
  VectorX<Scalar> grad;
};

namespace detail {

template <typename Scalar>
Scalar sign_of(const Scalar& x) {
  if (x > Scalar(0)) return Scalar(1);
  if (x < Scalar(0)) return Scalar(-1);
  return Scalar(0);
}

template <typename Scalar>
MatrixX<Scalar> row_softmax(const MatrixX<Scalar>& logits) {
  using std::exp;
  MatrixX<Scalar> p(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    Scalar shift = logits(i, 0);
    for (Index j = 1; j < logits.cols(); ++j)
      if (logits(i, j) > shift) shift = logits(i, j);
    Scalar total(0);
    for (Index j = 0; j < logits.cols(); ++j) {
      p(i, j) = exp(logits(i, j) - shift);
      total += p(i, j);
    }
    for (Index j = 0; j < logits.cols(); ++j) p(i, j) /= total;
  }
  return p;
}

/// Pull-back of dL/dP through a row softmax onto its logits.
template <typename Scalar>
MatrixX<Scalar> row_softmax_vjp(const MatrixX<Scalar>& p, const MatrixX<Scalar>& grad_p) {
  MatrixX<Scalar> grad_logits(p.rows(), p.cols());
  for (Index i = 0; i < p.rows(); ++i) {
    Scalar inner(0);
    for (Index k = 0; k < p.cols(); ++k) inner += grad_p(i, k) * p(i, k);
    for (Index j = 0; j < p.cols(); ++j) grad_logits(i, j) = p(i, j) * (grad_p(i, j) - inner);
  }
  return grad_logits;
}

template <typename Scalar>
void require_finite_perm(const MatrixX<Scalar>& p, const char* what) {
  using std::isfinite;
  for (Index i = 0; i < p.size(); ++i)
    if (!isfinite(p.data()[i])) throw NonFiniteResult(std::string(what) + ": non-finite permutation entry");
}

template <typename Scalar>
void check_input(const VectorX<Scalar>& y, const char* what) {
  using std::isfinite;
  if (y.size() < 1) throw ShapeMismatch(std::string(what) + ": need at least one element");
  for (Index i = 0; i < y.size(); ++i)
    if (!isfinite(y(i))) throw NonFiniteResult(std::string(what) + ": non-finite input");
}

// ---------------------------------------------------------------------------
// SoftSort: P = softmax(−|yᵀ ⊖ sort(y)| / τ), rows are sorted positions.

template <typename Scalar>
std::vector<int> descending_order(const VectorX<Scalar>& y) {
  return hard_rank(y).order();
}

template <typename Scalar>
MatrixX<Scalar> softsort_logits(const VectorX<Scalar>& y, const std::vector<int>& order, double tau) {
  using std::abs;
  const Index n = y.size();
  MatrixX<Scalar> logits(n, n);
  for (Index i = 0; i < n; ++i) {
    const Scalar anchor = y(order[static_cast<std::size_t>(i)]);
    for (Index j = 0; j < n; ++j) logits(i, j) = -abs(y(j) - anchor) / Scalar(tau);
  }
  return logits;
}

template <typename Scalar>
VectorX<Scalar> softsort_vjp(const VectorX<Scalar>& y, double tau, const MatrixX<Scalar>& p,
                             const MatrixX<Scalar>& grad_p) {
  const Index n = y.size();
  const std::vector<int> order = descending_order(y);
  const MatrixX<Scalar> gs = row_softmax_vjp(p, grad_p);
  VectorX<Scalar> gy = VectorX<Scalar>::Zero(n);
  for (Index i = 0; i < n; ++i) {
    const Index anchor = order[static_cast<std::size_t>(i)];
    for (Index j = 0; j < n; ++j) {
      const Scalar dir = sign_of<Scalar>(y(j) - y(anchor)) / Scalar(tau);
      gy(j) -= gs(i, j) * dir;
      gy(anchor) += gs(i, j) * dir;
    }
  }
  return gy;
}

// ---------------------------------------------------------------------------
// NeuralSort: row i = softmax(((n + 1 − 2(i+1))·y − A·𝟙) / τ) with
// A(j, k) = |y_j − y_k|. Row 0 weights y by n−1 and selects the maximum.

template <typename Scalar>
MatrixX<Scalar> neuralsort_logits(const VectorX<Scalar>& y, double tau) {
  using std::abs;
  const Index n = y.size();
  VectorX<Scalar> spread = VectorX<Scalar>::Zero(n);
  for (Index k = 0; k < n; ++k)
    for (Index j = 0; j < n; ++j) spread(k) += abs(y(k) - y(j));
  MatrixX<Scalar> logits(n, n);
  for (Index i = 0; i < n; ++i) {
    const double scale = static_cast<double>(n - 1 - 2 * i);
    for (Index k = 0; k < n; ++k) logits(i, k) = (Scalar(scale) * y(k) - spread(k)) / Scalar(tau);
  }
  return logits;
}

template <typename Scalar>
VectorX<Scalar> neuralsort_vjp(const VectorX<Scalar>& y, double tau, const MatrixX<Scalar>& p,
                               const MatrixX<Scalar>& grad_p) {
  const Index n = y.size();
  const MatrixX<Scalar> gs = row_softmax_vjp(p, grad_p);
  VectorX<Scalar> gy = VectorX<Scalar>::Zero(n);
  VectorX<Scalar> grad_spread = VectorX<Scalar>::Zero(n);
  for (Index i = 0; i < n; ++i) {
    const double scale = static_cast<double>(n - 1 - 2 * i);
    for (Index k = 0; k < n; ++k) {
      gy(k) += gs(i, k) * Scalar(scale / tau);
      grad_spread(k) -= gs(i, k) / Scalar(tau);
    }
  }
  for (Index k = 0; k < n; ++k) {
    for (Index j = 0; j < n; ++j) {
      const Scalar sgn = sign_of<Scalar>(y(k) - y(j));
      gy(k) += grad_spread(k) * sgn;
      gy(j) -= grad_spread(k) * sgn;
    }
  }
  return gy;
}

// ---------------------------------------------------------------------------
// Odd-even transposition network with n layers. Comparator (a, a+1) mixes
// rows with [[1−s, s], [s, 1−s]] where s = CDF(β·(x_{a+1} − x_a)) is the
// probability that the pair is out of descending order.

template <typename Scalar>
Scalar dsn_cdf(const Scalar& t, SortMethod family) {
  using std::atan;
  using std::exp;
  if (family == SortMethod::dsn_cauchy) return Scalar(0.5) + atan(t) / Scalar(M_PI);
  if (t >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-t));
  const Scalar e = exp(t);
  return e / (Scalar(1) + e);
}

template <typename Scalar>
Scalar dsn_pdf(const Scalar& t, const Scalar& cdf, const Scalar& upper_tail, SortMethod family) {
  if (family == SortMethod::dsn_cauchy) return Scalar(1) / (Scalar(M_PI) * (Scalar(1) + t * t));
  return cdf * upper_tail;
}

template <typename Scalar>
struct DsnTrace {
  std::vector<VectorX<Scalar>> values;  // x before each layer
  std::vector<MatrixX<Scalar>> perms;   // P before each layer
  MatrixX<Scalar> p;
};

template <typename Scalar>
DsnTrace<Scalar> dsn_forward(const VectorX<Scalar>& y, double beta, SortMethod family) {
  const Index n = y.size();
  DsnTrace<Scalar> trace;
  VectorX<Scalar> x = y;
  MatrixX<Scalar> p = MatrixX<Scalar>::Identity(n, n);
  for (Index layer = 0; layer < n; ++layer) {
    trace.values.push_back(x);
    trace.perms.push_back(p);
    for (Index a = layer % 2; a + 1 < n; a += 2) {
      const Index b = a + 1;
      const Scalar t = Scalar(beta) * (x(b) - x(a));
      const Scalar s = dsn_cdf<Scalar>(t, family);
      const Scalar keep = dsn_cdf<Scalar>(-t, family);
      const Scalar xa = x(a);
      x(a) = keep * xa + s * x(b);
      x(b) = s * xa + keep * x(b);
      const VectorX<Scalar> pa = p.row(a).transpose();
      p.row(a) = keep * p.row(a) + s * p.row(b);
      p.row(b) = s * pa.transpose() + keep * p.row(b);
    }
  }
  trace.p = std::move(p);
  return trace;
}

template <typename Scalar>
VectorX<Scalar> dsn_vjp(const DsnTrace<Scalar>& trace, double beta, SortMethod family,
                        const MatrixX<Scalar>& grad_p) {
  const Index n = trace.p.rows();
  MatrixX<Scalar> gp = grad_p;
  VectorX<Scalar> gx = VectorX<Scalar>::Zero(n);
  for (Index layer = n - 1; layer >= 0; --layer) {
    const VectorX<Scalar>& x = trace.values[static_cast<std::size_t>(layer)];
    const MatrixX<Scalar>& p = trace.perms[static_cast<std::size_t>(layer)];
    for (Index a = layer % 2; a + 1 < n; a += 2) {
      const Index b = a + 1;
      const Scalar t = Scalar(beta) * (x(b) - x(a));
      const Scalar s = dsn_cdf<Scalar>(t, family);
      const Scalar keep = dsn_cdf<Scalar>(-t, family);
      const Scalar slope = Scalar(beta) * dsn_pdf<Scalar>(t, s, keep, family);

      Scalar grad_s = (gx(a) - gx(b)) * (x(b) - x(a));
      for (Index k = 0; k < n; ++k) grad_s += (gp(a, k) - gp(b, k)) * (p(b, k) - p(a, k));

      for (Index k = 0; k < n; ++k) {
        const Scalar ga = gp(a, k);
        const Scalar gb = gp(b, k);
        gp(a, k) = keep * ga + s * gb;
        gp(b, k) = s * ga + keep * gb;
      }
      const Scalar ga = gx(a);
      const Scalar gb = gx(b);
      gx(a) = keep * ga + s * gb - grad_s * slope;
      gx(b) = s * ga + keep * gb + grad_s * slope;
    }
  }
  return gx;
}

}  // namespace detail

template <typename Scalar>
PermMatrix<Scalar> softsort_perm(const VectorX<Scalar>& y, double tau) {
  if (!(tau > 0.0)) throw ConfigError("softsort: tau must be positive");
  detail::check_input(y, "softsort");
  MatrixX<Scalar> p = detail::row_softmax(detail::softsort_logits(y, detail::descending_order(y), tau));
  detail::require_finite_perm(p, "softsort");
  return PermMatrix<Scalar>(std::move(p));
}

template <typename Scalar>
PermMatrix<Scalar> neuralsort_perm(const VectorX<Scalar>& y, double tau) {
  if (!(tau > 0.0)) throw ConfigError("neuralsort: tau must be positive");
  detail::check_input(y, "neuralsort");
  MatrixX<Scalar> p = detail::row_softmax(detail::neuralsort_logits(y, tau));
  detail::require_finite_perm(p, "neuralsort");
  return PermMatrix<Scalar>(std::move(p));
}

template <typename Scalar>
PermMatrix<Scalar> dsn_perm(const VectorX<Scalar>& y, double beta, SortMethod family) {
  if (!(beta > 0.0)) throw ConfigError("dsn: beta must be positive");
  if (family != SortMethod::dsn_logistic && family != SortMethod::dsn_cauchy)
    throw ConfigError("dsn: family must be logistic or cauchy");
  detail::check_input(y, "dsn");
  MatrixX<Scalar> p = detail::dsn_forward(y, beta, family).p;
  detail::require_finite_perm(p, "dsn");
  return PermMatrix<Scalar>(std::move(p));
}

template <typename Scalar>
PermMatrix<Scalar> relaxed_perm(const VectorX<Scalar>& y, const SortConfig& cfg) {
  switch (cfg.method) {
    case SortMethod::neuralsort: return neuralsort_perm(y, cfg.tau);
    case SortMethod::softsort: return softsort_perm(y, cfg.tau);
    case SortMethod::dsn_logistic:
    case SortMethod::dsn_cauchy: return dsn_perm(y, cfg.beta, cfg.method);
  }
  throw ConfigError("unknown sort method");
}

/// Probability clamp inside the cross-entropy.
inline constexpr double kBceClamp = 1e-12;

template <typename Scalar>
struct BceEval {
  Scalar value{};
  MatrixX<Scalar> grad;  // dvalue/dP
};

/// Mean binary cross-entropy over all n² entries, and its gradient in P.
/// Rows of P must sum to one: the complement 1 − p_ij is evaluated as the
/// sum of the other entries of row i, which stays accurate when p_ij is
/// within rounding of 1. Each log argument is clamped at kBceClamp and a
/// clamped term contributes no gradient.
template <typename Scalar>
BceEval<Scalar> permutation_bce(const MatrixX<Scalar>& p, const Matrix& q) {
  using std::log;
  if (p.rows() != q.rows() || p.cols() != q.cols()) throw ShapeMismatch("permutation_bce: shape mismatch");
  const Index n = p.cols();
  const Scalar count(static_cast<double>(p.size()));
  const Scalar floor(kBceClamp);
  BceEval<Scalar> out;
  out.value = Scalar(0);
  out.grad = MatrixX<Scalar>::Zero(p.rows(), n);
  VectorX<Scalar> complement_weight(n);  // d(−(1−q) log c_ij)/dc_ij per column j
  for (Index i = 0; i < p.rows(); ++i) {
    Scalar weight_total(0);
    for (Index j = 0; j < n; ++j) {
      Scalar complement(0);
      for (Index k = 0; k < n; ++k)
        if (k != j) complement += p(i, k);
      const double target = q(i, j);
      complement_weight(j) = Scalar(0);
      if (target != 0.0) {
        if (p(i, j) > floor) {
          out.value -= Scalar(target) * log(p(i, j));
          out.grad(i, j) -= Scalar(target) / p(i, j);
        } else {
          out.value -= Scalar(target) * log(floor);
        }
      }
      if (target != 1.0) {
        if (complement > floor) {
          out.value -= Scalar(1.0 - target) * log(complement);
          complement_weight(j) = Scalar(1.0 - target) / complement;
          weight_total += complement_weight(j);
        } else {
          out.value -= Scalar(1.0 - target) * log(floor);
        }
      }
    }
    // c_ij depends on every p_ik with k ≠ j.
    for (Index k = 0; k < n; ++k) out.grad(i, k) -= weight_total - complement_weight(k);
  }
  out.value /= count;
  out.grad /= count;
  return out;
}

/// BCE between the relaxed permutation of y and the ground truth, with the
/// analytic gradient in y.
template <typename Scalar>
LossEval<Scalar> ranking_loss(const VectorX<Scalar>& y, const GroundTruthRanking& truth, const SortConfig& cfg) {
  if (y.size() != truth.n()) throw ShapeMismatch("ranking_loss: y and ranking length differ");
  cfg.validate();
  detail::check_input(y, "ranking_loss");
  const Matrix q = truth.matrix();

  MatrixX<Scalar> p;
  detail::DsnTrace<Scalar> trace;
  switch (cfg.method) {
    case SortMethod::neuralsort: p = detail::row_softmax(detail::neuralsort_logits(y, cfg.tau)); break;
    case SortMethod::softsort:
      p = detail::row_softmax(detail::softsort_logits(y, detail::descending_order(y), cfg.tau));
      break;
    case SortMethod::dsn_logistic:
    case SortMethod::dsn_cauchy:
      trace = detail::dsn_forward(y, cfg.beta, cfg.method);
      p = trace.p;
      break;
  }
  detail::require_finite_perm(p, "ranking_loss");

  const BceEval<Scalar> bce = permutation_bce(p, q);
  const MatrixX<Scalar>& grad_p = bce.grad;

  LossEval<Scalar> out;
  out.value = bce.value;
  switch (cfg.method) {
    case SortMethod::neuralsort: out.grad = detail::neuralsort_vjp(y, cfg.tau, p, grad_p); break;
    case SortMethod::softsort: out.grad = detail::softsort_vjp(y, cfg.tau, p, grad_p); break;
    case SortMethod::dsn_logistic:
    case SortMethod::dsn_cauchy: out.grad = detail::dsn_vjp(trace, cfg.beta, cfg.method, grad_p); break;
  }
  return out;
}

/// Exact Hessian of ranking_loss in y (forward-over-reverse), symmetrized.
Matrix ranking_hessian(const Vector& y, const GroundTruthRanking& truth, const SortConfig& cfg);

}  // namespace nl
