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

#include "newton_losses/probes.hpp"

#include <cmath>
#include <memory>
#include <string>
#include <utility>

#include "newton_losses/errors.hpp"
#include "newton_losses/rng.hpp"

namespace nl {

namespace {

void check_batch(const Matrix& y, std::size_t count, Index width, const char* what) {
  if (y.rows() != static_cast<Index>(count) || y.cols() != width)
    throw ShapeMismatch(std::string(what) + ": batch shape does not match the supervision");
}

SmoothingConfig sample_stream(const SmoothingConfig& base, Index i) {
  SmoothingConfig cfg = base;
  cfg.seed = derive_seed(base.seed, {static_cast<std::uint64_t>(i)});
  return cfg;
}

}  // namespace

LossProbe make_ranking_probe(std::vector<GroundTruthRanking> truths, SortConfig cfg) {
  if (truths.empty()) throw ShapeMismatch("ranking probe: empty batch");
  const Index n = truths.front().n();
  for (const auto& t : truths)
    if (t.n() != n) throw ShapeMismatch("ranking probe: rankings of different lengths");
  cfg.validate();

  auto data = std::make_shared<const std::vector<GroundTruthRanking>>(std::move(truths));
  LossProbe probe;
  probe.value = [data, cfg, n](const Matrix& y) {
    check_batch(y, data->size(), n, "ranking probe");
    double total = 0.0;
    for (Index i = 0; i < y.rows(); ++i)
      total += ranking_loss<double>(y.row(i).transpose(), (*data)[i], cfg).value;
    return total / static_cast<double>(y.rows());
  };
  probe.gradients = [data, cfg, n](const Matrix& y) {
    check_batch(y, data->size(), n, "ranking probe");
    Matrix g(y.rows(), n);
    for (Index i = 0; i < y.rows(); ++i)
      g.row(i) = ranking_loss<double>(y.row(i).transpose(), (*data)[i], cfg).grad.transpose();
    return g;
  };
  probe.hessian = [data, cfg, n](const Matrix& y) {
    check_batch(y, data->size(), n, "ranking probe");
    Matrix h = Matrix::Zero(n, n);
    for (Index i = 0; i < y.rows(); ++i) h += ranking_hessian(y.row(i).transpose(), (*data)[i], cfg);
    return Matrix(h / static_cast<double>(y.rows()));
  };
  probe.sample_value = [data, cfg](Index i, const Matrix&, const Vector& yi) {
    return ranking_loss<double>(yi, (*data)[i], cfg).value;
  };
  return probe;
}

std::string_view to_string(PathMethod m) {
  switch (m) {
    case PathMethod::ss_loss: return "ss_loss";
    case PathMethod::ss_algorithm: return "ss_algorithm";
    case PathMethod::fy: return "fy";
  }
  return "?";
}

PathMethod parse_path_method(std::string_view name) {
  if (name == "ss_loss") return PathMethod::ss_loss;
  if (name == "ss_algorithm") return PathMethod::ss_algorithm;
  if (name == "fy") return PathMethod::fy;
  throw ConfigError("unknown path method '" + std::string(name) + "' (expected ss_loss, ss_algorithm or fy)");
}

std::string_view to_string(CostLink link) { return link == CostLink::identity ? "identity" : "softplus"; }

CostLink parse_cost_link(std::string_view name) {
  if (name == "identity") return CostLink::identity;
  if (name == "softplus") return CostLink::softplus;
  throw ConfigError("unknown cost link '" + std::string(name) + "' (expected identity or softplus)");
}

Vector apply_cost_link(const Vector& outputs, CostLink link) {
  if (link == CostLink::identity) return outputs;
  // log(1 + e^u) = max(u, 0) + log1p(e^{−|u|}) without overflow.
  return outputs.unaryExpr([](double u) { return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u))); });
}

Vector cost_link_slope(const Vector& outputs, CostLink link) {
  if (link == CostLink::identity) return Vector::Ones(outputs.size());
  return outputs.unaryExpr([](double u) {
    return u >= 0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u));
  });
}

Vector cost_link_curvature(const Vector& outputs, CostLink link) {
  if (link == CostLink::identity) return Vector::Zero(outputs.size());
  const Vector s = cost_link_slope(outputs, link);
  const Vector upper = cost_link_slope(-outputs, link);
  return s.cwiseProduct(upper);
}

LossProbe make_path_probe(std::vector<PathMask> truths, const PathProbeConfig& cfg) {
  if (truths.empty()) throw ShapeMismatch("path probe: empty batch");
  cfg.smoothing.validate();
  const Index h = cfg.height;
  const Index w = cfg.width;
  const Index m = h * w;
  auto targets = std::make_shared<Matrix>(truths.size(), m);
  for (std::size_t i = 0; i < truths.size(); ++i) {
    if (truths[i].height() != h || truths[i].width() != w)
      throw ShapeMismatch("path probe: mask size differs from grid size");
    targets->row(static_cast<Index>(i)) = truths[i].flatten().transpose();
  }

  const VectorBlackBox solver = [h, w](const Vector& costs) { return shortest_path_indicator(costs, h, w); };
  const CostLink link = cfg.link;
  // Raw outputs to path indicator; the object smoothed by ss_loss and
  // ss_algorithm.
  const VectorBlackBox linked_solver = [solver, link](const Vector& u) { return solver(apply_cost_link(u, link)); };
  const SmoothingConfig smoothing = cfg.smoothing;
  LossProbe probe;

  auto hamming = [linked_solver, m](const Vector& u, const Vector& target) {
    return (linked_solver(u) - target).cwiseAbs().sum() / static_cast<double>(m);
  };

  switch (cfg.method) {
    case PathMethod::ss_loss: {
      probe.value = [targets, hamming](const Matrix& y) {
        check_batch(y, targets->rows(), targets->cols(), "path probe");
        double total = 0.0;
        for (Index i = 0; i < y.rows(); ++i) total += hamming(y.row(i).transpose(), targets->row(i).transpose());
        return total / static_cast<double>(y.rows());
      };
      probe.gradients = [targets, hamming, smoothing](const Matrix& y) {
        check_batch(y, targets->rows(), targets->cols(), "path probe");
        Matrix g(y.rows(), y.cols());
        for (Index i = 0; i < y.rows(); ++i) {
          const Vector target = targets->row(i).transpose();
          const ScalarBlackBox f = [&](const Vector& c) { return hamming(c, target); };
          g.row(i) = smooth_grad(f, y.row(i).transpose(), sample_stream(smoothing, i)).transpose();
        }
        return g;
      };
      probe.sample_value = [targets, hamming](Index i, const Matrix&, const Vector& yi) {
        return hamming(yi, targets->row(i).transpose());
      };
      break;
    }
    case PathMethod::ss_algorithm: {
      probe.value = [targets, linked_solver](const Matrix& y) {
        check_batch(y, targets->rows(), targets->cols(), "path probe");
        double total = 0.0;
        for (Index i = 0; i < y.rows(); ++i)
          total += (linked_solver(y.row(i).transpose()) - targets->row(i).transpose()).squaredNorm();
        return total / static_cast<double>(y.rows() * y.cols());
      };
      probe.gradients = [targets, linked_solver, smoothing, m](const Matrix& y) {
        check_batch(y, targets->rows(), targets->cols(), "path probe");
        Matrix g(y.rows(), y.cols());
        for (Index i = 0; i < y.rows(); ++i) {
          const SmoothedMap sm = smooth_map(linked_solver, y.row(i).transpose(), sample_stream(smoothing, i));
          const Vector residual = sm.value - targets->row(i).transpose();
          g.row(i) = (2.0 / static_cast<double>(m)) * (sm.jacobian.mean.transpose() * residual).transpose();
        }
        return g;
      };
      break;
    }
    case PathMethod::fy: {
      // In cost space c the perturbed maximizer of ⟨−c, w⟩ is E[sp(c + ε)]
      // for symmetric noise, so ∇_c = w* − E[sp(c + ε)] and ∇²_c is the
      // negated Jacobian of E[sp]. Raw outputs enter through c = link(u):
      //   ∇_u = link'(u) ⊙ ∇_c,  ∇²_u = D ∇²_c D + diag(link''(u) ⊙ ∇_c).
      probe.gradients = [targets, solver, smoothing, link](const Matrix& y) {
        check_batch(y, targets->rows(), targets->cols(), "path probe");
        Matrix g(y.rows(), y.cols());
        for (Index i = 0; i < y.rows(); ++i) {
          const Vector u = y.row(i).transpose();
          const Vector mean_path = smooth_map(solver, apply_cost_link(u, link), sample_stream(smoothing, i)).value;
          g.row(i) = cost_link_slope(u, link).cwiseProduct(targets->row(i).transpose() - mean_path).transpose();
        }
        return g;
      };
      probe.hessian = [targets, solver, smoothing, link](const Matrix& y) {
        check_batch(y, targets->rows(), targets->cols(), "path probe");
        Matrix hess = Matrix::Zero(y.cols(), y.cols());
        for (Index i = 0; i < y.rows(); ++i) {
          const Vector u = y.row(i).transpose();
          const SmoothedMap sm = smooth_map(solver, apply_cost_link(u, link), sample_stream(smoothing, i));
          const Vector slope = cost_link_slope(u, link);
          const Vector cost_grad = targets->row(i).transpose() - sm.value;
          hess -= slope.asDiagonal() * sm.jacobian.mean * slope.asDiagonal();
          hess.diagonal() += cost_link_curvature(u, link).cwiseProduct(cost_grad);
        }
        return symmetrize(Matrix(hess / static_cast<double>(y.rows())));
      };
      break;
    }
  }
  return probe;
}

}  // namespace nl
