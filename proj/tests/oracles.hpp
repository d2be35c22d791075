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


// Reference implementations used only by the tests. Nothing here calls into
// the library's numerics, so agreement is an independent check.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Gauss-Jordan elimination with partial pivoting.
inline Mat gauss_jordan_inverse(Mat a) {
  const Eigen::Index n = a.rows();
  Mat inv = Mat::Identity(n, n);
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index pivot = col;
    for (Eigen::Index r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    if (a(pivot, col) == 0.0) throw std::runtime_error("gauss_jordan_inverse: singular");
    a.row(col).swap(a.row(pivot));
    inv.row(col).swap(inv.row(pivot));
    const double d = a(col, col);
    a.row(col) /= d;
    inv.row(col) /= d;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a(r, col);
      if (f == 0.0) continue;
      a.row(r) -= f * a.row(col);
      inv.row(r) -= f * inv.row(col);
    }
  }
  return inv;
}

inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  Vec g(x.size());
  Vec p = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    p(k) = x(k) + h;
    const double up = f(p);
    p(k) = x(k) - h;
    const double down = f(p);
    p(k) = x(k);
    g(k) = (up - down) / (2 * h);
  }
  return g;
}

/// Relative error with an absolute floor on the denominator.
inline double rel_error(const Vec& got, const Vec& want, double floor = 1e-8) {
  return (got - want).cwiseAbs().maxCoeff() / std::max(floor, want.cwiseAbs().maxCoeff());
}

/// Order that sorts y descending with ties broken by lower index, found by
/// scanning every permutation. Only for small n.
inline std::vector<int> enumerate_descending_order(const Vec& y) {
  std::vector<int> perm(static_cast<std::size_t>(y.size()));
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    for (std::size_t r = 0; ok && r + 1 < perm.size(); ++r) {
      const double a = y(perm[r]), b = y(perm[r + 1]);
      if (a < b || (a == b && perm[r] > perm[r + 1])) ok = false;
    }
    if (ok) return perm;
  } while (std::next_permutation(perm.begin(), perm.end()));
  throw std::logic_error("no sorting permutation");
}

struct PathSearch {
  double best = std::numeric_limits<double>::infinity();
  int optimal_count = 0;
  std::vector<int> best_cells;  // row-major indices
};

/// Depth-first enumeration of simple 4-neighbour paths from the top-left to
/// the bottom-right cell of a node-cost grid.
inline PathSearch enumerate_paths(const Mat& costs) {
  const int h = static_cast<int>(costs.rows()), w = static_cast<int>(costs.cols());
  PathSearch out;
  std::vector<char> seen(static_cast<std::size_t>(h * w), 0);
  std::vector<int> trail;
  std::function<void(int, int, double)> walk = [&](int r, int c, double acc) {
    const int id = r * w + c;
    seen[id] = 1;
    trail.push_back(id);
    acc += costs(r, c);
    if (r == h - 1 && c == w - 1) {
      const double tol = 1e-12 * std::max(1.0, std::abs(acc));
      if (out.optimal_count == 0 || acc < out.best - tol) {
        out.best = acc;
        out.optimal_count = 1;
        out.best_cells = trail;
      } else if (std::abs(acc - out.best) <= tol) {
        ++out.optimal_count;
      }
    } else {
      static constexpr int dr[] = {1, -1, 0, 0};
      static constexpr int dc[] = {0, 0, 1, -1};
      for (int k = 0; k < 4; ++k) {
        const int nr = r + dr[k], nc = c + dc[k];
        if (nr < 0 || nc < 0 || nr >= h || nc >= w || seen[nr * w + nc]) continue;
        walk(nr, nc, acc);
      }
    }
    trail.pop_back();
    seen[id] = 0;
  };
  walk(0, 0, 0.0);
  return out;
}

/// Plain double loop over a 0/1 mask.
template <typename MaskT>
double masked_sum(const Mat& costs, const MaskT& mask) {
  double s = 0.0;
  for (Eigen::Index r = 0; r < costs.rows(); ++r)
    for (Eigen::Index c = 0; c < costs.cols(); ++c)
      if (mask(r, c) != 0) s += costs(r, c);
  return s;
}

inline double cosine(const Vec& a, const Vec& b) { return a.dot(b) / (a.norm() * b.norm()); }

}  // namespace oracle
