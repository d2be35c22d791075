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

// Node-cost grid shortest paths, 4-neighbourhood, top-left to bottom-right.

#pragma once

#include <nlohmann/json.hpp>

#include "newton_losses/linalg.hpp"

namespace nl {

class GridInstance {
 public:
  /// costs is height × width; every cost must be positive and finite.
  explicit GridInstance(Matrix costs);

  Index height() const { return costs_.rows(); }
  Index width() const { return costs_.cols(); }
  Index cells() const { return costs_.size(); }
  const Matrix& costs() const { return costs_; }

 private:
  Matrix costs_;
};

using MaskMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

class PathMask {
 public:
  explicit PathMask(MaskMatrix mask);
  /// Thresholds a row-major flat indicator vector at 0.5.
  static PathMask from_flat(const Vector& flat, Index height, Index width);

  Index height() const { return mask_.rows(); }
  Index width() const { return mask_.cols(); }
  const MaskMatrix& matrix() const { return mask_; }
  int operator()(Index r, Index c) const { return mask_(r, c); }
  Index length() const { return mask_.sum(); }
  /// Row-major 0/1 indicator, the w used in ⟨y, w⟩.
  Vector flatten() const;

  friend bool operator==(const PathMask& a, const PathMask& b) {
    return a.mask_.rows() == b.mask_.rows() && a.mask_.cols() == b.mask_.cols() && a.mask_ == b.mask_;
  }

 private:
  MaskMatrix mask_;
};

/// Simple 4-connected path from (0,0) to (h−1,w−1): both endpoints set, the
/// set cells connected, endpoints of degree 1 and interior cells of degree 2.
bool is_valid_path(const PathMask& mask);

/// Minimum total node cost path (both endpoint costs included). Among equal
/// predecessors the backtrack prefers up, then left, then down, then right.
PathMask dijkstra_grid(const GridInstance& inst);

struct BruteForceResult {
  PathMask mask;
  double cost;
  Index optimal_paths;  // simple paths within 1e-12 relative of the optimum
};

inline constexpr Index kBruteForceMaxCells = 25;

/// Exhaustive DFS over simple paths; throws TooLarge beyond max_cells.
BruteForceResult brute_force_search(const GridInstance& inst, Index max_cells = kBruteForceMaxCells);
inline PathMask brute_force_shortest(const GridInstance& inst, Index max_cells = kBruteForceMaxCells) {
  return brute_force_search(inst, max_cells).mask;
}

double path_cost(const GridInstance& inst, const PathMask& mask);

/// Flattened negated costs: argmax over path indicators of ⟨scores, w⟩ is
/// the Dijkstra minimizer.
Vector as_argmax_scores(const GridInstance& inst);

/// Cost floor applied when a score vector is turned back into a grid.
inline constexpr double kMinCellCost = 1e-6;

/// Maximizer of ⟨scores, w⟩ over valid paths, solved with Dijkstra on
/// costs max(−scores, kMinCellCost). Returns the row-major indicator.
Vector argmax_path(const Vector& scores, Index height, Index width);

/// Dijkstra on costs max(costs, kMinCellCost), as a flat indicator.
Vector shortest_path_indicator(const Vector& costs, Index height, Index width);

nlohmann::json to_json(const GridInstance& inst, const PathMask& mask);
std::pair<GridInstance, PathMask> grid_from_json(const nlohmann::json& j);

}  // namespace nl
