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

#include "newton_losses/shortest_path.hpp"

#include <array>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

#include "newton_losses/errors.hpp"

namespace nl {

namespace {

// Neighbour offsets in backtrack preference order: up, left, down, right.
constexpr std::array<std::array<int, 2>, 4> kNeighbours{{{-1, 0}, {0, -1}, {1, 0}, {0, 1}}};

Matrix grid_from_flat(const Vector& flat, Index height, Index width) {
  if (flat.size() != height * width) throw ShapeMismatch("grid: flat vector size does not match dimensions");
  Matrix m(height, width);
  for (Index r = 0; r < height; ++r)
    for (Index c = 0; c < width; ++c) m(r, c) = flat(r * width + c);
  return m;
}

}  // namespace

GridInstance::GridInstance(Matrix costs) : costs_(std::move(costs)) {
  if (costs_.size() == 0) throw ShapeMismatch("GridInstance: empty grid");
  if (!costs_.allFinite() || (costs_.array() <= 0.0).any())
    throw ConfigError("GridInstance: costs must be positive and finite");
}

PathMask::PathMask(MaskMatrix mask) : mask_(std::move(mask)) {
  if ((mask_.array() != 0 && mask_.array() != 1).any()) throw ConfigError("PathMask: entries must be 0 or 1");
}

PathMask PathMask::from_flat(const Vector& flat, Index height, Index width) {
  const Matrix m = grid_from_flat(flat, height, width);
  return PathMask((m.array() > 0.5).cast<int>().matrix());
}

Vector PathMask::flatten() const {
  Vector flat(mask_.size());
  for (Index r = 0; r < height(); ++r)
    for (Index c = 0; c < width(); ++c) flat(r * width() + c) = mask_(r, c);
  return flat;
}

bool is_valid_path(const PathMask& mask) {
  const Index h = mask.height();
  const Index w = mask.width();
  if (h < 1 || w < 1) return false;
  if (mask(0, 0) != 1 || mask(h - 1, w - 1) != 1) return false;
  if (h == 1 && w == 1) return true;

  auto degree = [&](Index r, Index c) {
    int d = 0;
    for (const auto& [dr, dc] : kNeighbours) {
      const Index rr = r + dr;
      const Index cc = c + dc;
      if (rr >= 0 && rr < h && cc >= 0 && cc < w && mask(rr, cc) == 1) ++d;
    }
    return d;
  };
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      if (mask(r, c) != 1) continue;
      const bool endpoint = (r == 0 && c == 0) || (r == h - 1 && c == w - 1);
      if (degree(r, c) != (endpoint ? 1 : 2)) return false;
    }
  }
  // Connectivity from the start cell.
  MaskMatrix seen = MaskMatrix::Zero(h, w);
  std::vector<std::array<Index, 2>> stack{{0, 0}};
  seen(0, 0) = 1;
  Index reached = 0;
  while (!stack.empty()) {
    const auto [r, c] = stack.back();
    stack.pop_back();
    ++reached;
    for (const auto& [dr, dc] : kNeighbours) {
      const Index rr = r + dr;
      const Index cc = c + dc;
      if (rr >= 0 && rr < h && cc >= 0 && cc < w && mask(rr, cc) == 1 && seen(rr, cc) == 0) {
        seen(rr, cc) = 1;
        stack.push_back({rr, cc});
      }
    }
  }
  return reached == mask.length();
}

PathMask dijkstra_grid(const GridInstance& inst) {
  const Index h = inst.height();
  const Index w = inst.width();
  const Matrix& cost = inst.costs();
  Matrix dist = Matrix::Constant(h, w, std::numeric_limits<double>::infinity());
  MaskMatrix done = MaskMatrix::Zero(h, w);

  using Entry = std::pair<double, Index>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  dist(0, 0) = cost(0, 0);
  queue.emplace(dist(0, 0), 0);
  while (!queue.empty()) {
    const auto [d, cell] = queue.top();
    queue.pop();
    const Index r = cell / w;
    const Index c = cell % w;
    if (done(r, c)) continue;
    done(r, c) = 1;
    for (const auto& [dr, dc] : kNeighbours) {
      const Index rr = r + dr;
      const Index cc = c + dc;
      if (rr < 0 || rr >= h || cc < 0 || cc >= w || done(rr, cc)) continue;
      const double candidate = d + cost(rr, cc);
      if (candidate < dist(rr, cc)) {
        dist(rr, cc) = candidate;
        queue.emplace(candidate, rr * w + cc);
      }
    }
  }

  MaskMatrix mask = MaskMatrix::Zero(h, w);
  Index r = h - 1;
  Index c = w - 1;
  mask(r, c) = 1;
  while (r != 0 || c != 0) {
    bool moved = false;
    for (const auto& [dr, dc] : kNeighbours) {
      const Index rr = r + dr;
      const Index cc = c + dc;
      if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
      if (dist(rr, cc) + cost(r, c) == dist(r, c)) {
        r = rr;
        c = cc;
        mask(r, c) = 1;
        moved = true;
        break;
      }
    }
    if (!moved) throw SolverFailure("dijkstra_grid: broken predecessor chain");
  }
  return PathMask(std::move(mask));
}

BruteForceResult brute_force_search(const GridInstance& inst, Index max_cells) {
  if (inst.cells() > max_cells) throw TooLarge("brute_force_shortest: grid exceeds the cell limit");
  const Index h = inst.height();
  const Index w = inst.width();
  const Matrix& cost = inst.costs();

  MaskMatrix on_path = MaskMatrix::Zero(h, w);
  MaskMatrix best_mask = MaskMatrix::Zero(h, w);
  double best = std::numeric_limits<double>::infinity();
  Index ties = 0;
  constexpr double kRel = 1e-12;

  std::function<void(Index, Index, double)> visit = [&](Index r, Index c, double acc) {
    if (acc > best * (1.0 + kRel)) return;
    if (r == h - 1 && c == w - 1) {
      if (acc < best * (1.0 - kRel)) {
        best = acc;
        best_mask = on_path;
        ties = 1;
      } else {
        ++ties;
        if (acc < best) {
          best = acc;
          best_mask = on_path;
        }
      }
      return;
    }
    for (const auto& [dr, dc] : kNeighbours) {
      const Index rr = r + dr;
      const Index cc = c + dc;
      if (rr < 0 || rr >= h || cc < 0 || cc >= w || on_path(rr, cc)) continue;
      on_path(rr, cc) = 1;
      visit(rr, cc, acc + cost(rr, cc));
      on_path(rr, cc) = 0;
    }
  };
  on_path(0, 0) = 1;
  visit(0, 0, cost(0, 0));
  return {PathMask(best_mask), best, ties};
}

double path_cost(const GridInstance& inst, const PathMask& mask) {
  if (mask.height() != inst.height() || mask.width() != inst.width())
    throw ShapeMismatch("path_cost: mask and instance dimensions differ");
  return (inst.costs().array() * mask.matrix().cast<double>().array()).sum();
}

Vector as_argmax_scores(const GridInstance& inst) {
  Vector scores(inst.cells());
  for (Index r = 0; r < inst.height(); ++r)
    for (Index c = 0; c < inst.width(); ++c) scores(r * inst.width() + c) = -inst.costs()(r, c);
  return scores;
}

Vector shortest_path_indicator(const Vector& costs, Index height, Index width) {
  if (!costs.allFinite()) throw NonFiniteResult("shortest path: non-finite costs");
  return dijkstra_grid(GridInstance(grid_from_flat(costs, height, width).cwiseMax(kMinCellCost))).flatten();
}

Vector argmax_path(const Vector& scores, Index height, Index width) {
  return shortest_path_indicator(-scores, height, width);
}

nlohmann::json to_json(const GridInstance& inst, const PathMask& mask) {
  std::vector<double> costs;
  std::vector<int> cells;
  for (Index r = 0; r < inst.height(); ++r) {
    for (Index c = 0; c < inst.width(); ++c) {
      costs.push_back(inst.costs()(r, c));
      cells.push_back(mask(r, c));
    }
  }
  return {{"height", inst.height()}, {"width", inst.width()}, {"costs", costs}, {"mask", cells}};
}

std::pair<GridInstance, PathMask> grid_from_json(const nlohmann::json& j) {
  const Index h = j.at("height").get<Index>();
  const Index w = j.at("width").get<Index>();
  const auto costs = j.at("costs").get<std::vector<double>>();
  const auto cells = j.at("mask").get<std::vector<int>>();
  if (static_cast<Index>(costs.size()) != h * w || static_cast<Index>(cells.size()) != h * w)
    throw ShapeMismatch("grid json: array sizes do not match dimensions");
  Matrix cm(h, w);
  MaskMatrix mm(h, w);
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      cm(r, c) = costs[static_cast<std::size_t>(r * w + c)];
      mm(r, c) = cells[static_cast<std::size_t>(r * w + c)];
    }
  }
  return {GridInstance(std::move(cm)), PathMask(std::move(mm))};
}

}  // namespace nl
