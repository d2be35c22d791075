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


#include <doctest.h>

#include <random>

#include "newton_losses/shortest_path.hpp"
#include "oracles.hpp"

using namespace nl;

namespace {

Matrix random_costs(Index h, Index w, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1, 10.0);
  Matrix c(h, w);
  for (Index i = 0; i < c.size(); ++i) c.data()[i] = u(rng);
  return c;
}

MaskMatrix mask_of(std::initializer_list<std::initializer_list<int>> rows) {
  MaskMatrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index r = 0;
  for (const auto& row : rows) {
    Index c = 0;
    for (int v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

}  // namespace

TEST_SUITE("shortest_path") {

TEST_CASE("single cell") {
  const GridInstance one(Matrix::Constant(1, 1, 2.5));
  const PathMask m = dijkstra_grid(one);
  CHECK(m.matrix()(0, 0) == 1);
  CHECK(path_cost(one, m) == 2.5);
  CHECK(brute_force_shortest(one) == m);
}

TEST_CASE("two by two example") {
  const GridInstance grid((Matrix(2, 2) << 1, 10, 1, 1).finished());
  const PathMask down_right(mask_of({{1, 0}, {1, 1}}));
  CHECK(dijkstra_grid(grid) == down_right);
  CHECK(path_cost(grid, down_right) == 3.0);
  CHECK(path_cost(grid, PathMask(mask_of({{1, 1}, {0, 1}}))) == 12.0);
  CHECK(PathMask::from_flat(argmax_path(as_argmax_scores(grid), 2, 2), 2, 2) == down_right);
  CHECK(brute_force_search(grid).cost == 3.0);
}

TEST_CASE("uniform costs") {
  const GridInstance grid(Matrix::Constant(2, 2, 1.0));
  const BruteForceResult bf = brute_force_search(grid);
  CHECK(bf.optimal_paths == 2);
  CHECK(bf.cost == path_cost(grid, dijkstra_grid(grid)));
  const Vector scores = as_argmax_scores(GridInstance(Matrix::Constant(3, 3, 0.7)));
  CHECK((scores.array() == -0.7).all());
  CHECK(PathMask::from_flat(argmax_path(scores, 3, 3), 3, 3).length() == 5);
}

TEST_CASE("tiny costs are summed, not clamped") {
  const GridInstance strip(Matrix::Constant(1, 6, 1e-9));
  CHECK(path_cost(strip, dijkstra_grid(strip)) == doctest::Approx(6e-9).epsilon(1e-12));
}

TEST_CASE("Dijkstra agrees with independent enumeration") {
  std::mt19937_64 rng(201);
  for (const Index size : {3, 4, 5}) {
    for (int t = 0; t < 100; ++t) {
      const Matrix costs = random_costs(size, size, rng);
      const GridInstance grid(costs);
      const PathMask mask = dijkstra_grid(grid);
      const oracle::PathSearch truth = oracle::enumerate_paths(costs);
      CHECK(is_valid_path(mask));
      CHECK(path_cost(grid, mask) == doctest::Approx(truth.best).epsilon(1e-14));
      if (truth.optimal_count == 1) {
        MaskMatrix want = MaskMatrix::Zero(size, size);
        for (int id : truth.best_cells) want(id / size, id % size) = 1;
        CHECK(mask == PathMask(want));
      }
      if (size <= 4) CHECK(brute_force_search(grid).cost == doctest::Approx(truth.best).epsilon(1e-14));
    }
  }
}

TEST_CASE("argmax under scores equals Dijkstra under costs") {
  std::mt19937_64 rng(202);
  for (int t = 0; t < 100; ++t) {
    const GridInstance grid(random_costs(4, 4, rng));
    CHECK(argmax_path(as_argmax_scores(grid), 4, 4) == dijkstra_grid(grid).flatten());
    CHECK(shortest_path_indicator(grid.costs().reshaped<Eigen::RowMajor>(), 4, 4) == dijkstra_grid(grid).flatten());
  }
}

TEST_CASE("path_cost agrees with a naive sum") {
  std::mt19937_64 rng(203);
  for (int t = 0; t < 100; ++t) {
    const Matrix costs = random_costs(4, 5, rng);
    MaskMatrix m(4, 5);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<int>(rng() % 2);
    CHECK(path_cost(GridInstance(costs), PathMask(m)) == doctest::Approx(oracle::masked_sum(costs, m)).epsilon(1e-15));
  }
}

TEST_CASE("cost monotonicity") {
  std::mt19937_64 rng(204);
  for (int t = 0; t < 100; ++t) {
    const Matrix costs = random_costs(4, 4, rng);
    const GridInstance grid(costs);
    const PathMask mask = dijkstra_grid(grid);
    const double best = path_cost(grid, mask);
    const Index cell = static_cast<Index>(rng() % 16);
    Matrix raised = costs;
    raised(cell / 4, cell % 4) += 5.0;
    const GridInstance bumped(raised);
    const double after = path_cost(bumped, dijkstra_grid(bumped));
    if (mask(cell / 4, cell % 4) == 0)
      CHECK(after == doctest::Approx(best).epsilon(1e-14));
    else
      CHECK(after >= best);
  }
}

TEST_CASE("mask validity checks") {
  CHECK(is_valid_path(PathMask(mask_of({{1, 1, 0}, {0, 1, 1}, {0, 0, 1}}))));
  CHECK_FALSE(is_valid_path(PathMask(mask_of({{1, 0}, {0, 1}}))));
  CHECK_FALSE(is_valid_path(PathMask(mask_of({{0, 0}, {1, 1}}))));
  CHECK_FALSE(is_valid_path(PathMask(mask_of({{1, 1}, {1, 1}}))));
}

TEST_CASE("errors") {
  CHECK_THROWS(GridInstance(Matrix::Zero(2, 2)));
  CHECK_THROWS(GridInstance(Matrix(0, 0)));
  CHECK_THROWS_AS(brute_force_search(GridInstance(Matrix::Ones(6, 6))), TooLarge);
}

TEST_CASE("JSON round trip") {
  const GridInstance grid((Matrix(2, 3) << 1, 2, 3, 4, 5, 6).finished());
  const PathMask mask = dijkstra_grid(grid);
  const auto [back, back_mask] = grid_from_json(to_json(grid, mask));
  CHECK(back.costs() == grid.costs());
  CHECK(back_mask == mask);
}

}  // TEST_SUITE
