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

#include "newton_losses/linalg.hpp"
#include "oracles.hpp"

using namespace nl;

namespace {

Matrix random_psd(Index m, std::mt19937_64& rng, double shift = 0.0) {
  std::normal_distribution<double> g;
  Matrix a(m, m);
  for (Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
  Matrix s = a * a.transpose();
  s.diagonal().array() += shift;
  return s;
}

Vector random_vec(Index m, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vector v(m);
  for (Index i = 0; i < m; ++i) v(i) = g(rng);
  return v;
}

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("solve_tikhonov small cases") {
  const Vector g = (Vector(2) << 3, 4).finished();
  CHECK((solve_tikhonov<double>(Matrix::Zero(2, 2), 1.0, g) - g).norm() == doctest::Approx(0.0));
  const Vector g2 = (Vector(2) << 2, 4).finished();
  const Vector x = solve_tikhonov<double>(Matrix::Identity(2, 2), 1.0, g2);
  CHECK(x(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(x(1) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("solve_tikhonov agrees with Gauss-Jordan on random SPD") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    const Matrix m = random_psd(3, rng, 0.5);
    const Vector g = random_vec(3, rng);
    Matrix shifted = m;
    shifted.diagonal().array() += 0.1;
    const Vector want = oracle::gauss_jordan_inverse(shifted) * g;
    CHECK(oracle::rel_error(solve_tikhonov<double>(m, 0.1, g), want) <= 1e-10);
  }
}

TEST_CASE("solve_tikhonov residual bound") {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 100; ++t) {
    const Index m = 1 + static_cast<Index>(rng() % 12);
    const Matrix a = random_psd(m, rng);
    const Vector g = random_vec(m, rng);
    const double lambda = 1e-3 + static_cast<double>(rng() % 1000) / 100.0;
    const Vector x = solve_tikhonov<double>(a, lambda, g);
    Matrix shifted = a;
    shifted.diagonal().array() += lambda;
    CHECK((shifted * x - g).cwiseAbs().maxCoeff() <= 1e-8 * (1.0 + g.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("solve_tikhonov norm is non-increasing in lambda") {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 30; ++t) {
    const Matrix a = random_psd(5, rng);
    const Vector g = random_vec(5, rng);
    double prev = std::numeric_limits<double>::infinity();
    for (double lambda : {1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0}) {
      const double norm = solve_tikhonov<double>(a, lambda, g).norm();
      CHECK(norm <= prev * (1 + 1e-12));
      prev = norm;
    }
  }
}

TEST_CASE("solve_tikhonov errors") {
  const Vector g = Vector::Ones(2);
  CHECK_THROWS_AS(solve_tikhonov<double>(Matrix::Zero(2, 2), 0.0, g), SingularMatrix);
  CHECK_THROWS_AS(solve_tikhonov<double>(Matrix::Zero(2, 3), 1.0, g), ShapeMismatch);
  CHECK_THROWS_AS(solve_tikhonov<double>(Matrix::Zero(2, 2), 1.0, Vector::Ones(3)), ShapeMismatch);
  CHECK_THROWS_AS(solve_tikhonov<double>(Matrix::Zero(2, 2), -1.0, g), ConfigError);
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(solve_tikhonov<double>(bad, 1.0, g), NonFiniteResult);
}

TEST_CASE("woodbury_solve examples") {
  const Matrix g1 = (Matrix(1, 2) << 1, 0).finished();
  const Vector x = woodbury_solve<double>(g1, 1.0, Vector((Vector(2) << 1, 0).finished()));
  CHECK(x(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::abs(x(1)) <= 1e-15);

  // Entries bounded by 0.3 keep ‖(1/N)GᵀG‖ below 1, so the correction to
  // g/λ is under 1e-6 relative.
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> bounded(-0.3, 0.3);
  Matrix g(4, 6);
  for (Index i = 0; i < g.size(); ++i) g.data()[i] = bounded(rng);
  const Vector b = random_vec(6, rng);
  CHECK(oracle::rel_error(woodbury_solve<double>(g, 1e6, b), b / 1e6) <= 1e-6);
}

TEST_CASE("woodbury_solve matches the direct solve") {
  std::mt19937_64 rng(22);
  for (int t = 0; t < 100; ++t) {
    const Index n = 1 + static_cast<Index>(rng() % 16);
    const Index m = 1 + static_cast<Index>(rng() % 32);
    Matrix g(n, m);
    for (Index i = 0; i < g.size(); ++i) g.data()[i] = random_vec(1, rng)(0);
    const Vector b = random_vec(m, rng);
    const double lambda = 0.05 + static_cast<double>(rng() % 100) / 20.0;
    const Matrix fisher = g.transpose() * g / static_cast<double>(n);
    const Vector direct = solve_tikhonov<double>(fisher, lambda, b);
    CHECK(oracle::rel_error(woodbury_solve<double>(g, lambda, b), direct) <= 1e-8);
  }
}

TEST_CASE("woodbury_solve errors") {
  CHECK_THROWS_AS(woodbury_solve<double>(Matrix(0, 2), 1.0, Vector::Ones(2)), ShapeMismatch);
  CHECK_THROWS_AS(woodbury_solve<double>(Matrix::Ones(1, 2), 0.0, Vector::Ones(2)), ConfigError);
  CHECK_THROWS_AS(woodbury_solve<double>(Matrix::Ones(1, 2), 1.0, Vector::Ones(3)), ShapeMismatch);
}

TEST_CASE("finite_diff_hessian examples") {
  auto half_norm = [](const Vector& y) -> Vector { return y; };
  const Matrix h1 = finite_diff_hessian<double>(half_norm, Vector::Zero(2));
  CHECK((h1 - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-9);

  auto product = [](const Vector& y) -> Vector { return (Vector(2) << y(1), y(0)).finished(); };
  const Matrix h2 = finite_diff_hessian<double>(product, Vector::Ones(2));
  CHECK((h2 - (Matrix(2, 2) << 0, 1, 1, 0).finished()).cwiseAbs().maxCoeff() <= 1e-9);

  auto quartic = [](const Vector& y) -> Vector { return 4.0 * y.array().cube().matrix(); };
  const Matrix h3 = finite_diff_hessian<double>(quartic, Vector((Vector(2) << 1, 2).finished()));
  CHECK(h3(0, 0) == doctest::Approx(12).epsilon(1e-4));
  CHECK(h3(1, 1) == doctest::Approx(48).epsilon(1e-4));
  CHECK(std::abs(h3(0, 1)) <= 1e-4);
}

TEST_CASE("finite_diff_hessian is exactly symmetric") {
  std::mt19937_64 rng(31);
  const Matrix a = random_psd(4, rng) + Matrix::Random(4, 4);
  auto grad = [&](const Vector& y) -> Vector { return a * y + y.array().sin().matrix(); };
  const Matrix h = finite_diff_hessian<double>(grad, random_vec(4, rng));
  CHECK(h == h.transpose());
}

}  // TEST_SUITE
