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

#include "newton_losses/net.hpp"
#include "newton_losses/newton.hpp"
#include "newton_losses/probes.hpp"
#include "oracles.hpp"

using namespace nl;

namespace {

Matrix random_inputs(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix x(rows, cols);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
  return x;
}

// ∇θ of probe.value(f(x; θ)) via backward, against central differences on a
// random subset of parameter coordinates.
double pipeline_error(Mlp model, const Matrix& x, const LossProbe& probe, std::uint64_t seed, int coords = 20) {
  const ForwardResult fwd = forward(model, x);
  const Vector analytic = backward(model, fwd.tape, probe.gradients(fwd.outputs)).flatten();
  const Vector theta = model.parameters();
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int c = 0; c < coords; ++c) {
    const Index k = static_cast<Index>(rng() % static_cast<std::uint64_t>(theta.size()));
    const double h = 1e-5;
    Vector p = theta;
    p(k) += h;
    model.set_parameters(p);
    const double up = probe.value(forward(model, x).outputs);
    p(k) -= 2 * h;
    model.set_parameters(p);
    const double down = probe.value(forward(model, x).outputs);
    model.set_parameters(theta);
    const double fd = (up - down) / (2 * h);
    worst = std::max(worst, std::abs(fd - analytic(k)) / std::max(1e-6, std::abs(analytic(k))));
  }
  return worst;
}

}  // namespace

TEST_SUITE("net") {

TEST_CASE("forward examples") {
  DenseLayer id{Matrix::Identity(3, 3), Vector::Zero(3), Activation::identity};
  const Mlp identity_net({id});
  const Matrix x = random_inputs(4, 3, 1);
  CHECK(forward(identity_net, x).outputs == x);

  DenseLayer zero{Matrix::Zero(2, 3), (Vector(2) << 0.5, -1.5).finished(), Activation::relu};
  DenseLayer out{Matrix::Zero(2, 2), (Vector(2) << 7, 8).finished(), Activation::identity};
  const Matrix y = forward(Mlp({zero, out}), x).outputs;
  for (Index i = 0; i < 4; ++i) {
    CHECK(y(i, 0) == 7.0);
    CHECK(y(i, 1) == 8.0);
  }
}

TEST_CASE("shape errors") {
  const Mlp model({3, 4, 2}, {Activation::relu, Activation::identity}, 5);
  CHECK_THROWS_AS(forward(model, Matrix::Zero(2, 5)), ShapeMismatch);
  const ForwardResult fwd = forward(model, Matrix::Zero(2, 3));
  CHECK_THROWS_AS(backward(model, fwd.tape, Matrix::Zero(2, 3)), ShapeMismatch);
  CHECK_THROWS(Mlp({3, 4}, {Activation::relu, Activation::relu}, 1));
}

TEST_CASE("backward examples") {
  const Mlp model({3, 5, 2}, {Activation::tanh, Activation::identity}, 7);
  const Matrix x = random_inputs(6, 3, 2);
  const ForwardResult fwd = forward(model, x);
  const Vector zero = backward(model, fwd.tape, Matrix::Zero(6, 2)).flatten();
  CHECK(zero.cwiseAbs().maxCoeff() == 0.0);

  DenseLayer lin{random_inputs(2, 3, 3), Vector::Zero(2), Activation::identity};
  const Mlp single({lin});
  const Matrix x1 = random_inputs(1, 3, 4);
  const Matrix g = random_inputs(1, 2, 5);
  const ParamGrads pg = backward(single, forward(single, x1).tape, g);
  CHECK((pg.weight[0] - g.transpose() * x1).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((pg.bias[0] - g.row(0).transpose()).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("backward matches finite differences for MSE") {
  for (const Activation act : {Activation::tanh, Activation::relu}) {
    const Mlp model({4, 6, 3}, {act, Activation::identity}, 9);
    const Matrix x = random_inputs(5, 4, 6);
    const LossProbe mse = make_mse_probe(random_inputs(5, 3, 7));
    CHECK(pipeline_error(model, x, mse, 8, 40) <= 1e-5);
  }
}

TEST_CASE("full pipeline gradient for every ranking loss") {
  const Index n = 4;
  std::vector<GroundTruthRanking> truths;
  for (int s = 0; s < 3; ++s) {
    std::vector<int> order = {0, 1, 2, 3};
    std::rotate(order.begin(), order.begin() + s, order.end());
    truths.emplace_back(order);
  }
  const Matrix x = random_inputs(3, 5, 11);
  for (const SortMethod method :
       {SortMethod::neuralsort, SortMethod::softsort, SortMethod::dsn_logistic, SortMethod::dsn_cauchy}) {
    CAPTURE(to_string(method));
    const Mlp model({5, 8, n}, {Activation::tanh, Activation::identity}, 12);
    const LossProbe probe = make_ranking_probe(truths, SortConfig::defaults(method, n));
    CHECK(pipeline_error(model, x, probe, 13) <= 1e-4);
  }
}

TEST_CASE("full pipeline gradient for the path losses") {
  // The path losses are known through estimated gradients only; backward must
  // still be the exact parameter gradient of the linearised objective
  // (1/N) Σ ⟨g_i, f(x_i; θ)⟩.
  std::vector<PathMask> truths;
  MaskMatrix down_right(2, 2);
  down_right << 1, 0, 1, 1;
  truths.emplace_back(down_right);
  truths.emplace_back(down_right);
  const Matrix x = random_inputs(2, 3, 14);
  for (const PathMethod method : {PathMethod::ss_loss, PathMethod::ss_algorithm, PathMethod::fy}) {
    CAPTURE(to_string(method));
    PathProbeConfig cfg;
    cfg.method = method;
    cfg.height = 2;
    cfg.width = 2;
    cfg.smoothing.seed = 3;
    const LossProbe probe = make_path_probe(truths, cfg);
    const Mlp model({3, 6, 4}, {Activation::tanh, Activation::identity}, 15);
    const Matrix g = probe.gradients(forward(model, x).outputs);
    LossProbe linear;
    linear.value = [g](const Matrix& y) { return (g.cwiseProduct(y)).sum() / static_cast<double>(y.rows()); };
    linear.gradients = [g](const Matrix&) { return g; };
    CHECK(pipeline_error(model, x, linear, 16) <= 1e-4);
  }
}

TEST_CASE("initialisation is deterministic") {
  const Mlp a({4, 8, 2}, {Activation::relu, Activation::identity}, 42);
  const Mlp b({4, 8, 2}, {Activation::relu, Activation::identity}, 42);
  const Mlp c({4, 8, 2}, {Activation::relu, Activation::identity}, 43);
  CHECK(a.parameters() == b.parameters());
  CHECK(a.parameters() != c.parameters());
  CHECK(a.num_params() == 4 * 8 + 8 + 8 * 2 + 2);
  CHECK(a.layers()[0].bias.isZero());
}

TEST_CASE("SGD step") {
  DenseLayer one{Matrix::Zero(1, 0), (Vector(1) << 1.0).finished(), Activation::identity};
  Mlp model({one});
  ParamGrads grads;
  grads.weight = {Matrix::Zero(1, 0)};
  grads.bias = {(Vector(1) << 2.0).finished()};
  OptimizerState sgd = OptimizerState::sgd(0.1);
  optimizer_step(sgd, model, grads);
  CHECK(model.parameters()(0) == doctest::Approx(0.8).epsilon(1e-15));

  grads.bias[0].setZero();
  optimizer_step(sgd, model, grads);
  CHECK(model.parameters()(0) == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("Adam first step") {
  const Mlp start({3, 2}, {Activation::identity}, 17);
  ParamGrads grads;
  grads.weight = {random_inputs(2, 3, 18)};
  grads.bias = {Vector::Zero(2)};

  Mlp model = start;
  OptimizerState adam = OptimizerState::adam(0.01);
  optimizer_step(adam, model, grads);
  const Vector g = grads.flatten();
  // m̂ = g, v̂ = g² after bias correction, so the step is −η·g/(|g|+ε).
  const Vector expected =
      start.parameters() - 0.01 * (g.array() / (g.array().abs() + adam.eps)).matrix();
  CHECK((model.parameters() - expected).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(adam.step == 1);

  Mlp still = start;
  OptimizerState fresh = OptimizerState::adam(0.01);
  grads.weight[0].setZero();
  optimizer_step(fresh, still, grads);
  CHECK(still.parameters() == start.parameters());
}

TEST_CASE("forward and backward do not mutate the model") {
  const Mlp model({3, 4, 2}, {Activation::relu, Activation::identity}, 19);
  const Vector before = model.parameters();
  const ForwardResult fwd = forward(model, random_inputs(2, 3, 20));
  backward(model, fwd.tape, random_inputs(2, 2, 21));
  CHECK(model.parameters() == before);
}

TEST_CASE("checkpoint round trip") {
  const Mlp model({3, 5, 2}, {Activation::relu, Activation::tanh}, 22);
  const std::string text = save_checkpoint(model);
  const Mlp back = load_checkpoint(text);
  CHECK(back.parameters() == model.parameters());
  CHECK(back.layers()[1].activation == Activation::tanh);
  CHECK(save_checkpoint(back) == text);
  CHECK_THROWS(load_checkpoint("{\"format\": \"other\"}"));
}

}  // TEST_SUITE
