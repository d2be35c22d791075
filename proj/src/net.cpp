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

#include "newton_losses/net.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <random>

#include "newton_losses/errors.hpp"
#include "newton_losses/rng.hpp"

namespace nl {

namespace {

Matrix apply_activation(const Matrix& pre, Activation act) {
  switch (act) {
    case Activation::relu: return pre.cwiseMax(0.0);
    case Activation::tanh: return pre.array().tanh().matrix();
    case Activation::identity: return pre;
  }
  return pre;
}

Matrix activation_derivative(const Matrix& pre, Activation act) {
  switch (act) {
    case Activation::relu: return (pre.array() > 0.0).cast<double>().matrix();
    case Activation::tanh: return (1.0 - pre.array().tanh().square()).matrix();
    case Activation::identity: return Matrix::Ones(pre.rows(), pre.cols());
  }
  return Matrix::Ones(pre.rows(), pre.cols());
}

}  // namespace

std::string_view to_string(Activation act) {
  switch (act) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::identity: return "identity";
  }
  return "identity";
}

Activation parse_activation(std::string_view name) {
  for (const Activation a : {Activation::relu, Activation::tanh, Activation::identity})
    if (to_string(a) == name) return a;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

Mlp::Mlp(const std::vector<Index>& sizes, const std::vector<Activation>& activations, std::uint64_t seed) {
  if (sizes.size() < 2) throw ConfigError("Mlp needs at least an input and an output size");
  if (activations.size() != sizes.size() - 1) throw ConfigError("Mlp needs one activation per layer");
  Rng rng = make_rng(seed, {0x6d6c70});
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const Index fan_in = sizes[l];
    const Index fan_out = sizes[l + 1];
    if (fan_in < 1 || fan_out < 1) throw ConfigError("Mlp layer sizes must be positive");
    const double gain = activations[l] == Activation::relu ? 6.0 : 3.0;
    const double bound = std::sqrt(gain / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    DenseLayer layer{Matrix(fan_out, fan_in), Vector::Zero(fan_out), activations[l]};
    for (Index i = 0; i < fan_out; ++i)
      for (Index j = 0; j < fan_in; ++j) layer.weight(i, j) = dist(rng);
    layers_.push_back(std::move(layer));
  }
}

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) { validate(); }

void Mlp::validate() const {
  if (layers_.empty()) throw ConfigError("Mlp has no layers");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& layer = layers_[l];
    if (layer.bias.size() != layer.weight.rows()) throw ShapeMismatch("Mlp: bias size differs from layer width");
    if (l > 0 && layer.weight.cols() != layers_[l - 1].weight.rows())
      throw ShapeMismatch("Mlp: consecutive layer dimensions differ");
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) throw NonFiniteResult("Mlp: non-finite parameters");
  }
}

Index Mlp::input_dim() const { return layers_.empty() ? 0 : layers_.front().weight.cols(); }
Index Mlp::output_dim() const { return layers_.empty() ? 0 : layers_.back().weight.rows(); }

Index Mlp::num_params() const {
  Index count = 0;
  for (const DenseLayer& layer : layers_) count += layer.weight.size() + layer.bias.size();
  return count;
}

Vector Mlp::parameters() const {
  Vector flat(num_params());
  Index at = 0;
  for (const DenseLayer& layer : layers_) {
    for (Index i = 0; i < layer.weight.rows(); ++i)
      for (Index j = 0; j < layer.weight.cols(); ++j) flat(at++) = layer.weight(i, j);
    flat.segment(at, layer.bias.size()) = layer.bias;
    at += layer.bias.size();
  }
  return flat;
}

void Mlp::set_parameters(const Vector& flat) {
  if (flat.size() != num_params()) throw ShapeMismatch("Mlp::set_parameters: wrong parameter count");
  Index at = 0;
  for (DenseLayer& layer : layers_) {
    for (Index i = 0; i < layer.weight.rows(); ++i)
      for (Index j = 0; j < layer.weight.cols(); ++j) layer.weight(i, j) = flat(at++);
    layer.bias = flat.segment(at, layer.bias.size());
    at += layer.bias.size();
  }
}

Vector ParamGrads::flatten() const {
  Index count = 0;
  for (std::size_t l = 0; l < weight.size(); ++l) count += weight[l].size() + bias[l].size();
  Vector flat(count);
  Index at = 0;
  for (std::size_t l = 0; l < weight.size(); ++l) {
    for (Index i = 0; i < weight[l].rows(); ++i)
      for (Index j = 0; j < weight[l].cols(); ++j) flat(at++) = weight[l](i, j);
    flat.segment(at, bias[l].size()) = bias[l];
    at += bias[l].size();
  }
  return flat;
}

ForwardResult forward(const Mlp& model, const Matrix& inputs) {
  if (inputs.cols() != model.input_dim()) throw ShapeMismatch("forward: input width does not match the model");
  if (inputs.rows() < 1) throw ShapeMismatch("forward: empty batch");
  if (!inputs.allFinite()) throw NonFiniteResult("forward: non-finite inputs");
  ForwardResult result;
  Matrix x = inputs;
  for (const DenseLayer& layer : model.layers()) {
    Matrix pre = x * layer.weight.transpose();
    pre.rowwise() += layer.bias.transpose();
    result.tape.inputs.push_back(std::move(x));
    x = apply_activation(pre, layer.activation);
    result.tape.pre_activations.push_back(std::move(pre));
  }
  require_finite(x, "forward");
  result.outputs = std::move(x);
  return result;
}

ParamGrads backward(const Mlp& model, const ActivationTape& tape, const Matrix& output_grads) {
  const auto& layers = model.layers();
  if (tape.inputs.size() != layers.size() || tape.pre_activations.size() != layers.size())
    throw ShapeMismatch("backward: tape does not match the model");
  const Index rows = tape.inputs.front().rows();
  if (output_grads.rows() != rows || output_grads.cols() != model.output_dim())
    throw ShapeMismatch("backward: output gradient shape mismatch");

  ParamGrads grads;
  grads.weight.resize(layers.size());
  grads.bias.resize(layers.size());
  Matrix upstream = output_grads / static_cast<double>(rows);
  for (std::size_t l = layers.size(); l-- > 0;) {
    const Matrix delta =
        upstream.cwiseProduct(activation_derivative(tape.pre_activations[l], layers[l].activation));
    grads.weight[l] = delta.transpose() * tape.inputs[l];
    grads.bias[l] = delta.colwise().sum().transpose();
    if (l > 0) upstream = delta * layers[l].weight;
  }
  return grads;
}

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::sgd ? "sgd" : "adam";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adam") return OptimizerKind::adam;
  throw ConfigError("unknown optimizer '" + std::string(name) + "' (expected sgd or adam)");
}

void optimizer_step(OptimizerState& state, Mlp& model, const ParamGrads& grads) {
  const Vector g = grads.flatten();
  if (g.size() != model.num_params()) throw ShapeMismatch("optimizer_step: gradient shape mismatch");
  if (!g.allFinite()) throw NonFiniteResult("optimizer_step: non-finite gradient");
  if (!(state.learning_rate > 0.0)) throw ConfigError("optimizer: learning rate must be positive");

  Vector theta = model.parameters();
  ++state.step;
  if (state.kind == OptimizerKind::sgd) {
    theta -= state.learning_rate * g;
  } else {
    if (state.first_moment.size() != g.size()) {
      state.first_moment = Vector::Zero(g.size());
      state.second_moment = Vector::Zero(g.size());
    }
    state.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * g;
    state.second_moment = state.beta2 * state.second_moment + (1.0 - state.beta2) * g.cwiseAbs2();
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);
    theta.array() -= state.learning_rate * (state.first_moment.array() / c1) /
                     ((state.second_moment.array() / c2).sqrt() + state.eps);
  }
  model.set_parameters(theta);
}

std::string save_checkpoint(const Mlp& model) {
  nlohmann::json tensors = nlohmann::json::array();
  const auto& layers = model.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const DenseLayer& layer = layers[l];
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(layer.weight.size()));
    for (Index i = 0; i < layer.weight.rows(); ++i)
      for (Index j = 0; j < layer.weight.cols(); ++j) w.push_back(layer.weight(i, j));
    const std::string prefix = "layers." + std::to_string(l);
    tensors.push_back({{"name", prefix + ".weight"},
                       {"shape", {layer.weight.rows(), layer.weight.cols()}},
                       {"activation", std::string(to_string(layer.activation))},
                       {"data", w}});
    tensors.push_back({{"name", prefix + ".bias"},
                       {"shape", {layer.bias.size()}},
                       {"data", std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size())}});
  }
  const nlohmann::json doc = {{"format", "newton_losses.mlp"}, {"version", 1}, {"tensors", tensors}};
  return doc.dump();
}

Mlp load_checkpoint(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  }
  if (doc.value("format", "") != "newton_losses.mlp" || doc.value("version", 0) != 1)
    throw ConfigError("checkpoint: unsupported format");
  const auto& tensors = doc.at("tensors");
  if (tensors.size() % 2 != 0) throw ConfigError("checkpoint: tensors must come in weight/bias pairs");
  std::vector<DenseLayer> layers;
  for (std::size_t t = 0; t < tensors.size(); t += 2) {
    const auto& w = tensors[t];
    const auto& b = tensors[t + 1];
    const std::string prefix = "layers." + std::to_string(t / 2);
    if (w.at("name") != prefix + ".weight" || b.at("name") != prefix + ".bias")
      throw ConfigError("checkpoint: unexpected tensor name");
    const Index rows = w.at("shape").at(0).get<Index>();
    const Index cols = w.at("shape").at(1).get<Index>();
    const auto wdata = w.at("data").get<std::vector<double>>();
    const auto bdata = b.at("data").get<std::vector<double>>();
    if (static_cast<Index>(wdata.size()) != rows * cols || static_cast<Index>(bdata.size()) != rows)
      throw ConfigError("checkpoint: tensor size does not match its shape");
    DenseLayer layer{Matrix(rows, cols), Vector(rows), parse_activation(w.at("activation").get<std::string>())};
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) layer.weight(i, j) = wdata[static_cast<std::size_t>(i * cols + j)];
    for (Index i = 0; i < rows; ++i) layer.bias(i) = bdata[static_cast<std::size_t>(i)];
    layers.push_back(std::move(layer));
  }
  return Mlp(std::move(layers));
}

}  // namespace nl
