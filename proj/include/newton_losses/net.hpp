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

// A small fully-connected network with hand-written backpropagation and the
// two first-order optimizers used by the training loops.

#pragma once

#include <any>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "newton_losses/linalg.hpp"

namespace nl {

enum class Activation { relu, tanh, identity };

std::string_view to_string(Activation act);
Activation parse_activation(std::string_view name);

struct DenseLayer {
  Matrix weight;  // out × in
  Vector bias;    // out
  Activation activation = Activation::identity;
};

class Mlp {
 public:
  Mlp() = default;
  /// sizes = {in, h1, ..., out}; one activation per layer. Weights are drawn
  /// uniformly from ±sqrt(k / fan_in) (k = 6 before ReLU, 3 otherwise),
  /// biases start at zero.
  Mlp(const std::vector<Index>& sizes, const std::vector<Activation>& activations, std::uint64_t seed);
  explicit Mlp(std::vector<DenseLayer> layers);

  Index input_dim() const;
  Index output_dim() const;
  Index num_params() const;
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  /// Parameters in layer order: weight (row-major), then bias.
  Vector parameters() const;
  void set_parameters(const Vector& flat);

 private:
  void validate() const;
  std::vector<DenseLayer> layers_;
};

/// Inputs plus an opaque per-task label payload (rankings, path masks, ...).
struct Batch {
  Matrix inputs;  // N × input_dim
  std::any labels;
};

struct ActivationTape {
  std::vector<Matrix> inputs;           // input to each layer
  std::vector<Matrix> pre_activations;  // x·Wᵀ + b for each layer
};

struct ForwardResult {
  Matrix outputs;  // N × output_dim
  ActivationTape tape;
};

struct ParamGrads {
  std::vector<Matrix> weight;
  std::vector<Vector> bias;

  Vector flatten() const;
};

ForwardResult forward(const Mlp& model, const Matrix& inputs);
inline ForwardResult forward(const Mlp& model, const Batch& batch) { return forward(model, batch.inputs); }

/// Parameter gradient of (1/N)·Σᵢ ⟨output_grads[i], y[i]⟩ with N = rows.
ParamGrads backward(const Mlp& model, const ActivationTape& tape, const Matrix& output_grads);

enum class OptimizerKind { sgd, adam };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  Vector first_moment;
  Vector second_moment;

  static OptimizerState sgd(double lr) { return with(OptimizerKind::sgd, lr); }
  static OptimizerState adam(double lr) { return with(OptimizerKind::adam, lr); }

 private:
  static OptimizerState with(OptimizerKind kind, double lr) {
    OptimizerState s;
    s.kind = kind;
    s.learning_rate = lr;
    return s;
  }
};

/// The only mutating operation: updates the model parameters and the state.
void optimizer_step(OptimizerState& state, Mlp& model, const ParamGrads& grads);

// Checkpoints are JSON documents:
//   {"format": "newton_losses.mlp", "version": 1,
//    "tensors": [{"name": "layers.0.weight", "shape": [out, in],
//                 "activation": "relu", "data": [row-major values]},
//                {"name": "layers.0.bias", "shape": [out], "data": [...]}, ...]}
std::string save_checkpoint(const Mlp& model);
Mlp load_checkpoint(std::string_view json_text);

}  // namespace nl
