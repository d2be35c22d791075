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

// Loss probes for the two benchmark tasks.

#pragma once

#include <string_view>
#include <vector>

#include "newton_losses/diffsort.hpp"
#include "newton_losses/newton.hpp"
#include "newton_losses/shortest_path.hpp"
#include "newton_losses/smoothing.hpp"

namespace nl {

/// Ranking supervision over sets: row i of Y holds the n scores of set i and
/// ℓ_i = ranking_loss(y_i, truths[i]). Provides the exact Hessian.
LossProbe make_ranking_probe(std::vector<GroundTruthRanking> truths, SortConfig cfg);

/// How a non-differentiable shortest-path loss gets its derivatives.
enum class PathMethod {
  ss_loss,       // smooth the whole loss ‖sp(y) − w*‖₁ / m
  ss_algorithm,  // smooth sp only, backpropagate ‖E[sp(y+ε)] − w*‖² / m
  fy,            // perturbed optimizer with Fenchel-Young loss
};

std::string_view to_string(PathMethod m);
PathMethod parse_path_method(std::string_view name);

/// Map from raw model outputs u to cell costs.
enum class CostLink {
  identity,  // cost = u, clamped at kMinCellCost by the solver
  softplus,  // cost = log(1 + exp(u)), positive for every u
};

std::string_view to_string(CostLink link);
CostLink parse_cost_link(std::string_view name);

/// Elementwise link, and its first and second derivatives.
Vector apply_cost_link(const Vector& outputs, CostLink link);
Vector cost_link_slope(const Vector& outputs, CostLink link);
Vector cost_link_curvature(const Vector& outputs, CostLink link);

struct PathProbeConfig {
  PathMethod method = PathMethod::ss_loss;
  CostLink link = CostLink::softplus;
  Index height = 4;
  Index width = 4;
  SmoothingConfig smoothing;
};

/// Row i of Y holds raw outputs (row-major cells) of instance i, turned into
/// costs by the link. Sample i draws its noise from the stream
/// derive_seed(smoothing.seed, {i}).
///
/// ss_loss and ss_algorithm smooth the whole map from raw outputs, so the
/// link is part of the black box. fy perturbs the costs, as the perturbed
/// optimizer is defined on a linear objective, and chains through the link.
///
/// ss_loss exposes sample_value so its Hessian comes from smoothing; fy
/// exposes a Hessian built from the smoothed Jacobian of its cost-space
/// gradient; ss_algorithm has no tractable Hessian. fy has no value callback.
LossProbe make_path_probe(std::vector<PathMask> truths, const PathProbeConfig& cfg);

}  // namespace nl
