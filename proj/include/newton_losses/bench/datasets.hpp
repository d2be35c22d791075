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

// Synthetic benchmark data.
//
// Ranking sets: n items with Gaussian features, ordered by a fixed nonlinear
// latent score. Grid instances: per-cell features mapped to positive cell
// costs by a fixed nonlinear cost model, labelled with the Dijkstra path.
// The maps are deterministic (their weights come from a constant seed), so a
// model that recovers them exactly scores 100%.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <nlohmann/json.hpp>

#include "newton_losses/diffsort.hpp"
#include "newton_losses/shortest_path.hpp"

namespace nl::bench {

struct RankingRecord {
  Matrix features;  // n × feature_dim, one item per row
  GroundTruthRanking ranking;
};

struct RankingDataset {
  Index n = 0;
  Index feature_dim = 0;
  std::vector<RankingRecord> records;
};

/// Latent score of one item; larger means ranked earlier.
double ranking_latent(const Vector& features);

/// Sets whose sorted latent scores differ by less than min_gap are redrawn.
RankingDataset gen_ranking_data(std::uint64_t seed, Index n, Index count, Index feature_dim, double min_gap = 0.0);

struct GridRecord {
  Matrix features;  // (height·width) × feature_dim, cells in row-major order
  GridInstance costs;
  PathMask path;
};

struct GridDataset {
  Index size = 0;  // grids are size × size
  Index feature_dim = 0;
  std::vector<GridRecord> records;
};

/// Cost of one cell, always in (0.2, 2.2).
double grid_cell_cost(const Vector& features);

GridDataset gen_grid_data(std::uint64_t seed, Index size, Index count, Index feature_dim);

/// Stacks the feature rows of the chosen records into one input matrix.
Matrix stack_features(const std::vector<const Matrix*>& blocks);

// JSON-lines: one record per line.
nlohmann::json to_json(const RankingRecord& r);
nlohmann::json to_json(const GridRecord& r);
void write_jsonl(std::ostream& out, const RankingDataset& data);
void write_jsonl(std::ostream& out, const GridDataset& data);
RankingDataset read_ranking_jsonl(std::istream& in);
GridDataset read_grid_jsonl(std::istream& in);

}  // namespace nl::bench
