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

#include "newton_losses/bench/datasets.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <string>

#include "newton_losses/errors.hpp"
#include "newton_losses/rng.hpp"

namespace nl::bench {

namespace {

// Fixed seeds of the ground-truth maps. Changing them changes every dataset.
constexpr std::uint64_t kRankingModelSeed = 0x52414e4bULL;
constexpr std::uint64_t kGridModelSeed = 0x47524944ULL;
constexpr int kMaxRedraws = 10000;

struct TwoDirections {
  Vector linear;
  Vector bend;
};

TwoDirections model_weights(std::uint64_t seed, Index dim) {
  Rng rng = make_rng(seed, {static_cast<std::uint64_t>(dim)});
  std::normal_distribution<double> normal(0.0, 1.0);
  TwoDirections w{Vector(dim), Vector(dim)};
  for (Index k = 0; k < dim; ++k) w.linear(k) = normal(rng);
  for (Index k = 0; k < dim; ++k) w.bend(k) = normal(rng);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  w.linear *= scale;
  w.bend *= scale;
  return w;
}

double linear_plus_tanh(const TwoDirections& w, const Vector& x) {
  if (x.size() != w.linear.size()) throw ShapeMismatch("feature vector has the wrong dimension");
  return w.linear.dot(x) + 0.5 * std::tanh(2.0 * w.bend.dot(x));
}

Matrix gaussian_features(Rng& rng, Index rows, Index dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(rows, dim);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < dim; ++c) x(r, c) = normal(rng);
  return x;
}

void check_sizes(Index count, Index feature_dim) {
  if (count < 0) throw ConfigError("dataset size must be nonnegative");
  if (feature_dim < 1) throw ConfigError("feature dimension must be at least 1");
}

Matrix features_from_json(const nlohmann::json& rows, Index expected_rows) {
  const auto data = rows.get<std::vector<std::vector<double>>>();
  if (static_cast<Index>(data.size()) != expected_rows || data.empty())
    throw ShapeMismatch("dataset record: feature row count mismatch");
  const Index dim = static_cast<Index>(data.front().size());
  Matrix x(expected_rows, dim);
  for (Index r = 0; r < expected_rows; ++r) {
    if (static_cast<Index>(data[static_cast<std::size_t>(r)].size()) != dim)
      throw ShapeMismatch("dataset record: ragged feature rows");
    for (Index c = 0; c < dim; ++c) x(r, c) = data[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  }
  return x;
}

nlohmann::json features_to_json(const Matrix& x) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index r = 0; r < x.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(x.cols()));
    for (Index c = 0; c < x.cols(); ++c) row[static_cast<std::size_t>(c)] = x(r, c);
    rows.push_back(row);
  }
  return rows;
}

template <typename Fn>
void for_each_line(std::istream& in, Fn&& fn) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    fn(nlohmann::json::parse(line));
  }
}

}  // namespace

double ranking_latent(const Vector& features) {
  return linear_plus_tanh(model_weights(kRankingModelSeed, features.size()), features);
}

RankingDataset gen_ranking_data(std::uint64_t seed, Index n, Index count, Index feature_dim, double min_gap) {
  check_sizes(count, feature_dim);
  if (n < 2) throw ConfigError("ranking sets need at least 2 items");
  if (!(min_gap >= 0.0)) throw ConfigError("min_gap must be nonnegative");
  const TwoDirections w = model_weights(kRankingModelSeed, feature_dim);

  RankingDataset data{n, feature_dim, {}};
  data.records.reserve(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) {
    Rng rng = make_rng(seed, {static_cast<std::uint64_t>(i)});
    for (int attempt = 0;; ++attempt) {
      if (attempt == kMaxRedraws) throw ConfigError("min_gap too large: could not draw a separated set");
      Matrix x = gaussian_features(rng, n, feature_dim);
      Vector latent(n);
      for (Index j = 0; j < n; ++j) latent(j) = linear_plus_tanh(w, x.row(j).transpose());
      GroundTruthRanking ranking = hard_rank(latent);
      bool separated = true;
      for (Index r = 0; r + 1 < n && separated; ++r)
        separated = latent(ranking.order()[r]) - latent(ranking.order()[r + 1]) >= min_gap;
      if (!separated) continue;
      data.records.push_back({std::move(x), std::move(ranking)});
      break;
    }
  }
  return data;
}

double grid_cell_cost(const Vector& features) {
  const double z = linear_plus_tanh(model_weights(kGridModelSeed, features.size()), features);
  return 0.2 + 2.0 / (1.0 + std::exp(-z));
}

GridDataset gen_grid_data(std::uint64_t seed, Index size, Index count, Index feature_dim) {
  check_sizes(count, feature_dim);
  if (size < 2) throw ConfigError("grids must be at least 2x2");
  const TwoDirections w = model_weights(kGridModelSeed, feature_dim);

  GridDataset data{size, feature_dim, {}};
  data.records.reserve(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) {
    Rng rng = make_rng(seed, {static_cast<std::uint64_t>(i)});
    Matrix x = gaussian_features(rng, size * size, feature_dim);
    Matrix costs(size, size);
    for (Index cell = 0; cell < size * size; ++cell)
      costs(cell / size, cell % size) = 0.2 + 2.0 / (1.0 + std::exp(-linear_plus_tanh(w, x.row(cell).transpose())));
    GridInstance inst(std::move(costs));
    PathMask path = dijkstra_grid(inst);
    data.records.push_back({std::move(x), std::move(inst), std::move(path)});
  }
  return data;
}

Matrix stack_features(const std::vector<const Matrix*>& blocks) {
  if (blocks.empty()) throw ShapeMismatch("stack_features: nothing to stack");
  Index rows = 0;
  const Index dim = blocks.front()->cols();
  for (const Matrix* b : blocks) {
    if (b->cols() != dim) throw ShapeMismatch("stack_features: feature dimensions differ");
    rows += b->rows();
  }
  Matrix out(rows, dim);
  Index at = 0;
  for (const Matrix* b : blocks) {
    out.middleRows(at, b->rows()) = *b;
    at += b->rows();
  }
  return out;
}

nlohmann::json to_json(const RankingRecord& r) {
  return {{"n", r.ranking.n()}, {"features", features_to_json(r.features)}, {"order", r.ranking.order()}};
}

nlohmann::json to_json(const GridRecord& r) {
  nlohmann::json j = nl::to_json(r.costs, r.path);
  j["features"] = features_to_json(r.features);
  return j;
}

void write_jsonl(std::ostream& out, const RankingDataset& data) {
  for (const auto& r : data.records) out << to_json(r).dump() << '\n';
}

void write_jsonl(std::ostream& out, const GridDataset& data) {
  for (const auto& r : data.records) out << to_json(r).dump() << '\n';
}

RankingDataset read_ranking_jsonl(std::istream& in) {
  RankingDataset data;
  for_each_line(in, [&](const nlohmann::json& j) {
    const Index n = j.at("n").get<Index>();
    Matrix x = features_from_json(j.at("features"), n);
    if (data.records.empty()) {
      data.n = n;
      data.feature_dim = x.cols();
    } else if (n != data.n || x.cols() != data.feature_dim) {
      throw ShapeMismatch("ranking dataset: records of different shapes");
    }
    data.records.push_back({std::move(x), GroundTruthRanking(j.at("order").get<std::vector<int>>())});
  });
  return data;
}

GridDataset read_grid_jsonl(std::istream& in) {
  GridDataset data;
  for_each_line(in, [&](const nlohmann::json& j) {
    auto [inst, path] = grid_from_json(j);
    if (inst.height() != inst.width()) throw ShapeMismatch("grid dataset: grids must be square");
    Matrix x = features_from_json(j.at("features"), inst.cells());
    if (data.records.empty()) {
      data.size = inst.height();
      data.feature_dim = x.cols();
    } else if (inst.height() != data.size || x.cols() != data.feature_dim) {
      throw ShapeMismatch("grid dataset: records of different shapes");
    }
    data.records.push_back({std::move(x), std::move(inst), std::move(path)});
  });
  return data;
}

}  // namespace nl::bench
