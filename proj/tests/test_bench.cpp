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

#include <sstream>

#include "newton_losses/bench/datasets.hpp"
#include "newton_losses/bench/experiments.hpp"
#include "newton_losses/bench/report.hpp"
#include "newton_losses/bench/slice.hpp"
#include "newton_losses/probes.hpp"
#include "oracles.hpp"

using namespace nl;
using namespace nl::bench;

namespace {

ExperimentConfig tiny_rank(Mode mode = Mode::baseline) {
  ExperimentConfig cfg;
  cfg.task = Task::rank;
  cfg.mode = mode;
  cfg.n = 4;
  cfg.steps = 30;
  cfg.train_size = 200;
  cfg.test_size = 50;
  cfg.hidden = {16};
  return cfg;
}

ExperimentConfig tiny_path(const std::string& method, Mode mode = Mode::baseline) {
  ExperimentConfig cfg;
  cfg.task = Task::path;
  cfg.method = method;
  cfg.mode = mode;
  cfg.grid = 3;
  cfg.steps = 10;
  cfg.batch = 4;
  cfg.samples = 5;
  cfg.train_size = 40;
  cfg.test_size = 20;
  cfg.hidden = {16};
  return cfg;
}

}  // namespace

TEST_SUITE("bench") {

TEST_CASE("ranking data is deterministic and labelled by the latent") {
  const RankingDataset a = gen_ranking_data(5, 5, 50, 6);
  const RankingDataset b = gen_ranking_data(5, 5, 50, 6);
  std::ostringstream sa, sb;
  write_jsonl(sa, a);
  write_jsonl(sb, b);
  CHECK(sa.str() == sb.str());

  Matrix scores(50, 5);
  for (Index i = 0; i < 50; ++i) {
    const RankingRecord& r = a.records[static_cast<std::size_t>(i)];
    for (Index j = 0; j < 5; ++j) scores(i, j) = ranking_latent(r.features.row(j).transpose());
    CHECK(r.ranking == hard_rank(Vector(scores.row(i).transpose())));
  }
  const RankingAccuracy acc = ranking_accuracy(a, scores);
  CHECK(acc.exact_match == 100.0);
  CHECK(acc.element_rank == 100.0);

  std::istringstream in(sa.str());
  const RankingDataset back = read_ranking_jsonl(in);
  REQUIRE(back.records.size() == 50);
  CHECK(back.records[3].ranking == a.records[3].ranking);
  CHECK(back.records[3].features == a.records[3].features);
}

TEST_CASE("minimum latent gap is respected") {
  const RankingDataset d = gen_ranking_data(6, 3, 40, 4, 0.5);
  for (const RankingRecord& r : d.records) {
    const auto& order = r.ranking.order();
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      const double hi = ranking_latent(r.features.row(order[k]).transpose());
      const double lo = ranking_latent(r.features.row(order[k + 1]).transpose());
      CHECK(hi - lo >= 0.5);
    }
  }
}

TEST_CASE("grid data is deterministic and labelled by Dijkstra") {
  const GridDataset a = gen_grid_data(7, 4, 30, 5);
  std::ostringstream sa, sb;
  write_jsonl(sa, a);
  write_jsonl(sb, gen_grid_data(7, 4, 30, 5));
  CHECK(sa.str() == sb.str());
  Matrix costs(30, 16);
  for (Index i = 0; i < 30; ++i) {
    const GridRecord& r = a.records[static_cast<std::size_t>(i)];
    CHECK(r.path == dijkstra_grid(r.costs));
    for (Index c = 0; c < 16; ++c) {
      costs(i, c) = grid_cell_cost(r.features.row(c).transpose());
      CHECK(costs(i, c) == r.costs.costs()(c / 4, c % 4));
    }
  }
  CHECK(perfect_match_rate(a, costs) == 100.0);
  std::istringstream in(sa.str());
  const GridDataset back = read_grid_jsonl(in);
  CHECK(back.records.back().path == a.records.back().path);
}

TEST_CASE("training runs are deterministic") {
  for (const Mode mode : kAllModes) {
    const nlohmann::json a = to_json(run_experiment(tiny_rank(mode)));
    const nlohmann::json b = to_json(run_experiment(tiny_rank(mode)));
    CHECK(a.dump() == b.dump());
  }
  const nlohmann::json p1 = to_json(run_experiment(tiny_path("fy", Mode::nl_hessian)));
  const nlohmann::json p2 = to_json(run_experiment(tiny_path("fy", Mode::nl_hessian)));
  CHECK(p1.dump() == p2.dump());
}

TEST_CASE("reports have ordered steps, bounded metrics and a hash") {
  ExperimentConfig cfg = tiny_rank();
  cfg.steps = 40;
  const TrainReport r = run_experiment(cfg);
  CHECK(r.evals.front().step == 0);
  CHECK(r.evals.back().step == 40);
  for (std::size_t i = 1; i < r.evals.size(); ++i) CHECK(r.evals[i].step > r.evals[i - 1].step);
  for (const EvalPoint& e : r.evals) {
    CHECK(*e.exact_match >= 0.0);
    CHECK(*e.element_rank <= 100.0);
  }
  const nlohmann::json j = to_json(r);
  CHECK(j["config_hash"] == config_hash(j["config"]));
  CHECK(j["config"]["lambda"].is_null());
  CHECK_FALSE(j.contains("wall_clock_seconds"));
}

TEST_CASE("mode matrix") {
  ExperimentConfig cfg = tiny_path("ss_algorithm", Mode::nl_hessian);
  try {
    cfg.validate();
    FAIL("expected a configuration error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("intractable") != std::string::npos);
  }
  for (const char* method : {"ss_loss", "fy"})
    for (const Mode m : kAllModes) CHECK_NOTHROW(tiny_path(method, m).validate());
  CHECK_NOTHROW(tiny_path("ss_algorithm", Mode::nl_fisher).validate());
  ExperimentConfig bad = tiny_rank(Mode::nl_fisher);
  bad.lambda = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = tiny_rank();
  bad.method = "fy";
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("lambda presets") {
  CHECK(default_lambda(Task::rank, "softsort", Mode::nl_hessian, 5) == 10.0);
  CHECK(default_lambda(Task::rank, "dsn_logistic", Mode::nl_fisher, 5) == 0.1);
  CHECK(default_lambda(Task::rank, "neuralsort", Mode::baseline, 5) == 0.0);
  CHECK(tiny_rank(Mode::nl_hessian).resolved_lambda() == 0.01);
}

TEST_CASE("a cost oracle reaches a perfect match at step zero") {
  const GridDataset data = gen_grid_data(9, 3, 40, 8);
  Matrix costs(40, 9);
  for (Index i = 0; i < 40; ++i) costs.row(i) = data.records[static_cast<std::size_t>(i)].costs.costs().reshaped<Eigen::RowMajor>().transpose();
  CHECK(perfect_match_rate(data, costs) == 100.0);
}

TEST_CASE("huge lambda reproduces the baseline update direction") {
  const RankingDataset data = gen_ranking_data(3, 5, 20, 8);
  std::vector<GroundTruthRanking> truths;
  Matrix y(20, 5);
  const Mlp model({8, 16, 1}, {Activation::relu, Activation::identity}, 4);
  std::vector<const Matrix*> blocks;
  for (const RankingRecord& r : data.records) {
    truths.push_back(r.ranking);
    blocks.push_back(&r.features);
  }
  const ForwardResult fwd = forward(model, stack_features(blocks));
  for (Index i = 0; i < 20; ++i) y.row(i) = fwd.outputs.middleRows(i * 5, 5).transpose();
  const LossProbe probe = make_ranking_probe(truths, SortConfig::defaults(SortMethod::neuralsort, 5));
  const auto theta_grad = [&](const Matrix& g) {
    Matrix stacked(100, 1);
    for (Index i = 0; i < 20; ++i) stacked.middleRows(i * 5, 5) = g.row(i).transpose() * 5.0;
    return backward(model, fwd.tape, stacked).flatten();
  };
  const Vector base = theta_grad(step_output_gradient(y, probe, Mode::baseline, 0.0));
  for (const Mode m : {Mode::nl_hessian, Mode::nl_fisher}) {
    const Vector other = theta_grad(step_output_gradient(y, probe, m, 1e8));
    CHECK(oracle::cosine(base, other) >= 0.999);
  }
}

TEST_CASE("lambda ablation") {
  ExperimentConfig cfg = tiny_rank();
  const std::vector<double> lambdas = {0.001, 0.1, 10.0};
  const std::vector<TrainReport> reports = ablate_lambda(cfg, lambdas, 1);
  CHECK(reports.size() == 1 + 2 * lambdas.size());
  const std::string tsv = ablation_tsv(lambdas, reports);
  std::istringstream lines(tsv);
  std::string line;
  std::getline(lines, line);
  CHECK(line.rfind("lambda\t", 0) == 0);
  for (const double l : lambdas) {
    std::getline(lines, line);
    CHECK(line.substr(0, line.find('\t')) == format_number(l));
  }

  const std::vector<TrainReport> one = ablate_lambda(cfg, {0.5}, 1);
  ExperimentConfig single = cfg;
  single.mode = Mode::nl_hessian;
  single.lambda = 0.5;
  const TrainReport direct = run_experiment(single);
  bool found = false;
  for (const TrainReport& r : one) {
    if (r.config.mode != Mode::nl_hessian) continue;
    found = true;
    CHECK(to_json(r).dump() == to_json(direct).dump());
  }
  CHECK(found);
  CHECK_THROWS_AS(ablate_lambda(cfg, {1.0, 0.5}, 1), ConfigError);
  CHECK_THROWS_AS(ablate_lambda(cfg, {-1.0}, 1), ConfigError);
}

TEST_CASE("largest lambda approaches the baseline") {
  ExperimentConfig cfg = tiny_rank();
  cfg.n = 5;
  cfg.steps = 300;
  cfg.train_size = 1000;
  cfg.test_size = 200;
  const std::vector<TrainReport> reports = ablate_lambda(cfg, {1e3}, 3);
  const std::vector<SummaryRow> rows = summarize(reports);
  double base_mean = 0, base_std = 0;
  for (const SummaryRow& r : rows)
    if (r.mode == Mode::baseline) base_mean = r.mean, base_std = r.std;
  for (const SummaryRow& r : rows) {
    if (r.mode == Mode::baseline) continue;
    CAPTURE(to_string(r.mode));
    CHECK(std::abs(r.mean - base_mean) <= std::max({base_std, r.std, 0.5}));
  }
}

TEST_CASE("gradient slice stubs") {
  SliceConfig cfg;
  cfg.base = Vector::Zero(3);
  cfg.coord = 1;
  cfg.lo = -2;
  cfg.hi = 2;
  cfg.steps = 41;
  cfg.method = "constant";
  CHECK(gradient_slice(cfg).gradients.isZero(0.0));

  cfg.method = "mse";
  cfg.target = Vector::Constant(3, 0.7);
  const SliceTable t = gradient_slice(cfg);
  for (Index k = 0; k < 41; ++k)
    CHECK(t.gradients(k, 1) == doctest::Approx(t.coord_values(k) - 0.7).epsilon(1e-12));
  CHECK(slice_tsv(cfg, t).rfind("y1\tgrad0\tgrad1\tgrad2\n", 0) == 0);

  cfg.coord = 3;
  CHECK_THROWS_AS(gradient_slice(cfg), ConfigError);
}

TEST_CASE("Fisher injection bounds the NeuralSort slice") {
  SliceConfig cfg;
  cfg.method = "neuralsort";
  cfg.base = (Vector(5) << 0, 3, -1, 2, 1).finished();
  cfg.truth = std::vector<int>{0, 1, 2, 3, 4};
  cfg.coord = 0;
  cfg.lo = -20;
  cfg.hi = 20;
  cfg.steps = 401;
  cfg.tau = 0.1;
  const double raw = gradient_slice(cfg).gradients.cwiseAbs().maxCoeff();
  for (const double lambda : {0.01, 0.1, 1.0}) {
    cfg.inject_lambda = lambda;
    CAPTURE(lambda);
    CHECK(gradient_slice(cfg).gradients.cwiseAbs().maxCoeff() <= raw);
  }
}

TEST_CASE("enum parsing") {
  CHECK(parse_mode("nl_fisher") == Mode::nl_fisher);
  CHECK(parse_task("path") == Task::path);
  CHECK_THROWS_AS(parse_mode("newton"), ConfigError);
  CHECK(parse_path_method("fy") == PathMethod::fy);
  CHECK(parse_cost_link("identity") == CostLink::identity);
}

}  // TEST_SUITE
