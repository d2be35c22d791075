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

#include "newton_losses/bench/report.hpp"

#include <fmt/format.h>

#include <cmath>
#include <optional>

namespace nl::bench {

namespace {

std::string optional_number(const std::optional<double>& x) { return x ? format_number(*x) : "NA"; }

std::string lambda_cell(const ExperimentConfig& cfg) {
  return cfg.mode == Mode::baseline ? "NA" : format_number(cfg.resolved_lambda());
}

nlohmann::json eval_json(const EvalPoint& e) {
  nlohmann::json j{{"step", e.step}};
  if (e.exact_match) j["exact_match"] = *e.exact_match;
  if (e.element_rank) j["element_rank"] = *e.element_rank;
  if (e.perfect_match) j["perfect_match"] = *e.perfect_match;
  return j;
}

nlohmann::json summary_json(const std::vector<TrainReport>& reports) {
  nlohmann::json rows = nlohmann::json::array();
  for (const SummaryRow& r : summarize(reports)) {
    rows.push_back({{"mode", to_string(r.mode)},
                    {"lambda", r.mode == Mode::baseline ? nlohmann::json(nullptr) : nlohmann::json(r.lambda)},
                    {"metric", r.metric},
                    {"seeds", r.seeds},
                    {"mean", r.mean},
                    {"std", r.std}});
  }
  return rows;
}

nlohmann::json envelope(const char* kind, const std::vector<TrainReport>& reports) {
  nlohmann::json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["kind"] = kind;
  doc["task"] = reports.empty() ? "rank" : std::string(to_string(reports.front().config.task));
  nlohmann::json runs = nlohmann::json::array();
  for (const TrainReport& r : reports) runs.push_back(to_json(r));
  doc["runs"] = std::move(runs);
  doc["summary"] = summary_json(reports);
  return doc;
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{}", x);
}

std::string config_hash(const nlohmann::json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("fnv1a64:{:016x}", h);
}

nlohmann::json to_json(const TrainReport& report) {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["config"] = report.config.to_json();
  j["config_hash"] = config_hash(j["config"]);
  j["seed"] = report.config.seed;
  nlohmann::json evals = nlohmann::json::array();
  for (const EvalPoint& e : report.evals) evals.push_back(eval_json(e));
  j["evals"] = std::move(evals);
  j["final"] = eval_json(report.final_eval());
  if (report.wall_clock_seconds) j["wall_clock_seconds"] = *report.wall_clock_seconds;
  return j;
}

nlohmann::json bench_document(const std::vector<TrainReport>& reports) { return envelope("bench", reports); }

nlohmann::json ablation_document(const std::vector<double>& lambdas, const std::vector<TrainReport>& reports) {
  nlohmann::json doc = envelope("ablation", reports);
  doc["lambdas"] = lambdas;
  return doc;
}

std::string summary_tsv(const std::vector<TrainReport>& reports) {
  std::string out = "task\tmethod\tmode\tlambda\tmetric\tseeds\tmean\tstd\n";
  if (reports.empty()) return out;
  const ExperimentConfig& first = reports.front().config;
  for (const SummaryRow& r : summarize(reports)) {
    out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", to_string(first.task), first.method, to_string(r.mode),
                       r.mode == Mode::baseline ? "NA" : format_number(r.lambda), r.metric, r.seeds,
                       format_number(r.mean), format_number(r.std));
  }
  return out;
}

std::string curves_tsv(const std::vector<TrainReport>& reports) {
  std::string out = "task\tmethod\tmode\tlambda\tseed\tstep\texact_match\telement_rank\tperfect_match\n";
  for (const TrainReport& r : reports) {
    for (const EvalPoint& e : r.evals) {
      out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", to_string(r.config.task), r.config.method,
                         to_string(r.config.mode), lambda_cell(r.config), r.config.seed, e.step,
                         optional_number(e.exact_match), optional_number(e.element_rank),
                         optional_number(e.perfect_match));
    }
  }
  return out;
}

std::string ablation_tsv(const std::vector<double>& lambdas, const std::vector<TrainReport>& reports) {
  const auto rows = summarize(reports);
  auto cell = [&](Mode mode, std::optional<double> lambda) -> std::string {
    for (const SummaryRow& r : rows) {
      if (r.mode == mode && (!lambda || r.lambda == *lambda))
        return format_number(r.mean) + "\t" + format_number(r.std);
    }
    return "NA\tNA";
  };
  std::string out =
      "lambda\tbaseline_mean\tbaseline_std\tnl_hessian_mean\tnl_hessian_std\tnl_fisher_mean\tnl_fisher_std\n";
  for (double l : lambdas) {
    out += fmt::format("{}\t{}\t{}\t{}\n", format_number(l), cell(Mode::baseline, std::nullopt),
                       cell(Mode::nl_hessian, l), cell(Mode::nl_fisher, l));
  }
  return out;
}

}  // namespace nl::bench
