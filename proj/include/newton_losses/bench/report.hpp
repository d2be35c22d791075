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

// Report serialization. JSON documents follow schemas/report.v1.schema.json;
// TSV tables are tab-separated with one header row.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "newton_losses/bench/experiments.hpp"

namespace nl::bench {

inline constexpr int kReportSchemaVersion = 1;

/// 64-bit FNV-1a over the compact dump of the resolved config, as
/// "fnv1a64:<16 hex digits>".
std::string config_hash(const nlohmann::json& config);

nlohmann::json to_json(const TrainReport& report);

/// {"schema_version", "kind": "bench", "task", "runs": [...], "summary": [...]}
nlohmann::json bench_document(const std::vector<TrainReport>& reports);

/// Same envelope with "kind": "ablation" and the λ grid echoed.
nlohmann::json ablation_document(const std::vector<double>& lambdas, const std::vector<TrainReport>& reports);

/// task, method, mode, lambda, metric, seeds, mean, std.
std::string summary_tsv(const std::vector<TrainReport>& reports);

/// task, method, mode, lambda, seed, step, metric columns: one row per eval.
std::string curves_tsv(const std::vector<TrainReport>& reports);

/// One row per λ in grid order: lambda, baseline mean/std, nl_hessian
/// mean/std, nl_fisher mean/std. Cells of skipped modes read "NA".
std::string ablation_tsv(const std::vector<double>& lambdas, const std::vector<TrainReport>& reports);

/// Shortest round-trip decimal form with '.' as separator.
std::string format_number(double x);

}  // namespace nl::bench
