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

// Self-checks exposed by the CLI `check` subcommand.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nl::bench {

struct CheckResult {
  std::string name;
  double value = 0.0;      // worst observed error
  double tolerance = 0.0;  // pass when value <= tolerance
  bool pass = false;
};

/// Ranking-loss gradients of every relaxation against central differences
/// of the loss value, worst relative error over `trials` random inputs.
std::vector<CheckResult> check_gradients(std::uint64_t seed, int trials = 50, int n = 5);

/// Split-step identities on random models (gradient step and m=1 Newton).
std::vector<CheckResult> check_lemmas(std::uint64_t seed);

/// Dijkstra against exhaustive path enumeration on random 3x3..5x5 grids.
std::vector<CheckResult> check_oracles(std::uint64_t seed, int grids_per_size = 100);

/// "check\tvalue\ttolerance\tstatus" rows.
std::string checks_tsv(const std::vector<CheckResult>& results);

}  // namespace nl::bench
