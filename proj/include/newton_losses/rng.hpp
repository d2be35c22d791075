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

// Seed derivation for reproducible, order-independent random streams.

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace nl {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Mixes a base seed with a list of counters (step, sample index, ...). Each
/// distinct counter tuple gets its own stream, so results do not depend on
/// the order in which streams are consumed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> counters) {
  std::uint64_t h = splitmix64(seed);
  for (const std::uint64_t c : counters) h = splitmix64(h ^ splitmix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> counters = {}) {
  return Rng(derive_seed(seed, counters));
}

}  // namespace nl
