// Copyright 2026 The debcse Authors.
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

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "debcse/rng.hpp"

namespace debcse {

/// Draws min(m, n) distinct indices. Each draw picks index j with probability
/// weights[j] / (sum of weights not yet drawn). Weights must be positive and
/// finite. Indices are returned in draw order.
std::vector<std::size_t> sample_without_replacement(std::span<const double> weights, std::size_t m, KeyedRng& rng);

/// Uniformly chooses k distinct indices out of n (partial Fisher-Yates),
/// returned in ascending order.
std::vector<std::size_t> uniform_subset(std::size_t n, std::size_t k, KeyedRng& rng);

}  // namespace debcse
