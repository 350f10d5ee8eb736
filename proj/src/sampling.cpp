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

#include "debcse/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "debcse/error.hpp"

namespace debcse {

std::vector<std::size_t> sample_without_replacement(std::span<const double> weights, std::size_t m, KeyedRng& rng) {
  if (weights.empty()) throw InvalidArgument("cannot sample from an empty pool");
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw InvalidArgument("sampling weights must be positive and finite");
  }
  std::vector<double> remaining(weights.begin(), weights.end());
  std::vector<std::size_t> picked;
  const std::size_t draws = std::min(m, weights.size());
  picked.reserve(draws);
  for (std::size_t d = 0; d < draws; ++d) {
    double total = 0.0;
    for (double w : remaining) total += w;
    const double target = rng.uniform() * total;
    double acc = 0.0;
    std::size_t chosen = remaining.size();
    std::size_t last_live = remaining.size();
    for (std::size_t j = 0; j < remaining.size(); ++j) {
      if (remaining[j] == 0.0) continue;
      last_live = j;
      acc += remaining[j];
      if (target < acc) {
        chosen = j;
        break;
      }
    }
    // Rounding can leave target >= acc after the final live entry.
    if (chosen == remaining.size()) chosen = last_live;
    picked.push_back(chosen);
    remaining[chosen] = 0.0;
  }
  return picked;
}

std::vector<std::size_t> uniform_subset(std::size_t n, std::size_t k, KeyedRng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  k = std::min(k, n);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.below(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace debcse
