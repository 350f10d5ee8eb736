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

#include <cstdint>
#include <random>

namespace debcse {

/// Purpose tags so that independent draws for one anchor never share a stream.
enum class Stream : std::uint32_t {
  kPoolSubsample = 1,
  kNegativeSample = 2,
  kPositiveGenerate = 3,
  kPositiveSample = 4,
  kBatchOrder = 5,
  kInBatch = 6,
  kInit = 7,
  kBaseline = 8,
};

/// Deterministic generator keyed by (seed, key, stream). Draw helpers avoid the
/// std distributions so the produced sequences do not depend on the standard
/// library implementation.
class KeyedRng {
 public:
  KeyedRng(std::uint64_t seed, std::uint64_t key, Stream stream);

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  double normal();

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace debcse
