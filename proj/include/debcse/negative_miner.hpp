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
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "debcse/corpus.hpp"
#include "debcse/embedding_file.hpp"
#include "debcse/similarity.hpp"

namespace debcse {

struct NegativePoolConfig {
  double band_lo = 0.25;
  double band_hi = 0.75;
  std::size_t pool_cap = 64;
  double lambda_n = 0.8;
  std::size_t m = 2;
  std::uint64_t seed = 0;
  SurfaceOptions surface;

  /// Throws InvalidArgument unless 0 <= band_lo < band_hi <= 1,
  /// 1 <= m <= pool_cap and lambda_n in [0, 1].
  void validate() const;
};

struct NegativeCandidatePool {
  SentenceId anchor_id = 0;
  std::vector<ScoredCandidate> members;  // candidate_id is a sentence id
  std::vector<double> p_neg;
};

struct MinedNegatives {
  SentenceId anchor_id = 0;
  std::vector<SentenceId> negative_ids;
  std::vector<double> probabilities;
  std::vector<double> cosines;
};

/// Negative blend followed by the sharpening softmax:
///   p~_j = (1 - lambda_n) s_sur_j + lambda_n (1 - s_sem_j),  p = softmax(p~).
std::vector<double> ipw_negative_probability(std::span<const double> s_sur, std::span<const double> s_sem,
                                             double lambda_n);

/// Unnormalised blend only (the p~ values).
std::vector<double> negative_propensity(std::span<const double> s_sur, std::span<const double> s_sem, double lambda_n);

/// Pool for a single anchor, scanning every other sentence with the exact
/// cosine. std::nullopt when no sentence falls inside the band.
std::optional<NegativeCandidatePool> build_pool(SentenceId anchor_id, const Corpus& corpus, const EmbeddingMatrix& emb,
                                                const NegativePoolConfig& cfg);

/// Builds the pool from a precomputed list of in-band (id, cosine) members.
/// Exposed so the batch driver and tests share the sub-sampling and scoring path.
NegativeCandidatePool score_negative_pool(SentenceId anchor_id, const Corpus& corpus,
                                          std::vector<std::pair<SentenceId, double>> in_band,
                                          const NegativePoolConfig& cfg);

/// Draws min(m, pool size) distinct members by sequential draw-and-renormalise
/// on p_neg, using the (seed, anchor) keyed stream.
MinedNegatives sample_negatives(const NegativeCandidatePool& pool, std::size_t m, std::uint64_t seed);

struct NegativeMiningResult {
  std::vector<MinedNegatives> mined;  // ascending anchor id
  std::vector<SentenceId> skipped;    // anchors with an empty band
};

/// Mines every anchor. Candidates are prefiltered with a blocked
/// normalised-matrix product and confirmed with the exact cosine, so output
/// is identical to calling build_pool + sample_negatives per anchor, for any
/// worker count.
NegativeMiningResult mine_all_negatives(const Corpus& corpus, const EmbeddingMatrix& emb,
                                        const NegativePoolConfig& cfg, std::size_t workers = 1);

}  // namespace debcse
