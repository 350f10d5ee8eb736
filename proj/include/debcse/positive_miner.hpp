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
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "debcse/corpus.hpp"
#include "debcse/similarity.hpp"

namespace debcse {

struct EncoderParams;

struct PositiveGenConfig {
  std::size_t candidates_per_anchor = 8;
  std::size_t inject_min = 1;
  std::size_t inject_max = 2;
  std::size_t mask_min = 1;
  std::size_t mask_max = 2;
  double inject_probability = 0.5;  // otherwise the candidate is a masking edit
  std::size_t highfreq_vocab_size = 100;
  std::string mask_token = "[MASK]";
  std::size_t max_retries = 32;  // extra attempts per requested candidate
  std::uint64_t seed = 0;

  void validate() const;
};

inline constexpr std::size_t kMinAnchorTokens = 3;

/// Inserts words[k] before token position positions[k], applied in order.
Tokens inject_tokens(Tokens tokens, std::span<const std::string> words, std::span<const std::size_t> positions);

/// Replaces the tokens at the given positions with mask_token.
Tokens mask_tokens(Tokens tokens, std::span<const std::size_t> positions, const std::string& mask_token);

/// Rule-based candidates: each is one seeded edit of the anchor tokens, either
/// injecting 1-2 high-frequency words or masking 1-2 positions. Candidates
/// that re-tokenize to the anchor or to an earlier candidate are redrawn, up to
/// max_retries extra attempts per requested candidate; fewer than G may come
/// back. InvalidArgument when the anchor has fewer than 3 tokens.
std::vector<std::string> generate_candidates(const Sentence& anchor, std::span<const std::string> highfreq_vocab,
                                             const PositiveGenConfig& cfg);

std::vector<std::string> generate_candidates(const Sentence& anchor, const Corpus& corpus,
                                             const PositiveGenConfig& cfg);

struct ExternalCandidates {
  std::map<SentenceId, std::vector<std::string>> by_anchor;  // sorted, deduplicated
  std::size_t malformed = 0;
  std::size_t out_of_range = 0;
};

/// Parses newline-delimited {"anchor_id": int, "candidate": string} records.
/// Malformed records and anchors >= corpus_size are skipped and counted.
ExternalCandidates load_external_candidates(const std::filesystem::path& path, std::size_t corpus_size);

/// Sorted union of both sources minus anything whose tokens equal the anchor's.
std::vector<std::string> merge_candidates(const Sentence& anchor, std::vector<std::string> rule_based,
                                          const std::vector<std::string>& external);

/// p~_j = (1 - lambda_p)(1 - s_sur_j) + lambda_p s_sem_j,  p = softmax(p~).
std::vector<double> ipw_positive_probability(std::span<const double> s_sur, std::span<const double> s_sem,
                                             double lambda_p);

std::vector<double> positive_propensity(std::span<const double> s_sur, std::span<const double> s_sem, double lambda_p);

struct PositiveCandidatePool {
  SentenceId anchor_id = 0;
  std::vector<std::string> texts;
  std::vector<ScoredCandidate> members;  // candidate_id indexes `texts`
  std::vector<double> p_pos;
};

struct MinedPositives {
  SentenceId anchor_id = 0;
  std::vector<std::string> positives;
  std::vector<double> probabilities;
};

/// Scores candidates against the anchor. candidate_vecs[k] embeds candidates[k]
/// with the same encoder that produced anchor_vec. Candidates whose tokens
/// equal the anchor's are dropped. InvalidArgument when an embedding is
/// missing; DataError when nothing is left to score.
PositiveCandidatePool score_candidates(const Sentence& anchor, std::span<const double> anchor_vec,
                                       const std::vector<std::string>& candidates,
                                       const std::vector<std::vector<double>>& candidate_vecs, double lambda_p,
                                       const SurfaceOptions& surface = {});

MinedPositives sample_positives(const PositiveCandidatePool& pool, std::size_t m, std::uint64_t seed);

struct PositiveMiningConfig {
  PositiveGenConfig gen;
  double lambda_p = 0.8;
  std::size_t m = 2;
  bool rule_based = true;
  SurfaceOptions surface;
};

struct PositiveMiningResult {
  std::vector<MinedPositives> mined;  // ascending anchor id
  std::vector<SentenceId> skipped;    // too short or no candidates
};

/// Full positive pass with the toy encoder supplying every embedding.
PositiveMiningResult mine_all_positives(const Corpus& corpus, const EncoderParams& encoder,
                                        const PositiveMiningConfig& cfg, const ExternalCandidates* external = nullptr,
                                        std::size_t workers = 1);

}  // namespace debcse
