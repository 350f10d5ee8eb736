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

#include "debcse/negative_miner.hpp"

#include <Eigen/Dense>

#include "debcse/log.hpp"
#include "debcse/parallel.hpp"
#include "debcse/rng.hpp"
#include "debcse/sampling.hpp"

namespace debcse {
namespace {

constexpr std::size_t kBlockRows = 256;
// Float matrix product error is ~1e-6 on unit rows; members are confirmed
// with the exact cosine afterwards.
constexpr double kPrefilterMargin = 1e-4;

bool in_band(double c, const NegativePoolConfig& cfg) { return c >= cfg.band_lo && c <= cfg.band_hi; }

double exact_cosine(const EmbeddingMatrix& emb, std::size_t i, std::size_t j) { return cosine(emb.row(i), emb.row(j)); }

void check_aligned(const Corpus& corpus, const EmbeddingMatrix& emb) {
  if (corpus.size() != emb.count()) {
    throw InvalidArgument("embedding count " + std::to_string(emb.count()) + " does not match corpus size " +
                          std::to_string(corpus.size()));
  }
}

}  // namespace

void NegativePoolConfig::validate() const {
  if (!(band_lo >= 0.0 && band_lo < band_hi && band_hi <= 1.0)) {
    throw InvalidArgument("band must satisfy 0 <= band_lo < band_hi <= 1");
  }
  if (m < 1 || m > pool_cap) throw InvalidArgument("need 1 <= m <= pool_cap");
  if (!(lambda_n >= 0.0 && lambda_n <= 1.0)) throw InvalidArgument("lambda_n must lie in [0, 1]");
}

std::vector<double> negative_propensity(std::span<const double> s_sur, std::span<const double> s_sem, double lambda_n) {
  if (s_sur.empty()) throw InvalidArgument("empty score lists");
  if (s_sur.size() != s_sem.size()) throw InvalidArgument("score lists differ in length");
  if (!(lambda_n >= 0.0 && lambda_n <= 1.0)) throw InvalidArgument("lambda_n must lie in [0, 1]");
  std::vector<double> out(s_sur.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = (1.0 - lambda_n) * s_sur[j] + lambda_n * (1.0 - s_sem[j]);
  return out;
}

std::vector<double> ipw_negative_probability(std::span<const double> s_sur, std::span<const double> s_sem,
                                             double lambda_n) {
  const std::vector<double> blended = negative_propensity(s_sur, s_sem, lambda_n);
  return softmax(blended);
}

NegativeCandidatePool score_negative_pool(SentenceId anchor_id, const Corpus& corpus,
                                          std::vector<std::pair<SentenceId, double>> in_band,
                                          const NegativePoolConfig& cfg) {
  if (in_band.size() > cfg.pool_cap) {
    KeyedRng rng(cfg.seed, anchor_id, Stream::kPoolSubsample);
    const std::vector<std::size_t> keep = uniform_subset(in_band.size(), cfg.pool_cap, rng);
    std::vector<std::pair<SentenceId, double>> reduced;
    reduced.reserve(keep.size());
    for (std::size_t k : keep) reduced.push_back(in_band[k]);
    in_band = std::move(reduced);
  }
  NegativeCandidatePool pool;
  pool.anchor_id = anchor_id;
  std::vector<Sentence> members;
  members.reserve(in_band.size());
  for (const auto& [id, c] : in_band) {
    ScoredCandidate sc;
    sc.candidate_id = id;
    sc.cosine = c;
    sc.edit = edit_distance(corpus[anchor_id].tokens, corpus[id].tokens);
    pool.members.push_back(sc);
    members.push_back(corpus[id]);
  }
  const std::vector<double> distances = surface_distances(corpus[anchor_id], members, cfg.surface);
  normalize_scores(pool.members, distances);
  std::vector<double> sur;
  std::vector<double> sem;
  for (const auto& m : pool.members) {
    sur.push_back(m.s_sur);
    sem.push_back(m.s_sem);
  }
  pool.p_neg = ipw_negative_probability(sur, sem, cfg.lambda_n);
  return pool;
}

std::optional<NegativeCandidatePool> build_pool(SentenceId anchor_id, const Corpus& corpus, const EmbeddingMatrix& emb,
                                                const NegativePoolConfig& cfg) {
  cfg.validate();
  check_aligned(corpus, emb);
  if (anchor_id >= corpus.size()) throw InvalidArgument("anchor id out of range");
  std::vector<std::pair<SentenceId, double>> band;
  for (SentenceId j = 0; j < corpus.size(); ++j) {
    if (j == anchor_id) continue;
    const double c = exact_cosine(emb, anchor_id, j);
    if (in_band(c, cfg)) band.emplace_back(j, c);
  }
  if (band.empty()) return std::nullopt;
  return score_negative_pool(anchor_id, corpus, std::move(band), cfg);
}

MinedNegatives sample_negatives(const NegativeCandidatePool& pool, std::size_t m, std::uint64_t seed) {
  if (pool.members.empty()) throw InvalidArgument("cannot sample negatives from an empty pool");
  if (pool.members.size() < m) {
    logger().debug("anchor {}: pool of {} is smaller than m={}, returning the whole pool", pool.anchor_id,
                   pool.members.size(), m);
  }
  KeyedRng rng(seed, pool.anchor_id, Stream::kNegativeSample);
  MinedNegatives out;
  out.anchor_id = pool.anchor_id;
  for (std::size_t k : sample_without_replacement(pool.p_neg, m, rng)) {
    out.negative_ids.push_back(pool.members[k].candidate_id);
    out.probabilities.push_back(pool.p_neg[k]);
    out.cosines.push_back(pool.members[k].cosine);
  }
  return out;
}

NegativeMiningResult mine_all_negatives(const Corpus& corpus, const EmbeddingMatrix& emb,
                                        const NegativePoolConfig& cfg, std::size_t workers) {
  cfg.validate();
  check_aligned(corpus, emb);
  const std::size_t n = corpus.size();
  const std::size_t d = emb.dim();

  Eigen::MatrixXf unit(d, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = emb.row(i);
    for (std::size_t k = 0; k < d; ++k) unit(k, i) = static_cast<float>(row[k] / emb.norm(i));
  }

  std::vector<std::optional<MinedNegatives>> slots(n);
  parallel_chunks(n, kBlockRows, workers, [&](std::size_t begin, std::size_t end) {
    const Eigen::MatrixXf block = unit.middleCols(begin, end - begin).transpose() * unit;
    for (std::size_t a = begin; a < end; ++a) {
      std::vector<std::pair<SentenceId, double>> band;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == a) continue;
        const double approx = block(a - begin, j);
        if (approx < cfg.band_lo - kPrefilterMargin || approx > cfg.band_hi + kPrefilterMargin) continue;
        const double c = exact_cosine(emb, a, j);
        if (in_band(c, cfg)) band.emplace_back(j, c);
      }
      if (band.empty()) continue;
      const NegativeCandidatePool pool = score_negative_pool(a, corpus, std::move(band), cfg);
      slots[a] = sample_negatives(pool, cfg.m, cfg.seed);
    }
  });

  NegativeMiningResult result;
  for (std::size_t a = 0; a < n; ++a) {
    if (slots[a]) {
      result.mined.push_back(std::move(*slots[a]));
    } else {
      result.skipped.push_back(a);
    }
  }
  if (!result.skipped.empty()) logger().info("{} anchors skipped: empty semantic band", result.skipped.size());
  return result;
}

}  // namespace debcse
