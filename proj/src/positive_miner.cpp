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

#include "debcse/positive_miner.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <set>

#include "json.hpp"

#include "debcse/encoder.hpp"
#include "debcse/error.hpp"
#include "debcse/log.hpp"
#include "debcse/parallel.hpp"
#include "debcse/rng.hpp"
#include "debcse/sampling.hpp"

namespace debcse {
namespace {

std::size_t draw_count(std::size_t lo, std::size_t hi, KeyedRng& rng) { return lo + rng.below(hi - lo + 1); }

Tokens one_edit(const Tokens& anchor, std::span<const std::string> vocab, const PositiveGenConfig& cfg,
                KeyedRng& rng) {
  const bool inject = !vocab.empty() && rng.uniform() < cfg.inject_probability;
  if (inject) {
    const std::size_t count = draw_count(cfg.inject_min, cfg.inject_max, rng);
    std::vector<std::string> words;
    std::vector<std::size_t> positions;
    for (std::size_t k = 0; k < count; ++k) {
      words.push_back(vocab[rng.below(vocab.size())]);
      positions.push_back(rng.below(anchor.size() + k + 1));
    }
    return inject_tokens(anchor, words, positions);
  }
  const std::size_t count = std::min(draw_count(cfg.mask_min, cfg.mask_max, rng), anchor.size());
  const std::vector<std::size_t> positions = uniform_subset(anchor.size(), count, rng);
  return mask_tokens(anchor, positions, cfg.mask_token);
}

}  // namespace

void PositiveGenConfig::validate() const {
  if (candidates_per_anchor < 1) throw InvalidArgument("candidates_per_anchor must be >= 1");
  auto in_range = [](std::size_t v) { return v == 1 || v == 2; };
  if (!in_range(inject_min) || !in_range(inject_max) || inject_min > inject_max) {
    throw InvalidArgument("inject counts must lie in {1, 2}");
  }
  if (!in_range(mask_min) || !in_range(mask_max) || mask_min > mask_max) {
    throw InvalidArgument("mask counts must lie in {1, 2}");
  }
  if (!(inject_probability >= 0.0 && inject_probability <= 1.0)) {
    throw InvalidArgument("inject_probability must lie in [0, 1]");
  }
  if (mask_token.empty()) throw InvalidArgument("mask_token must be non-empty");
}

Tokens inject_tokens(Tokens tokens, std::span<const std::string> words, std::span<const std::size_t> positions) {
  if (words.size() != positions.size()) throw InvalidArgument("inject_tokens: words/positions length mismatch");
  for (std::size_t k = 0; k < words.size(); ++k) {
    if (positions[k] > tokens.size()) throw InvalidArgument("inject_tokens: position out of range");
    tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(positions[k]), words[k]);
  }
  return tokens;
}

Tokens mask_tokens(Tokens tokens, std::span<const std::size_t> positions, const std::string& mask_token) {
  for (std::size_t p : positions) {
    if (p >= tokens.size()) throw InvalidArgument("mask_tokens: position out of range");
    tokens[p] = mask_token;
  }
  return tokens;
}

std::vector<std::string> generate_candidates(const Sentence& anchor, std::span<const std::string> highfreq_vocab,
                                             const PositiveGenConfig& cfg) {
  cfg.validate();
  if (anchor.tokens.size() < kMinAnchorTokens) {
    throw InvalidArgument("anchor " + std::to_string(anchor.id) + " has fewer than 3 tokens");
  }
  KeyedRng rng(cfg.seed, anchor.id, Stream::kPositiveGenerate);
  std::set<Tokens> seen{anchor.tokens};
  std::vector<std::string> out;
  const std::size_t budget = cfg.candidates_per_anchor * (cfg.max_retries + 1);
  for (std::size_t attempt = 0; attempt < budget && out.size() < cfg.candidates_per_anchor; ++attempt) {
    const std::string text = join_tokens(one_edit(anchor.tokens, highfreq_vocab, cfg, rng));
    if (seen.insert(tokenize(text)).second) out.push_back(text);
  }
  if (out.size() < cfg.candidates_per_anchor) {
    logger().warn("anchor {}: only {} of {} distinct candidates after retries", anchor.id, out.size(),
                  cfg.candidates_per_anchor);
  }
  return out;
}

std::vector<std::string> generate_candidates(const Sentence& anchor, const Corpus& corpus,
                                             const PositiveGenConfig& cfg) {
  const std::vector<std::string> vocab = top_frequency_words(corpus, cfg.highfreq_vocab_size);
  return generate_candidates(anchor, vocab, cfg);
}

ExternalCandidates load_external_candidates(const std::filesystem::path& path, std::size_t corpus_size) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open external candidates " + path.string());
  ExternalCandidates out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object() || !record.contains("anchor_id") ||
        !record.contains("candidate") || !record["anchor_id"].is_number_integer() ||
        !record["candidate"].is_string() || record["anchor_id"].get<std::int64_t>() < 0) {
      ++out.malformed;
      logger().warn("{}:{}: malformed candidate record skipped", path.string(), line_no);
      continue;
    }
    const auto id = record["anchor_id"].get<std::uint64_t>();
    if (id >= corpus_size) {
      ++out.out_of_range;
      logger().warn("{}:{}: anchor_id {} outside corpus of {}", path.string(), line_no, id, corpus_size);
      continue;
    }
    out.by_anchor[id].push_back(record["candidate"].get<std::string>());
  }
  for (auto& [id, list] : out.by_anchor) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return out;
}

std::vector<std::string> merge_candidates(const Sentence& anchor, std::vector<std::string> rule_based,
                                          const std::vector<std::string>& external) {
  rule_based.insert(rule_based.end(), external.begin(), external.end());
  std::sort(rule_based.begin(), rule_based.end());
  rule_based.erase(std::unique(rule_based.begin(), rule_based.end()), rule_based.end());
  std::erase_if(rule_based, [&](const std::string& c) { return tokenize(c) == anchor.tokens; });
  return rule_based;
}

std::vector<double> positive_propensity(std::span<const double> s_sur, std::span<const double> s_sem, double lambda_p) {
  if (s_sur.empty()) throw InvalidArgument("empty score lists");
  if (s_sur.size() != s_sem.size()) throw InvalidArgument("score lists differ in length");
  if (!(lambda_p >= 0.0 && lambda_p <= 1.0)) throw InvalidArgument("lambda_p must lie in [0, 1]");
  std::vector<double> out(s_sur.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = (1.0 - lambda_p) * (1.0 - s_sur[j]) + lambda_p * s_sem[j];
  return out;
}

std::vector<double> ipw_positive_probability(std::span<const double> s_sur, std::span<const double> s_sem,
                                             double lambda_p) {
  const std::vector<double> blended = positive_propensity(s_sur, s_sem, lambda_p);
  return softmax(blended);
}

PositiveCandidatePool score_candidates(const Sentence& anchor, std::span<const double> anchor_vec,
                                       const std::vector<std::string>& candidates,
                                       const std::vector<std::vector<double>>& candidate_vecs, double lambda_p,
                                       const SurfaceOptions& surface) {
  if (candidate_vecs.size() != candidates.size()) {
    throw InvalidArgument("missing candidate embedding: " + std::to_string(candidates.size()) + " candidates, " +
                          std::to_string(candidate_vecs.size()) + " vectors");
  }
  PositiveCandidatePool pool;
  pool.anchor_id = anchor.id;
  std::vector<Sentence> kept;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    Tokens tokens = tokenize(candidates[k]);
    if (tokens.empty() || tokens == anchor.tokens) continue;
    ScoredCandidate sc;
    sc.candidate_id = pool.texts.size();
    sc.edit = edit_distance(anchor.tokens, tokens);
    sc.cosine = cosine(anchor_vec, std::span<const double>(candidate_vecs[k]));
    pool.members.push_back(sc);
    pool.texts.push_back(candidates[k]);
    kept.push_back(Sentence{sc.candidate_id, 0, candidates[k], std::move(tokens)});
  }
  if (pool.members.empty()) throw DataError("anchor " + std::to_string(anchor.id) + ": no usable positive candidate");
  const std::vector<double> distances = surface_distances(anchor, kept, surface);
  normalize_scores(pool.members, distances);
  std::vector<double> sur;
  std::vector<double> sem;
  for (const auto& m : pool.members) {
    sur.push_back(m.s_sur);
    sem.push_back(m.s_sem);
  }
  pool.p_pos = ipw_positive_probability(sur, sem, lambda_p);
  return pool;
}

MinedPositives sample_positives(const PositiveCandidatePool& pool, std::size_t m, std::uint64_t seed) {
  if (pool.members.empty()) throw InvalidArgument("cannot sample positives from an empty pool");
  if (pool.members.size() < m) {
    logger().debug("anchor {}: pool of {} is smaller than m={}, returning the whole pool", pool.anchor_id,
                   pool.members.size(), m);
  }
  KeyedRng rng(seed, pool.anchor_id, Stream::kPositiveSample);
  MinedPositives out;
  out.anchor_id = pool.anchor_id;
  for (std::size_t k : sample_without_replacement(pool.p_pos, m, rng)) {
    out.positives.push_back(pool.texts[pool.members[k].candidate_id]);
    out.probabilities.push_back(pool.p_pos[k]);
  }
  return out;
}

PositiveMiningResult mine_all_positives(const Corpus& corpus, const EncoderParams& encoder,
                                        const PositiveMiningConfig& cfg, const ExternalCandidates* external,
                                        std::size_t workers) {
  cfg.gen.validate();
  if (cfg.m < 1) throw InvalidArgument("m must be >= 1");
  if (cfg.rule_based && cfg.gen.candidates_per_anchor < cfg.m) {
    throw InvalidArgument("candidates_per_anchor must be >= m");
  }
  const std::vector<std::string> vocab = top_frequency_words(corpus, cfg.gen.highfreq_vocab_size);
  static const std::vector<std::string> kNone;

  std::vector<std::optional<MinedPositives>> slots(corpus.size());
  parallel_chunks(corpus.size(), 64, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t a = begin; a < end; ++a) {
      const Sentence& anchor = corpus[a];
      std::vector<std::string> rule;
      if (cfg.rule_based && anchor.tokens.size() >= kMinAnchorTokens) rule = generate_candidates(anchor, vocab, cfg.gen);
      const std::vector<std::string>* ext = &kNone;
      if (external != nullptr) {
        const auto it = external->by_anchor.find(a);
        if (it != external->by_anchor.end()) ext = &it->second;
      }
      std::vector<std::string> merged = merge_candidates(anchor, std::move(rule), *ext);
      std::erase_if(merged, [](const std::string& c) { return tokenize(c).empty(); });
      if (merged.empty()) continue;
      const Eigen::VectorXd anchor_vec = encode(encoder, anchor.tokens);
      std::vector<std::vector<double>> vecs;
      vecs.reserve(merged.size());
      for (const auto& c : merged) {
        const Eigen::VectorXd h = encode(encoder, tokenize(c));
        vecs.emplace_back(h.data(), h.data() + h.size());
      }
      const PositiveCandidatePool pool =
          score_candidates(anchor, std::span<const double>(anchor_vec.data(), static_cast<std::size_t>(anchor_vec.size())),
                           merged, vecs, cfg.lambda_p, cfg.surface);
      slots[a] = sample_positives(pool, cfg.m, cfg.gen.seed);
    }
  });

  PositiveMiningResult result;
  for (std::size_t a = 0; a < corpus.size(); ++a) {
    if (slots[a]) {
      result.mined.push_back(std::move(*slots[a]));
    } else {
      result.skipped.push_back(a);
    }
  }
  if (!result.skipped.empty()) logger().info("{} anchors skipped: no positive candidates", result.skipped.size());
  return result;
}

}  // namespace debcse
