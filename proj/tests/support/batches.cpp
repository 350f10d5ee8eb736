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

#include "batches.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"

namespace debcse::testing {

BatchSetup random_batch(std::uint64_t seed, std::size_t d, std::size_t n, std::size_t m) {
  std::mt19937_64 rng(seed);
  auto sentence = [&] {
    Tokens t(2 + rng() % 4);
    for (auto& w : t) w = "v" + std::to_string(rng() % 12);
    return t;
  };
  BatchSetup s;
  std::vector<Sentence> all;
  for (std::size_t i = 0; i < n; ++i) {
    TrainingPair p;
    p.anchor_id = i;
    p.anchor = sentence();
    p.positive = sentence();
    for (std::size_t k = 0; k < m; ++k) p.negatives.push_back(sentence());
    all.push_back(Sentence{0, 0, join_tokens(p.anchor), p.anchor});
    all.push_back(Sentence{0, 0, join_tokens(p.positive), p.positive});
    for (const auto& neg : p.negatives) all.push_back(Sentence{0, 0, join_tokens(neg), neg});
    s.batch.pairs.push_back(std::move(p));
  }
  EncoderInit init;
  init.dim = d;
  init.seed = seed;
  init.bias_scale = 0.1;
  s.params = init_encoder(Corpus(std::move(all)), init);
  s.cfg.m = m;
  s.cfg.batch_size = n;
  s.cfg.seed = seed;
  s.batch.in_batch = choose_in_batch(n, m, seed, 0);
  return s;
}

GradCheck finite_difference_check(const BatchSetup& setup, double step) {
  const LossAndGradients analytic = gradients(setup.params, setup.batch, setup.cfg);
  EncoderParams p = setup.params;
  GradCheck out;
  auto compare = [&](double& value, double grad) {
    const double saved = value;
    value = saved + step;
    const double up = scalar_loss(p, setup.batch, setup.cfg);
    value = saved - step;
    const double down = scalar_loss(p, setup.batch, setup.cfg);
    value = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double scale = std::max(std::abs(numeric), std::abs(grad));
    const double rel = scale == 0.0 ? 0.0 : std::abs(numeric - grad) / scale;
    out.max_rel_error = std::max(out.max_rel_error, rel);
    ++out.checked;
  };
  for (Eigen::Index r = 0; r < p.embed_table.rows(); ++r) {
    for (Eigen::Index c = 0; c < p.embed_table.cols(); ++c) compare(p.embed_table(r, c), analytic.grads.embed_table(r, c));
  }
  for (Eigen::Index r = 0; r < p.proj.rows(); ++r) {
    for (Eigen::Index c = 0; c < p.proj.cols(); ++c) compare(p.proj(r, c), analytic.grads.proj(r, c));
  }
  for (Eigen::Index r = 0; r < p.proj_bias.size(); ++r) compare(p.proj_bias(r), analytic.grads.proj_bias(r));
  return out;
}

}  // namespace debcse::testing
