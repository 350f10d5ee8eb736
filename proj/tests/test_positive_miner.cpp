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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "debcse/encoder.hpp"
#include "debcse/negative_miner.hpp"
#include "debcse/positive_miner.hpp"
#include "debcse/records.hpp"
#include "debcse/rng.hpp"
#include "debcse/sampling.hpp"
#include "support/synthetic.hpp"

using namespace debcse;

namespace {

Sentence make(const std::string& text, SentenceId id = 0) { return Sentence{id, id, text, tokenize(text)}; }

PositiveCandidatePool uniform_pool(std::size_t n) {
  PositiveCandidatePool pool;
  pool.anchor_id = 2;
  for (std::size_t k = 0; k < n; ++k) {
    pool.texts.push_back("c" + std::to_string(k));
    ScoredCandidate c;
    c.candidate_id = k;
    pool.members.push_back(c);
  }
  pool.p_pos.assign(n, 1.0 / static_cast<double>(n));
  return pool;
}

}  // namespace

TEST_CASE("inject and mask primitives") {
  const Tokens t{"the", "cat", "sat"};
  const std::vector<std::string> of{"of"};
  const std::vector<std::size_t> at1{1};
  CHECK(join_tokens(inject_tokens(t, of, at1)) == "the of cat sat");
  const std::vector<std::size_t> at2{2};
  CHECK(join_tokens(mask_tokens(t, at2, "[MASK]")) == "the cat [MASK]");
  const std::vector<std::size_t> bad{3};
  CHECK_THROWS_AS(mask_tokens(t, bad, "[MASK]"), InvalidArgument);
}

TEST_CASE("seeded injection replays") {
  const Sentence anchor = make("the cat sat");
  const std::vector<std::string> vocab{"of"};
  PositiveGenConfig cfg;
  cfg.candidates_per_anchor = 1;
  cfg.inject_probability = 1.0;
  cfg.inject_max = 1;
  // Replay the generator's draws to find a seed that injects at position 1.
  std::uint64_t seed = 0;
  for (;; ++seed) {
    KeyedRng rng(seed, anchor.id, Stream::kPositiveGenerate);
    rng.uniform();
    rng.below(1);
    rng.below(vocab.size());
    if (rng.below(anchor.tokens.size() + 1) == 1) break;
  }
  cfg.seed = seed;
  CHECK(generate_candidates(anchor, vocab, cfg) == std::vector<std::string>{"the of cat sat"});
}

TEST_CASE("seeded masking replays") {
  const Sentence anchor = make("the cat sat");
  PositiveGenConfig cfg;
  cfg.candidates_per_anchor = 1;
  cfg.inject_probability = 0.0;
  cfg.mask_max = 1;
  std::uint64_t seed = 0;
  for (;; ++seed) {
    KeyedRng rng(seed, anchor.id, Stream::kPositiveGenerate);
    rng.uniform();
    rng.below(1);
    if (uniform_subset(3, 1, rng)[0] == 2) break;
  }
  cfg.seed = seed;
  CHECK(generate_candidates(anchor, std::vector<std::string>{"of"}, cfg) == std::vector<std::string>{"the cat [MASK]"});
}

TEST_CASE("generate_candidates contract") {
  const std::vector<std::string> vocab{"the", "of", "and", "a"};
  CHECK_THROWS_AS(generate_candidates(make("two words"), vocab, PositiveGenConfig{}), InvalidArgument);

  const Sentence anchor = make("a quick brown fox jumps over dogs", 5);
  PositiveGenConfig cfg;
  cfg.seed = 9;
  const auto cands = generate_candidates(anchor, vocab, cfg);
  CHECK(cands.size() == cfg.candidates_per_anchor);
  std::set<Tokens> seen;
  for (const auto& c : cands) {
    const Tokens t = tokenize(c);
    CHECK(t != anchor.tokens);
    CHECK(seen.insert(t).second);
    const auto edit = edit_distance(anchor.tokens, t);
    CHECK(edit >= 1);
    CHECK(edit <= 2);
  }
  CHECK(generate_candidates(anchor, vocab, cfg) == cands);
  cfg.seed = 10;
  CHECK(generate_candidates(anchor, vocab, cfg) != cands);
}

TEST_CASE("unattainable candidate count returns fewer") {
  // Injection is forced and the vocabulary is just "x", so every edit of
  // "x x x" comes out as "x x x x".
  const Sentence anchor = make("x x x");
  PositiveGenConfig cfg;
  cfg.inject_probability = 1.0;
  cfg.inject_max = 1;
  cfg.max_retries = 4;
  const auto cands = generate_candidates(anchor, std::vector<std::string>{"x"}, cfg);
  CHECK(cands == std::vector<std::string>{"x x x x"});
}

TEST_CASE("external candidate file") {
  const auto dir = testing::fresh_dir("external");
  testing::write_lines(dir / "cands.jsonl", {
                                                candidate_record(0, "first one"),
                                                candidate_record(0, "second one"),
                                                candidate_record(0, "first one"),
                                                candidate_record(7, "too far"),
                                                "not json",
                                                R"({"anchor_id": "1", "candidate": "bad type"})",
                                                R"({"anchor_id": -1, "candidate": "negative"})",
                                                candidate_record(2, "third"),
                                            });
  const auto ext = load_external_candidates(dir / "cands.jsonl", 5);
  CHECK(ext.by_anchor.size() == 2);
  CHECK(ext.by_anchor.at(0) == std::vector<std::string>{"first one", "second one"});
  CHECK(ext.by_anchor.at(2) == std::vector<std::string>{"third"});
  CHECK(ext.out_of_range == 1);
  CHECK(ext.malformed == 3);
  CHECK_THROWS_AS(load_external_candidates(dir / "missing.jsonl", 5), DataError);
}

TEST_CASE("merge_candidates is order independent and drops the anchor") {
  const Sentence anchor = make("The cat sat.");
  const std::vector<std::string> ext{"the cat sat", "a cat sat", "the dog sat"};
  const auto merged = merge_candidates(anchor, {"the dog sat", "the cat [MASK]"}, ext);
  CHECK(merged == std::vector<std::string>{"a cat sat", "the cat [MASK]", "the dog sat"});
  const auto flipped = merge_candidates(anchor, {"the cat [MASK]", "the dog sat"}, {"the dog sat", "a cat sat"});
  CHECK(flipped == merged);
}

TEST_CASE("positive propensity") {
  const std::vector<double> sur{0.3};
  const std::vector<double> sem{0.7};
  CHECK(std::abs(positive_propensity(sur, sem, 0.8)[0] - 0.7) < 1e-12);

  const std::vector<double> sur3{0.2, 0.5, 0.3};
  const std::vector<double> sem3{0.5, 0.1, 0.4};
  const std::vector<double> one_minus_sur{0.8, 0.5, 0.7};
  CHECK(ipw_positive_probability(sur3, sem3, 0.0) == softmax(one_minus_sur));
  CHECK(ipw_positive_probability(sur3, sem3, 1.0) == softmax(sem3));
  const auto p1 = ipw_positive_probability(sur3, sem3, 1.0);
  CHECK((p1[0] > p1[2] && p1[2] > p1[1]));
  const std::vector<double> eq{0.5, 0.5, 0.5};
  const auto u = ipw_positive_probability(eq, eq, 0.8);
  for (double p : u) CHECK(p == doctest::Approx(1.0 / 3.0));

  for (double lambda : {0.0, 0.3, 0.8, 1.0}) {
    const auto pos = positive_propensity(sur3, sem3, lambda);
    const auto neg = negative_propensity(sur3, sem3, lambda);
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(pos[j] + neg[j] - 1.0) < 1e-12);
  }
}

TEST_CASE("positive propensity is monotone") {
  const std::vector<double> sur{0.4, 0.4, 0.4};
  const std::vector<double> sem{0.1, 0.2, 0.5};
  const auto p = positive_propensity(sur, sem, 0.5);
  CHECK((p[0] < p[1] && p[1] < p[2]));
  const std::vector<double> sur2{0.1, 0.2, 0.5};
  const std::vector<double> sem2{0.3, 0.3, 0.3};
  const auto q = positive_propensity(sur2, sem2, 0.5);
  CHECK((q[0] > q[1] && q[1] > q[2]));
}

TEST_CASE("score_candidates") {
  const Sentence anchor = make("the cat sat");
  const std::vector<double> a{1.0, 0.0};
  const auto single = score_candidates(anchor, a, {"the cat sat down"}, {{1.0, 0.5}}, 0.8);
  CHECK(single.p_pos == std::vector<double>{1.0});

  const auto dropped = score_candidates(anchor, a, {"The cat, sat", "a cat sat", "the cat"},
                                        {{1.0, 0.0}, {1.0, 0.2}, {0.3, 1.0}}, 0.8);
  CHECK(dropped.members.size() == 2);
  CHECK(dropped.texts == std::vector<std::string>{"a cat sat", "the cat"});
  double sum = 0;
  for (double p : dropped.p_pos) sum += p;
  CHECK(std::abs(sum - 1.0) < 1e-9);
  for (const auto& m : dropped.members) CHECK(m.edit >= 1);

  CHECK_THROWS_AS(score_candidates(anchor, a, {"x y z", "a b c"}, {{1.0, 0.0}}, 0.8), InvalidArgument);
  CHECK_THROWS_AS(score_candidates(anchor, a, {"the cat sat"}, {{1.0, 0.0}}, 0.8), DataError);
}

TEST_CASE("sample_positives") {
  const auto pool = uniform_pool(4);
  std::map<std::set<std::string>, std::size_t> counts;
  const std::size_t trials = 100000;
  for (std::size_t s = 0; s < trials; ++s) {
    const auto mined = sample_positives(pool, 2, s);
    counts[std::set<std::string>(mined.positives.begin(), mined.positives.end())] += 1;
  }
  CHECK(counts.size() == 6);
  for (const auto& [pair, c] : counts) {
    CHECK(pair.size() == 2);
    CHECK(std::abs(static_cast<double>(c) / trials - 1.0 / 6.0) < 0.01);
  }
  const auto two = uniform_pool(2);
  CHECK(sample_positives(two, 2, 4).positives.size() == 2);
  CHECK(sample_positives(pool, 2, 77).positives == sample_positives(pool, 2, 77).positives);
}

TEST_CASE("single-draw positive frequencies match p") {
  auto pool = uniform_pool(10);
  pool.p_pos = softmax(std::vector<double>{0.1, 0.9, 0.3, 0.5, 0.2, 0.7, 0.4, 0.8, 0.6, 0.0});
  std::vector<std::size_t> counts(10, 0);
  const std::size_t trials = 100000;
  for (std::size_t s = 0; s < trials; ++s) {
    const auto text = sample_positives(pool, 1, s).positives[0];
    counts[std::stoul(text.substr(1))] += 1;
  }
  for (std::size_t k = 0; k < 10; ++k) CHECK(std::abs(static_cast<double>(counts[k]) / trials - pool.p_pos[k]) < 0.01);
}

TEST_CASE("mine_all_positives on a desk corpus") {
  const Corpus corpus = ingest_lines(testing::desk_corpus(300, 21)).corpus;
  EncoderInit init;
  init.dim = 16;
  const EncoderParams enc = init_encoder(corpus, init);
  PositiveMiningConfig cfg;
  cfg.gen.seed = 5;
  const auto one = mine_all_positives(corpus, enc, cfg, nullptr, 1);
  CHECK(one.mined.size() == corpus.size());
  for (const auto& m : one.mined) {
    CHECK(m.positives.size() == cfg.m);
    CHECK(m.positives[0] != m.positives[1]);
    for (const auto& p : m.positives) CHECK(edit_distance(tokenize(p), corpus[m.anchor_id].tokens) >= 1);
  }
  const auto four = mine_all_positives(corpus, enc, cfg, nullptr, 4);
  REQUIRE(four.mined.size() == one.mined.size());
  for (std::size_t i = 0; i < one.mined.size(); ++i) CHECK(positive_record(one.mined[i]) == positive_record(four.mined[i]));

  const auto dir = testing::fresh_dir("pos_records");
  write_positives(one.mined, dir / "pos.jsonl");
  const auto back = read_positives(dir / "pos.jsonl");
  REQUIRE(back.size() == one.mined.size());
  CHECK(back[3].positives == one.mined[3].positives);
  CHECK(back[3].probabilities == one.mined[3].probabilities);
}

TEST_CASE("external-only mining") {
  const Corpus corpus = ingest_lines({"the cat sat down", "a dog ran home"}).corpus;
  EncoderInit init;
  init.dim = 8;
  const EncoderParams enc = init_encoder(corpus, init);
  const auto dir = testing::fresh_dir("external_only");
  testing::write_lines(dir / "c.jsonl", {candidate_record(0, "the cat sat"), candidate_record(0, "a cat sat down")});
  const auto ext = load_external_candidates(dir / "c.jsonl", corpus.size());
  PositiveMiningConfig cfg;
  cfg.rule_based = false;
  const auto result = mine_all_positives(corpus, enc, cfg, &ext);
  REQUIRE(result.mined.size() == 1);
  CHECK(result.mined[0].anchor_id == 0);
  CHECK(result.skipped == std::vector<SentenceId>{1});
  std::set<std::string> got(result.mined[0].positives.begin(), result.mined[0].positives.end());
  CHECK(got == std::set<std::string>{"the cat sat", "a cat sat down"});
}
