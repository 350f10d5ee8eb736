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
#include <fstream>
#include <random>
#include <sstream>

#include "debcse/analysis.hpp"
#include "support/synthetic.hpp"

using namespace debcse;

namespace {

using Vec = std::vector<double>;

double hand_pearson(const Vec& x, const Vec& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("spearman exact cases") {
  CHECK(spearman(Vec{1, 2, 3}, Vec{10, 20, 30}) == 1.0);
  CHECK(spearman(Vec{1, 2, 3}, Vec{30, 20, 10}) == -1.0);
  CHECK(average_ranks(Vec{1, 1, 2}) == Vec{1.5, 1.5, 3});
  CHECK(average_ranks(Vec{3, 1, 3, 2, 3}) == Vec{4, 1, 4, 2, 4});
  CHECK(std::abs(spearman(Vec{1, 1, 2}, Vec{1, 2, 3}) - hand_pearson({1.5, 1.5, 3}, {1, 2, 3})) < 1e-12);
  CHECK(std::abs(spearman(Vec{1, 1, 2}, Vec{1, 2, 3}) - std::sqrt(3.0) / 2.0) < 1e-12);
  CHECK_THROWS_AS(spearman(Vec{1, 2}, Vec{1, 2, 3}), InvalidArgument);
  CHECK_THROWS_AS(spearman(Vec{1}, Vec{1}), InvalidArgument);
  CHECK_THROWS_AS(spearman(Vec{2, 2, 2}, Vec{1, 2, 3}), InvalidArgument);
}

TEST_CASE("spearman is invariant under increasing transforms") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    Vec a(30), b(30);
    for (auto& x : a) x = std::round(u(rng) * 4) / 4;
    for (auto& x : b) x = u(rng);
    Vec ta = a, tb = b;
    for (auto& x : ta) x = std::exp(x) + 3.0;
    for (auto& x : tb) x = x * x * x;
    CHECK(spearman(ta, tb) == spearman(a, b));
  }
}

TEST_CASE("alignment and uniformity closed forms") {
  using Pair = std::pair<Vec, Vec>;
  const std::vector<Pair> same{{{1, 0}, {1, 0}}, {{0, 2}, {0, 5}}};
  CHECK(std::abs(alignment(same)) < 1e-9);
  const std::vector<Pair> antipodal{{{0.6, 0.8}, {-0.6, -0.8}}};
  CHECK(std::abs(alignment(antipodal) - 4.0) < 1e-9);
  const std::vector<Vec> collapsed{{1, 1}, {2, 2}, {3, 3}};
  CHECK(std::abs(uniformity(collapsed)) < 1e-9);
  const std::vector<Vec> two{{0, 1}, {0, -1}};
  CHECK(std::abs(uniformity(two) + 8.0) < 1e-9);
  const std::vector<Vec> spread{{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const std::vector<Vec> bunched{{1, 0}, {1, 0.1}, {1, -0.1}, {1, 0.2}};
  CHECK(uniformity(spread) < uniformity(bunched));
  CHECK_THROWS_AS(uniformity(std::vector<Vec>{{1, 0}}), InvalidArgument);
  CHECK_THROWS_AS(alignment(std::vector<Pair>{}), InvalidArgument);
}

TEST_CASE("alignment and uniformity bounds") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec> v(6, Vec(4));
    for (auto& x : v) {
      for (auto& y : x) y = n(rng);
    }
    std::vector<std::pair<Vec, Vec>> pairs{{v[0], v[1]}, {v[2], v[3]}};
    CHECK(alignment(pairs) >= 0.0);
    CHECK(alignment(pairs) <= 4.0);
    CHECK(uniformity(v) <= 0.0);
    CHECK(uniformity(v) >= -8.0);
  }
}

TEST_CASE("histogram") {
  CosineHistogram h;
  for (double v : {-1.0, -0.96, 0.0, 0.049, 0.05, 0.999, 1.0}) h.add(v);
  CHECK(h.total() == 7);
  CHECK(h.counts[0] == 2);
  CHECK(h.counts[20] == 2);
  CHECK(h.counts[21] == 1);
  CHECK(h.counts[39] == 2);
  CHECK(CosineHistogram::bin_lo(0) == -1.0);
  CHECK(std::abs(CosineHistogram::bin_hi(39) - 1.0) < 1e-12);

  const auto dir = testing::fresh_dir("hist");
  write_histogram_csv(h, dir / "h.csv");
  std::ifstream in(dir / "h.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "bin_lo,bin_hi,count");
  std::size_t lines = 0;
  std::size_t mass = 0;
  while (std::getline(in, line)) {
    ++lines;
    mass += std::stoul(line.substr(line.rfind(',') + 1));
  }
  CHECK(lines == 40);
  CHECK(mass == 7);
}

TEST_CASE("bias_report") {
  const EmbeddingSource embed = [](const Tokens& t) {
    Vec v(3, 0.0);
    for (const auto& w : t) v[w.size() % 3] += 1.0;
    return v;
  };
  const std::vector<TextPair> identical{{{"the", "cat"}, {"the", "cat"}}, {{"a", "dog", "ran"}, {"a", "dog", "ran"}}};
  const std::vector<TextPair> disjoint{{{"the", "cat"}, {"a", "dog"}}, {{"x"}, {"y", "z"}}};
  const BiasReport r = bias_report(identical, disjoint, embed);
  CHECK(r.mean_overlap_pos == 1.0);
  CHECK(r.mean_overlap_neg == 0.0);
  CHECK(r.sem_hist_pos.total() == r.pos_pairs);
  CHECK(r.sem_hist_neg.total() == r.neg_pairs);
  CHECK(r.sem_hist_pos.counts[39] == 2);
  CHECK_THROWS_AS(bias_report({}, disjoint, embed), InvalidArgument);
}

TEST_CASE("random pairs on a desk corpus have low overlap") {
  const Corpus corpus = ingest_lines(testing::desk_corpus(2000, 9)).corpus;
  std::mt19937_64 rng(3);
  std::vector<TextPair> pairs;
  for (int k = 0; k < 2000; ++k) {
    const auto a = rng() % corpus.size();
    auto b = rng() % corpus.size();
    if (a == b) b = (b + 1) % corpus.size();
    pairs.push_back({corpus[a].tokens, corpus[b].tokens});
  }
  const double overlap = mean_overlap(pairs);
  CHECK(overlap > 0.0);
  CHECK(overlap < 0.15);
}

TEST_CASE("load_sts and eval_sts") {
  const auto dir = testing::fresh_dir("sts");
  testing::write_lines(dir / "ok.tsv", {"4.5\tthe cat sat\tthe cat sat down", "0.5\ta dog\tblue sky today", "2\tx y\tx z"});
  const StsDataset ds = load_sts(dir / "ok.tsv");
  REQUIRE(ds.pairs.size() == 3);
  CHECK(ds.pairs[0].gold == 4.5);
  CHECK(ds.pairs[1].b == "blue sky today");

  testing::write_lines(dir / "cols.tsv", {"4.5\tonly two"});
  CHECK_THROWS_AS(load_sts(dir / "cols.tsv"), DataError);
  testing::write_lines(dir / "range.tsv", {"5.5\ta\tb"});
  CHECK_THROWS_AS(load_sts(dir / "range.tsv"), DataError);
  testing::write_lines(dir / "score.tsv", {"high\ta\tb"});
  CHECK_THROWS_AS(load_sts(dir / "score.tsv"), DataError);
  testing::write_lines(dir / "one.tsv", {"1\ta\tb"});
  CHECK_THROWS_AS(eval_sts(load_sts(dir / "one.tsv"), std::vector<Vec>{{1, 0}, {0, 1}}), InvalidArgument);
}

TEST_CASE("eval_sts on exact cosines and shuffled gold") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> n(0, 1);
  StsDataset ds;
  std::vector<Vec> emb;
  for (int i = 0; i < 1000; ++i) {
    Vec a{n(rng), n(rng), n(rng)};
    Vec b{n(rng), n(rng), n(rng)};
    const double c = (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]) /
                     std::sqrt((a[0] * a[0] + a[1] * a[1] + a[2] * a[2]) * (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]));
    ds.pairs.push_back({2.5 + 2.5 * c, "", ""});
    emb.push_back(a);
    emb.push_back(b);
  }
  CHECK(std::abs(eval_sts(ds, emb) - 1.0) < 1e-12);

  std::vector<double> gold;
  for (const auto& p : ds.pairs) gold.push_back(p.gold);
  std::shuffle(gold.begin(), gold.end(), rng);
  for (std::size_t i = 0; i < gold.size(); ++i) ds.pairs[i].gold = gold[i];
  CHECK(std::abs(eval_sts(ds, emb)) < 0.1);
}

TEST_CASE("eval_sts with an embedding source") {
  StsDataset ds;
  ds.pairs = {{5.0, "a b", "a b"}, {1.0, "a b", "c d"}, {3.0, "a b", "a d"}};
  const EmbeddingSource embed = [](const Tokens& t) {
    Vec v(4, 0.0);
    for (const auto& w : t) v[static_cast<std::size_t>(w[0] - 'a')] += 1.0;
    return v;
  };
  CHECK(eval_sts(ds, embed) == doctest::Approx(1.0));
}
