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

#include <cmath>
#include <random>
#include <set>

#include "debcse/similarity.hpp"
#include "support/oracles.hpp"

using namespace debcse;
using doctest::Approx;

namespace {

Tokens random_tokens(std::mt19937_64& rng, std::size_t max_len, std::size_t alphabet) {
  Tokens t(rng() % (max_len + 1));
  for (auto& s : t) s = std::string(1, static_cast<char>('a' + rng() % alphabet));
  return t;
}

Sentence sentence(Tokens t) { return Sentence{0, 0, join_tokens(t), std::move(t)}; }

}  // namespace

TEST_CASE("edit_distance examples") {
  CHECK(edit_distance({"a", "b", "c"}, {"a", "b", "c"}) == 0);
  CHECK(edit_distance({"a", "b", "c"}, {"a", "c"}) == 1);
  CHECK(edit_distance({}, {"x", "y"}) == 2);
  CHECK(char_edit_distance("kitten", "sitting") == 3);
  CHECK(char_edit_distance("\xC3\xA9t\xC3\xA9", "ete") == 2);
}

TEST_CASE("edit_distance is a metric and matches the full-table oracle") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    const Tokens a = random_tokens(rng, 8, 4);
    const Tokens b = random_tokens(rng, 8, 4);
    const Tokens c = random_tokens(rng, 8, 4);
    const std::size_t ab = edit_distance(a, b);
    CHECK(ab == testing::full_table_edit_distance(a, b));
    CHECK(ab == edit_distance(b, a));
    CHECK((ab == 0) == (a == b));
    CHECK(ab <= edit_distance(a, c) + edit_distance(c, b));
  }
}

TEST_CASE("lexical_overlap") {
  CHECK(lexical_overlap({"the", "cat"}, {"the", "cat"}) == 1.0);
  CHECK(lexical_overlap({"the", "cat", "sat"}, {"the", "cat", "ran", "home"}) == 0.5);
  CHECK(lexical_overlap({"a"}, {"b"}) == 0.0);
  CHECK(lexical_overlap({"a", "a", "b"}, {"a", "a", "c"}, OverlapMode::kTypes) == Approx(1.0 / 3.0));
  CHECK(lexical_overlap({"a", "a", "b"}, {"a", "a", "b"}) == 1.0);
  CHECK(lexical_overlap({"a", "a", "b"}, {"a", "a", "c"}, OverlapMode::kMultiplicity) == Approx(2.0 / 3.0));
  CHECK_THROWS_AS(lexical_overlap({}, {}), InvalidArgument);
  CHECK(lexical_overlap({}, {"x"}) == 0.0);
}

TEST_CASE("lexical_overlap properties") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 500; ++trial) {
    Tokens a = random_tokens(rng, 6, 5);
    Tokens b = random_tokens(rng, 6, 5);
    if (a.empty() && b.empty()) continue;
    const double ab = lexical_overlap(a, b);
    CHECK(ab == lexical_overlap(b, a));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
    const std::set<std::string> sa(a.begin(), a.end());
    const std::set<std::string> sb(b.begin(), b.end());
    const std::multiset<std::string> ma(a.begin(), a.end());
    const std::multiset<std::string> mb(b.begin(), b.end());
    CHECK((ab == 1.0) == (ma == mb));
    if (ab == 1.0) CHECK((sa == sb && a.size() == b.size()));
    const double types = lexical_overlap(a, b, OverlapMode::kTypes);
    CHECK(types <= ab);
    if (sa.size() == a.size() && sb.size() == b.size()) CHECK(types == ab);
  }
}

TEST_CASE("cosine") {
  const std::vector<double> u{3.0, -2.0, 1.0};
  CHECK(cosine(u, u) == Approx(1.0));
  CHECK(cosine(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 0.0);
  CHECK(std::abs(cosine(std::vector<double>{1, 0}, std::vector<double>{1, 1}) - 0.70710678) < 1e-8);
  CHECK_THROWS_AS(cosine(std::vector<double>{0, 0}, std::vector<double>{1, 1}), InvalidArgument);
  CHECK_THROWS_AS(cosine(std::vector<double>{1}, std::vector<double>{1, 1}), InvalidArgument);
}

TEST_CASE("cosine is scale invariant") {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> n(0, 1);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> u(5), v(5);
    for (auto& x : u) x = n(rng);
    for (auto& x : v) x = n(rng);
    const double a = scale(rng);
    const double b = scale(rng);
    std::vector<double> su = u, sv = v;
    for (auto& x : su) x *= a;
    for (auto& x : sv) x *= b;
    CHECK(std::abs(cosine(su, sv) - cosine(u, v)) < 1e-9);
  }
}

TEST_CASE("softmax") {
  const std::vector<double> zeros{0, 0};
  CHECK(softmax(zeros) == std::vector<double>{0.5, 0.5});
  const std::vector<double> single{7.3};
  CHECK(softmax(single) == std::vector<double>{1.0});
  const std::vector<double> one_two{1, 2};
  const auto p = softmax(one_two);
  CHECK(std::abs(p[0] - 1.0 / (1.0 + std::exp(1.0))) < 1e-12);
  CHECK(std::abs(p[0] - 0.26894) < 1e-5);
  CHECK(std::abs(p[1] - 0.73106) < 1e-5);
  CHECK_THROWS_AS(softmax(std::vector<double>{}), InvalidArgument);
  CHECK_THROWS_AS(softmax(std::vector<double>{1.0, NAN}), InvalidArgument);
}

TEST_CASE("softmax properties") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> v(1 + rng() % 12);
    for (auto& x : v) x = u(rng);
    const auto p = softmax(v);
    double sum = 0;
    for (double x : p) {
      CHECK(x > 0.0);
      CHECK(x <= 1.0);
      sum += x;
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
    const double shift = u(rng);
    std::vector<double> shifted = v;
    for (auto& x : shifted) x += shift;
    const auto q = softmax(shifted);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::abs(p[i] - q[i]) < 1e-9);
  }
}

TEST_CASE("surface_scores examples") {
  const Sentence anchor = sentence({"a", "b", "c"});
  const std::vector<Sentence> one{sentence({"x"})};
  CHECK(surface_scores(anchor, one) == std::vector<double>{0.0});

  const std::vector<Sentence> equal{sentence({"a", "b"}), sentence({"b", "c"})};
  const auto s = surface_scores(anchor, equal);
  CHECK(s[0] == Approx(0.5));
  CHECK(s[1] == Approx(0.5));

  // edits 1 and 2
  const std::vector<Sentence> mixed{sentence({"a", "b"}), sentence({"a"})};
  const auto m = surface_scores(anchor, mixed);
  CHECK(std::abs(m[0] - 0.73106) < 1e-5);
  CHECK(std::abs(m[1] - 0.26894) < 1e-5);
}

TEST_CASE("surface_scores normalisation and ordering") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 300; ++trial) {
    const Sentence anchor = sentence(random_tokens(rng, 8, 4));
    std::vector<Sentence> cands;
    const std::size_t n = 1 + rng() % 10;
    for (std::size_t i = 0; i < n; ++i) cands.push_back(sentence(random_tokens(rng, 8, 4)));
    const auto s = surface_scores(anchor, cands);
    double sum = 0;
    for (double x : s) sum += 1.0 - x;
    CHECK(std::abs(sum - 1.0) < 1e-9);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const auto ei = edit_distance(anchor.tokens, cands[i].tokens);
        const auto ej = edit_distance(anchor.tokens, cands[j].tokens);
        if (ei < ej) CHECK(s[i] > s[j]);
        if (ei == ej) CHECK(s[i] == s[j]);
      }
    }
  }
}

TEST_CASE("surface options") {
  const Sentence anchor = sentence({"abc", "de"});
  const std::vector<Sentence> cands{sentence({"abd", "de"}), sentence({"x"})};
  const auto chars = surface_distances(anchor, cands, {EditGranularity::kCharacter, false});
  CHECK(chars[0] == 1.0);
  CHECK(chars[1] == 6.0);
  const auto norm = surface_distances(anchor, cands, {EditGranularity::kToken, true});
  CHECK(norm[0] == 0.5);
  CHECK(norm[1] == 1.0);
}

TEST_CASE("semantic_scores") {
  const std::vector<double> anchor{1, 0};
  const std::vector<std::vector<double>> one{{0.3, 0.2}};
  CHECK(semantic_scores(anchor, one) == std::vector<double>{1.0});
  const std::vector<std::vector<double>> same{{1, 1}, {1, -1}};
  const auto s = semantic_scores(anchor, same);
  CHECK(s[0] == Approx(0.5));
  const std::vector<std::vector<double>> diff{{2, 0}, {0, 3}};
  const auto d = semantic_scores(anchor, diff);
  CHECK(std::abs(d[0] - 0.73106) < 1e-5);
  CHECK(std::abs(d[1] - 0.26894) < 1e-5);

  std::mt19937_64 rng(41);
  std::normal_distribution<double> n(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(4);
    for (auto& x : a) x = n(rng);
    std::vector<std::vector<double>> c(1 + rng() % 8, std::vector<double>(4));
    for (auto& v : c) {
      for (auto& x : v) x = n(rng);
    }
    const auto p = semantic_scores(a, c);
    for (std::size_t i = 0; i < c.size(); ++i) {
      for (std::size_t j = 0; j < c.size(); ++j) {
        if (cosine(a, c[i]) < cosine(a, c[j])) CHECK(p[i] < p[j]);
      }
    }
  }
}
