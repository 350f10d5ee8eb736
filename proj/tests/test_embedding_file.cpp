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
#include <fstream>
#include <limits>
#include <random>

#include "debcse/embedding_file.hpp"
#include "debcse/error.hpp"
#include "support/synthetic.hpp"

using namespace debcse;

namespace {

FormatError::Kind decode_kind(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_embeddings(bytes);
  } catch (const FormatError& e) {
    return e.kind();
  }
  FAIL("expected a FormatError");
  return FormatError::Kind::kIo;
}

}  // namespace

TEST_CASE("2x3 matrix round-trips bit-exactly through a file") {
  const EmbeddingMatrix m(2, 3, {0.5f, -1.25f, 3.0f, 1e-20f, 7.0f, -0.0f});
  const auto dir = testing::fresh_dir("embfile");
  write_embeddings(m, dir / "m.debc");
  const EmbeddingMatrix back = read_embeddings(dir / "m.debc");
  CHECK(back == m);
  CHECK(encode_embeddings(back) == encode_embeddings(m));
}

TEST_CASE("header layout is little-endian DEBC v1") {
  const EmbeddingMatrix m(1, 2, {1.0f, 2.0f});
  const auto bytes = encode_embeddings(m);
  REQUIRE(bytes.size() == 20 + 8);
  CHECK(bytes[0] == 0x44);
  CHECK(bytes[1] == 0x45);
  CHECK(bytes[2] == 0x42);
  CHECK(bytes[3] == 0x43);
  CHECK(bytes[4] == 1);
  CHECK(bytes[8] == 1);
  CHECK(bytes[16] == 2);
  // 1.0f = 0x3F800000
  CHECK(bytes[20] == 0x00);
  CHECK(bytes[23] == 0x3F);
}

TEST_CASE("round trip property over random matrices") {
  std::mt19937_64 rng(5);
  std::normal_distribution<float> normal(0.0f, 3.0f);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t count = 1 + rng() % 20;
    const std::size_t dim = 1 + rng() % 16;
    std::vector<float> data(count * dim);
    for (auto& v : data) v = normal(rng);
    for (std::size_t r = 0; r < count; ++r) data[r * dim] = 1.0f + std::abs(data[r * dim]);
    const EmbeddingMatrix m(count, dim, data);
    const EmbeddingMatrix back = decode_embeddings(encode_embeddings(m));
    CHECK(back == m);
    for (std::size_t r = 0; r < count; ++r) {
      double sq = 0;
      for (float v : m.row(r)) sq += double(v) * double(v);
      CHECK(std::abs(m.norm(r) - std::sqrt(sq)) <= 1e-6 * std::sqrt(sq));
    }
  }
}

TEST_CASE("reader rejects malformed files") {
  const auto good = encode_embeddings(EmbeddingMatrix(10, 2, std::vector<float>(20, 1.0f)));

  auto bad_magic = good;
  bad_magic[0] = 'X';
  bad_magic[1] = 'X';
  bad_magic[2] = 'X';
  bad_magic[3] = 'X';
  CHECK(decode_kind(bad_magic) == FormatError::Kind::kBadMagic);

  auto version = good;
  version[4] = 2;
  CHECK(decode_kind(version) == FormatError::Kind::kVersionMismatch);

  auto nine_rows = good;
  nine_rows.resize(good.size() - 8);
  CHECK(decode_kind(nine_rows) == FormatError::Kind::kTruncated);

  auto header_only = good;
  header_only.resize(10);
  CHECK(decode_kind(header_only) == FormatError::Kind::kTruncated);

  auto trailing = good;
  trailing.push_back(0);
  CHECK(decode_kind(trailing) == FormatError::Kind::kTrailingData);

  auto nan = good;
  nan[20] = 0x00;
  nan[21] = 0x00;
  nan[22] = 0xC0;
  nan[23] = 0x7F;
  CHECK(decode_kind(nan) == FormatError::Kind::kNonFinite);

  auto zero = good;
  for (int i = 20; i < 28; ++i) zero[i] = 0;
  CHECK(decode_kind(zero) == FormatError::Kind::kZeroNorm);

  CHECK_THROWS_AS(read_embeddings("/nonexistent.debc"), FormatError);
}

TEST_CASE("constructor validates values") {
  CHECK_THROWS_AS(EmbeddingMatrix(1, 2, {0.0f, 0.0f}), FormatError);
  CHECK_THROWS_AS(EmbeddingMatrix(1, 2, {std::numeric_limits<float>::infinity(), 1.0f}), FormatError);
  CHECK_THROWS_AS(EmbeddingMatrix(2, 2, {1.0f, 1.0f}), FormatError);
}
