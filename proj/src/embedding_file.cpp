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

#include "debcse/embedding_file.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "debcse/error.hpp"

namespace debcse {
namespace {

constexpr std::uint8_t kMagic[4] = {0x44, 0x45, 0x42, 0x43};
constexpr std::size_t kHeaderSize = 4 + 4 + 8 + 4;

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

template <typename T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[offset + i]) << (8 * i);
  return value;
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::size_t count, std::size_t dim, std::vector<float> data)
    : count_(count), dim_(dim), data_(std::move(data)) {
  if (dim_ == 0) throw FormatError(FormatError::Kind::kTruncated, "embedding dim must be > 0");
  if (data_.size() != count_ * dim_) {
    throw FormatError(FormatError::Kind::kTruncated, "embedding payload does not match count x dim");
  }
  norms_.resize(count_);
  for (std::size_t i = 0; i < count_; ++i) {
    double sum = 0.0;
    for (float v : row(i)) {
      if (!std::isfinite(v)) {
        throw FormatError(FormatError::Kind::kNonFinite, "non-finite value in row " + std::to_string(i));
      }
      sum += static_cast<double>(v) * static_cast<double>(v);
    }
    norms_[i] = std::sqrt(sum);
    if (!(norms_[i] > 0.0)) throw FormatError(FormatError::Kind::kZeroNorm, "zero-norm row " + std::to_string(i));
  }
}

std::vector<std::uint8_t> encode_embeddings(const EmbeddingMatrix& matrix) {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + matrix.data().size() * 4);
  for (std::uint8_t b : kMagic) out.push_back(b);
  put_le<std::uint32_t>(out, kEmbeddingFormatVersion);
  put_le<std::uint64_t>(out, matrix.count());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(matrix.dim()));
  for (float v : matrix.data()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

EmbeddingMatrix decode_embeddings(std::span<const std::uint8_t> bytes) {
  using Kind = FormatError::Kind;
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError(Kind::kBadMagic, "bad magic");
  if (bytes.size() < kHeaderSize) throw FormatError(Kind::kTruncated, "truncated header");
  const auto version = get_le<std::uint32_t>(bytes, 4);
  if (version != kEmbeddingFormatVersion) {
    throw FormatError(Kind::kVersionMismatch, "unsupported version " + std::to_string(version));
  }
  const auto count = get_le<std::uint64_t>(bytes, 8);
  const auto dim = get_le<std::uint32_t>(bytes, 16);
  const std::size_t payload = bytes.size() - kHeaderSize;
  if (dim == 0 || count > payload / 4 / dim) {
    throw FormatError(Kind::kTruncated, "payload holds fewer than count x dim values");
  }
  if (payload != count * dim * 4) throw FormatError(Kind::kTrailingData, "bytes after payload");
  std::vector<float> data(count * dim);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = std::bit_cast<float>(get_le<std::uint32_t>(bytes, kHeaderSize + 4 * i));
  }
  return EmbeddingMatrix(count, dim, std::move(data));
}

void write_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = encode_embeddings(matrix);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(FormatError::Kind::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError(FormatError::Kind::kIo, "write failure on " + path.string());
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatError::Kind::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_embeddings(bytes);
}

}  // namespace debcse
