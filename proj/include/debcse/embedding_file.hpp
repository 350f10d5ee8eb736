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
#include <span>
#include <vector>

namespace debcse {

/// Dense count x dim float matrix, row i aligned with sentence id i.
///
/// Construction validates every value (finite) and every row (non-zero norm);
/// violations raise FormatError. Norms are cached in double precision.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t count, std::size_t dim, std::vector<float> data);

  std::size_t count() const { return count_; }
  std::size_t dim() const { return dim_; }

  std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  std::span<const float> data() const { return data_; }
  double norm(std::size_t i) const { return norms_[i]; }
  std::span<const double> norms() const { return norms_; }

  friend bool operator==(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
    return a.count_ == b.count_ && a.dim_ == b.dim_ && a.data_ == b.data_;
  }

 private:
  std::size_t count_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> data_;
  std::vector<double> norms_;
};

inline constexpr std::uint32_t kEmbeddingFormatVersion = 1;

/// DEBC layout, all little-endian: "DEBC", u32 version, u64 count, u32 dim,
/// then count*dim IEEE-754 binary32 values row-major.
void write_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& path);
EmbeddingMatrix read_embeddings(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_embeddings(const EmbeddingMatrix& matrix);
EmbeddingMatrix decode_embeddings(std::span<const std::uint8_t> bytes);

}  // namespace debcse
