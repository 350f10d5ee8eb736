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
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "debcse/corpus.hpp"
#include "debcse/embedding_file.hpp"

namespace debcse {

inline constexpr const char* kUnknownToken = "<unk>";

/// Toy sentence encoder: h = tanh(proj * mean(embed rows of tokens) + proj_bias).
/// Row 0 of the embedding table is reserved for unknown tokens.
struct EncoderParams {
  std::vector<std::string> vocab;  // row index -> token, vocab[0] == kUnknownToken
  std::unordered_map<std::string, std::size_t> index;
  Eigen::MatrixXd embed_table;  // V x d
  Eigen::MatrixXd proj;         // d x d
  Eigen::VectorXd proj_bias;    // d
  bool use_tanh = true;

  std::size_t dim() const { return static_cast<std::size_t>(proj.rows()); }
  std::size_t vocab_size() const { return vocab.size(); }
  std::size_t row_of(const std::string& token) const;

  /// Rebuilds `index` from `vocab`.
  void reindex();
};

struct EncoderInit {
  std::size_t dim = 64;
  std::uint64_t seed = 0;
  double embed_scale = 1.0;  // std of N(0, s^2) token embeddings
  double bias_scale = 0.0;   // std of the projection bias
};

/// Vocabulary = <unk> followed by the corpus tokens in ascending order.
/// Embeddings ~ N(0, embed_scale^2), proj ~ N(0, 1/d), bias ~ N(0, bias_scale^2).
EncoderParams init_encoder(const Corpus& corpus, const EncoderInit& init);

/// InvalidArgument for an empty token list.
Eigen::VectorXd encode(const EncoderParams& params, const Tokens& tokens);

/// Rows in the order of `sentences`.
Eigen::MatrixXd encode_all(const EncoderParams& params, const std::vector<Tokens>& sentences);

/// Encodes a corpus into the storage format.
EmbeddingMatrix embed_corpus(const EncoderParams& params, const Corpus& corpus);

/// Checkpoint = <base>.debc (embedding table in the embedding file format)
/// plus <base>.json (vocab, proj, proj_bias, use_tanh). The table is stored as
/// float32, so a reload rounds it to single precision.
void save_encoder(const EncoderParams& params, const std::filesystem::path& base);
EncoderParams load_encoder(const std::filesystem::path& base);

}  // namespace debcse
