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

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "debcse/corpus.hpp"
#include "debcse/similarity.hpp"

namespace debcse {

inline constexpr std::size_t kHistogramBins = 40;

/// Fixed 40-bin histogram over [-1, 1]; the value 1.0 lands in the last bin.
struct CosineHistogram {
  std::array<std::size_t, kHistogramBins> counts{};

  void add(double value);
  std::size_t total() const;
  static double bin_lo(std::size_t bin);
  static double bin_hi(std::size_t bin);
};

struct TextPair {
  Tokens a;
  Tokens b;
};

/// Maps a token list to a dense vector. Used for semantic histograms.
using EmbeddingSource = std::function<std::vector<double>(const Tokens&)>;

struct BiasReport {
  double mean_overlap_pos = 0.0;
  double mean_overlap_neg = 0.0;
  CosineHistogram sem_hist_pos;
  CosineHistogram sem_hist_neg;
  std::size_t pos_pairs = 0;
  std::size_t neg_pairs = 0;
};

/// Mean lexical overlap and cosine histogram per side. InvalidArgument when
/// either list is empty.
BiasReport bias_report(std::span<const TextPair> positives, std::span<const TextPair> negatives,
                       const EmbeddingSource& embed, OverlapMode mode = OverlapMode::kMultiplicity);

/// Mean overlap only.
double mean_overlap(std::span<const TextPair> pairs, OverlapMode mode = OverlapMode::kMultiplicity);

/// Writes "bin_lo,bin_hi,count" rows with a header line.
void write_histogram_csv(const CosineHistogram& hist, const std::filesystem::path& path);

/// Mean squared Euclidean distance between L2-normalised members of each pair.
double alignment(std::span<const std::pair<std::vector<double>, std::vector<double>>> pairs);

/// log of the mean over ordered pairs i != j of exp(-2 |x_i - x_j|^2), on
/// L2-normalised vectors. InvalidArgument for fewer than 2 vectors.
double uniformity(std::span<const std::vector<double>> vectors);

/// Average ranks (1-based); ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation of average ranks. InvalidArgument on length mismatch,
/// fewer than 2 items, or a constant input.
double spearman(std::span<const double> pred, std::span<const double> gold);

struct StsPair {
  double gold = 0.0;
  std::string a;
  std::string b;
};

struct StsDataset {
  std::vector<StsPair> pairs;
};

/// Tab-separated gold, sentence_a, sentence_b. Scores must lie in [0, 5].
StsDataset load_sts(const std::filesystem::path& path);

/// Spearman between pair cosines and gold scores. `embed` maps tokenized
/// sentences to vectors.
double eval_sts(const StsDataset& dataset, const EmbeddingSource& embed);

/// Spearman with precomputed embeddings: row 2i is sentence a of pair i, row
/// 2i + 1 is sentence b.
double eval_sts(const StsDataset& dataset, std::span<const std::vector<double>> pair_embeddings);

}  // namespace debcse
