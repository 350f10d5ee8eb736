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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "debcse/corpus.hpp"
#include "debcse/error.hpp"

namespace debcse {

/// Levenshtein distance with unit insert/delete/substitute costs over any
/// equality-comparable sequences. Two-row DP, O(|a||b|) time.
template <typename T>
std::size_t levenshtein(std::span<const T> a, std::span<const T> b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

/// Token-level edit distance.
std::size_t edit_distance(const Tokens& a, const Tokens& b);

/// Edit distance over Unicode code points of the two texts.
std::size_t char_edit_distance(std::string_view a, std::string_view b);

enum class OverlapMode {
  kTypes,         // shared = number of distinct tokens present in both
  kMultiplicity,  // shared = sum over tokens of min(count in a, count in b)
};

/// shared / max(|a|, |b|) with |a|, |b| the token counts. InvalidArgument when
/// both lists are empty.
double lexical_overlap(const Tokens& a, const Tokens& b, OverlapMode mode = OverlapMode::kMultiplicity);

/// dot(u, v) / (|u| |v|) accumulated in double and clamped to [-1, 1].
/// InvalidArgument on dimension mismatch or a zero-norm input.
template <typename T, typename U>
double cosine(std::span<const T> u, std::span<const U> v) {
  if (u.size() != v.size()) throw InvalidArgument("cosine: dimension mismatch");
  double dot = 0.0;
  double uu = 0.0;
  double vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = static_cast<double>(u[i]);
    const double b = static_cast<double>(v[i]);
    dot += a * b;
    uu += a * a;
    vv += b * b;
  }
  if (!(uu > 0.0) || !(vv > 0.0)) throw InvalidArgument("cosine: zero-norm vector");
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

inline double cosine(const std::vector<double>& u, const std::vector<double>& v) {
  return cosine(std::span<const double>(u), std::span<const double>(v));
}

/// Max-shifted softmax. InvalidArgument on empty or non-finite input.
std::vector<double> softmax(std::span<const double> values);

enum class EditGranularity { kToken, kCharacter };

struct SurfaceOptions {
  EditGranularity granularity = EditGranularity::kToken;
  /// Divide each distance by the longer sequence length before the softmax.
  bool length_normalized = false;
};

/// Raw distances fed to the surface softmax for one anchor.
std::vector<double> surface_distances(const Sentence& anchor, std::span<const Sentence> candidates,
                                      const SurfaceOptions& options = {});

/// s_sur_j = 1 - softmax(d)_j over the anchor's distances to every candidate.
std::vector<double> surface_scores_from_distances(std::span<const double> distances);

std::vector<double> surface_scores(const Sentence& anchor, std::span<const Sentence> candidates,
                                   const SurfaceOptions& options = {});

/// softmax over cosine(anchor, candidate_k).
std::vector<double> semantic_scores_from_cosines(std::span<const double> cosines);

std::vector<double> semantic_scores(std::span<const double> anchor, std::span<const std::vector<double>> candidates);

/// One scored member of a candidate set. s_sur/s_sem are only meaningful after
/// normalisation over the full set.
struct ScoredCandidate {
  std::size_t candidate_id = 0;
  std::size_t edit = 0;
  double cosine = 0.0;
  double s_sur = 0.0;
  double s_sem = 0.0;
};

/// Fills s_sur and s_sem from the edit and cosine fields of the whole set.
void normalize_scores(std::span<ScoredCandidate> members, std::span<const double> distances);

}  // namespace debcse
