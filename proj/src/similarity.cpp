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

#include "debcse/similarity.hpp"

#include <map>
#include <set>

#include <unicode/utf8.h>

namespace debcse {
namespace {

std::vector<UChar32> code_points(std::string_view text) {
  std::vector<UChar32> out;
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c = 0;
    U8_NEXT(bytes, i, length, c);
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::size_t edit_distance(const Tokens& a, const Tokens& b) {
  return levenshtein(std::span<const std::string>(a), std::span<const std::string>(b));
}

std::size_t char_edit_distance(std::string_view a, std::string_view b) {
  const auto ca = code_points(a);
  const auto cb = code_points(b);
  return levenshtein(std::span<const UChar32>(ca), std::span<const UChar32>(cb));
}

double lexical_overlap(const Tokens& a, const Tokens& b, OverlapMode mode) {
  const std::size_t longer = std::max(a.size(), b.size());
  if (longer == 0) throw InvalidArgument("lexical_overlap: both sentences are empty");
  std::size_t shared = 0;
  if (mode == OverlapMode::kTypes) {
    const std::set<std::string> sa(a.begin(), a.end());
    const std::set<std::string> sb(b.begin(), b.end());
    for (const auto& t : sa) shared += sb.count(t);
  } else {
    std::map<std::string, std::size_t> ca;
    std::map<std::string, std::size_t> cb;
    for (const auto& t : a) ++ca[t];
    for (const auto& t : b) ++cb[t];
    for (const auto& [t, n] : ca) {
      auto it = cb.find(t);
      if (it != cb.end()) shared += std::min(n, it->second);
    }
  }
  return static_cast<double>(shared) / static_cast<double>(longer);
}

std::vector<double> softmax(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("softmax: empty input");
  double max_value = values[0];
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidArgument("softmax: non-finite input");
    max_value = std::max(max_value, v);
  }
  std::vector<double> out(values.size());
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = std::exp(values[i] - max_value);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

std::vector<double> surface_distances(const Sentence& anchor, std::span<const Sentence> candidates,
                                      const SurfaceOptions& options) {
  std::vector<double> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    double d = 0.0;
    double longer = 0.0;
    if (options.granularity == EditGranularity::kToken) {
      d = static_cast<double>(edit_distance(anchor.tokens, c.tokens));
      longer = static_cast<double>(std::max(anchor.tokens.size(), c.tokens.size()));
    } else {
      const std::string a = join_tokens(anchor.tokens);
      const std::string b = join_tokens(c.tokens);
      d = static_cast<double>(char_edit_distance(a, b));
      longer = static_cast<double>(std::max(code_points(a).size(), code_points(b).size()));
    }
    if (options.length_normalized && longer > 0.0) d /= longer;
    out.push_back(d);
  }
  return out;
}

std::vector<double> surface_scores_from_distances(std::span<const double> distances) {
  std::vector<double> out = softmax(distances);
  for (double& v : out) v = 1.0 - v;
  return out;
}

std::vector<double> surface_scores(const Sentence& anchor, std::span<const Sentence> candidates,
                                   const SurfaceOptions& options) {
  const std::vector<double> d = surface_distances(anchor, candidates, options);
  return surface_scores_from_distances(d);
}

std::vector<double> semantic_scores_from_cosines(std::span<const double> cosines) { return softmax(cosines); }

std::vector<double> semantic_scores(std::span<const double> anchor, std::span<const std::vector<double>> candidates) {
  std::vector<double> cos;
  cos.reserve(candidates.size());
  for (const auto& c : candidates) cos.push_back(cosine(anchor, std::span<const double>(c)));
  return semantic_scores_from_cosines(cos);
}

void normalize_scores(std::span<ScoredCandidate> members, std::span<const double> distances) {
  std::vector<double> cos;
  cos.reserve(members.size());
  for (const auto& m : members) cos.push_back(m.cosine);
  const std::vector<double> sur = surface_scores_from_distances(distances);
  const std::vector<double> sem = semantic_scores_from_cosines(cos);
  for (std::size_t i = 0; i < members.size(); ++i) {
    members[i].s_sur = sur[i];
    members[i].s_sem = sem[i];
  }
}

}  // namespace debcse
