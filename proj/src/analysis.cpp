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

#include "debcse/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "debcse/error.hpp"

namespace debcse {
namespace {

constexpr double kBinWidth = 2.0 / static_cast<double>(kHistogramBins);

std::vector<double> unit(const std::vector<double>& v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  if (!(sq > 0.0)) throw InvalidArgument("cannot normalise a zero vector");
  const double inv = 1.0 / std::sqrt(sq);
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * inv;
  return out;
}

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw InvalidArgument("dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw InvalidArgument("correlation undefined for constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace

void CosineHistogram::add(double value) {
  const double clamped = std::clamp(value, -1.0, 1.0);
  auto bin = static_cast<std::size_t>(std::floor((clamped + 1.0) / kBinWidth));
  counts[std::min(bin, kHistogramBins - 1)] += 1;
}

std::size_t CosineHistogram::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

double CosineHistogram::bin_lo(std::size_t bin) { return -1.0 + kBinWidth * static_cast<double>(bin); }
double CosineHistogram::bin_hi(std::size_t bin) { return -1.0 + kBinWidth * static_cast<double>(bin + 1); }

double mean_overlap(std::span<const TextPair> pairs, OverlapMode mode) {
  if (pairs.empty()) throw InvalidArgument("mean_overlap: no pairs");
  double total = 0.0;
  for (const auto& p : pairs) total += lexical_overlap(p.a, p.b, mode);
  return total / static_cast<double>(pairs.size());
}

BiasReport bias_report(std::span<const TextPair> positives, std::span<const TextPair> negatives,
                       const EmbeddingSource& embed, OverlapMode mode) {
  if (positives.empty() || negatives.empty()) throw InvalidArgument("bias_report needs positive and negative pairs");
  BiasReport r;
  r.pos_pairs = positives.size();
  r.neg_pairs = negatives.size();
  r.mean_overlap_pos = mean_overlap(positives, mode);
  r.mean_overlap_neg = mean_overlap(negatives, mode);
  for (const auto& p : positives) r.sem_hist_pos.add(cosine(embed(p.a), embed(p.b)));
  for (const auto& p : negatives) r.sem_hist_neg.add(cosine(embed(p.a), embed(p.b)));
  return r;
}

void write_histogram_csv(const CosineHistogram& hist, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t b = 0; b < kHistogramBins; ++b) {
    out << CosineHistogram::bin_lo(b) << ',' << CosineHistogram::bin_hi(b) << ',' << hist.counts[b] << '\n';
  }
}

double alignment(std::span<const std::pair<std::vector<double>, std::vector<double>>> pairs) {
  if (pairs.empty()) throw InvalidArgument("alignment: no pairs");
  double total = 0.0;
  for (const auto& [a, b] : pairs) total += squared_distance(unit(a), unit(b));
  return total / static_cast<double>(pairs.size());
}

double uniformity(std::span<const std::vector<double>> vectors) {
  if (vectors.size() < 2) throw InvalidArgument("uniformity needs at least 2 vectors");
  std::vector<std::vector<double>> units;
  units.reserve(vectors.size());
  for (const auto& v : vectors) units.push_back(unit(v));
  // Every kernel value lies in [exp(-8), 1], so a plain sum cannot underflow.
  double total = 0.0;
  for (std::size_t i = 0; i < units.size(); ++i) {
    for (std::size_t j = i + 1; j < units.size(); ++j) total += std::exp(-2.0 * squared_distance(units[i], units[j]));
  }
  const double pairs = static_cast<double>(units.size()) * static_cast<double>(units.size() - 1) / 2.0;
  return std::log(total / pairs);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> pred, std::span<const double> gold) {
  if (pred.size() != gold.size()) throw InvalidArgument("spearman: length mismatch");
  if (pred.size() < 2) throw InvalidArgument("spearman needs at least 2 items");
  return pearson(average_ranks(pred), average_ranks(gold));
}

StsDataset load_sts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open STS file " + path.string());
  StsDataset ds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 3 tab-separated columns");
    }
    StsPair p;
    std::istringstream score(line.substr(0, t1));
    if (!(score >> p.gold) || !(score >> std::ws).eof()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad gold score");
    }
    if (!(p.gold >= 0.0 && p.gold <= 5.0)) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": gold score outside [0, 5]");
    }
    p.a = line.substr(t1 + 1, t2 - t1 - 1);
    p.b = line.substr(t2 + 1);
    ds.pairs.push_back(std::move(p));
  }
  if (ds.pairs.empty()) throw DataError(path.string() + ": no STS pairs");
  return ds;
}

double eval_sts(const StsDataset& dataset, const EmbeddingSource& embed) {
  if (dataset.pairs.size() < 2) throw InvalidArgument("STS evaluation needs at least 2 pairs");
  std::vector<double> pred;
  std::vector<double> gold;
  for (const auto& p : dataset.pairs) {
    const Tokens a = tokenize(p.a);
    const Tokens b = tokenize(p.b);
    if (a.empty() || b.empty()) throw DataError("STS pair with an empty sentence");
    pred.push_back(cosine(embed(a), embed(b)));
    gold.push_back(p.gold);
  }
  return spearman(pred, gold);
}

double eval_sts(const StsDataset& dataset, std::span<const std::vector<double>> pair_embeddings) {
  if (dataset.pairs.size() < 2) throw InvalidArgument("STS evaluation needs at least 2 pairs");
  if (pair_embeddings.size() != 2 * dataset.pairs.size()) {
    throw InvalidArgument("expected two embeddings per STS pair");
  }
  std::vector<double> pred;
  std::vector<double> gold;
  for (std::size_t i = 0; i < dataset.pairs.size(); ++i) {
    pred.push_back(cosine(pair_embeddings[2 * i], pair_embeddings[2 * i + 1]));
    gold.push_back(dataset.pairs[i].gold);
  }
  return spearman(pred, gold);
}

}  // namespace debcse
