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

#include "debcse/encoder.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

#include "debcse/error.hpp"
#include "debcse/rng.hpp"

namespace debcse {
namespace {

std::filesystem::path with_suffix(std::filesystem::path base, const char* suffix) {
  base += suffix;
  return base;
}

}  // namespace

std::size_t EncoderParams::row_of(const std::string& token) const {
  const auto it = index.find(token);
  return it == index.end() ? 0 : it->second;
}

void EncoderParams::reindex() {
  index.clear();
  for (std::size_t i = 0; i < vocab.size(); ++i) index.emplace(vocab[i], i);
}

EncoderParams init_encoder(const Corpus& corpus, const EncoderInit& init) {
  if (init.dim == 0) throw InvalidArgument("encoder dim must be > 0");
  EncoderParams p;
  p.vocab.push_back(kUnknownToken);
  for (const auto& [token, count] : corpus.freq()) {
    if (token != kUnknownToken) p.vocab.push_back(token);
  }
  p.reindex();
  const auto d = static_cast<Eigen::Index>(init.dim);
  const auto v = static_cast<Eigen::Index>(p.vocab.size());
  KeyedRng rng(init.seed, 0, Stream::kInit);
  p.embed_table.resize(v, d);
  for (Eigen::Index r = 0; r < v; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) p.embed_table(r, c) = init.embed_scale * rng.normal();
  }
  const double proj_std = 1.0 / std::sqrt(static_cast<double>(d));
  p.proj.resize(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) p.proj(r, c) = proj_std * rng.normal();
  }
  p.proj_bias.resize(d);
  for (Eigen::Index c = 0; c < d; ++c) p.proj_bias(c) = init.bias_scale * rng.normal();
  return p;
}

Eigen::VectorXd encode(const EncoderParams& params, const Tokens& tokens) {
  if (tokens.empty()) throw InvalidArgument("cannot encode an empty sentence");
  Eigen::VectorXd pooled = Eigen::VectorXd::Zero(params.embed_table.cols());
  for (const auto& t : tokens) pooled += params.embed_table.row(static_cast<Eigen::Index>(params.row_of(t))).transpose();
  pooled /= static_cast<double>(tokens.size());
  Eigen::VectorXd out = params.proj * pooled + params.proj_bias;
  if (params.use_tanh) out = out.array().tanh();
  return out;
}

Eigen::MatrixXd encode_all(const EncoderParams& params, const std::vector<Tokens>& sentences) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(sentences.size()), static_cast<Eigen::Index>(params.dim()));
  for (std::size_t i = 0; i < sentences.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = encode(params, sentences[i]);
  return out;
}

EmbeddingMatrix embed_corpus(const EncoderParams& params, const Corpus& corpus) {
  const std::size_t d = params.dim();
  std::vector<float> data;
  data.reserve(corpus.size() * d);
  for (const auto& s : corpus.sentences()) {
    const Eigen::VectorXd h = encode(params, s.tokens);
    for (std::size_t k = 0; k < d; ++k) data.push_back(static_cast<float>(h(static_cast<Eigen::Index>(k))));
  }
  return EmbeddingMatrix(corpus.size(), d, std::move(data));
}

void save_encoder(const EncoderParams& params, const std::filesystem::path& base) {
  const std::size_t v = params.vocab_size();
  const std::size_t d = params.dim();
  std::vector<float> table;
  table.reserve(v * d);
  for (std::size_t r = 0; r < v; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      table.push_back(static_cast<float>(params.embed_table(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))));
    }
  }
  write_embeddings(EmbeddingMatrix(v, d, std::move(table)), with_suffix(base, ".debc"));

  nlohmann::json j;
  j["dim"] = d;
  j["use_tanh"] = params.use_tanh;
  j["vocab"] = params.vocab;
  std::vector<std::vector<double>> proj(d, std::vector<double>(d));
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) proj[r][c] = params.proj(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }
  j["proj"] = proj;
  j["proj_bias"] = std::vector<double>(params.proj_bias.data(), params.proj_bias.data() + d);
  std::ofstream out(with_suffix(base, ".json"));
  if (!out) throw DataError("cannot write encoder manifest " + with_suffix(base, ".json").string());
  out << j.dump(1) << '\n';
}

EncoderParams load_encoder(const std::filesystem::path& base) {
  std::ifstream in(with_suffix(base, ".json"));
  if (!in) throw DataError("cannot open encoder manifest " + with_suffix(base, ".json").string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed encoder manifest: ") + e.what());
  }
  EncoderParams p;
  try {
    const auto d = j.at("dim").get<std::size_t>();
    p.use_tanh = j.at("use_tanh").get<bool>();
    p.vocab = j.at("vocab").get<std::vector<std::string>>();
    const auto proj = j.at("proj").get<std::vector<std::vector<double>>>();
    const auto bias = j.at("proj_bias").get<std::vector<double>>();
    if (proj.size() != d || bias.size() != d) throw DataError("encoder manifest: proj shape mismatch");
    p.proj.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    p.proj_bias.resize(static_cast<Eigen::Index>(d));
    for (std::size_t r = 0; r < d; ++r) {
      if (proj[r].size() != d) throw DataError("encoder manifest: proj shape mismatch");
      for (std::size_t c = 0; c < d; ++c) p.proj(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = proj[r][c];
      p.proj_bias(static_cast<Eigen::Index>(r)) = bias[r];
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed encoder manifest: ") + e.what());
  }
  if (p.vocab.empty() || p.vocab[0] != kUnknownToken) throw DataError("encoder manifest: vocab must start with <unk>");
  const EmbeddingMatrix table = read_embeddings(with_suffix(base, ".debc"));
  if (table.count() != p.vocab.size() || table.dim() != static_cast<std::size_t>(p.proj.rows())) {
    throw DataError("encoder table shape does not match manifest");
  }
  p.embed_table.resize(static_cast<Eigen::Index>(table.count()), static_cast<Eigen::Index>(table.dim()));
  for (std::size_t r = 0; r < table.count(); ++r) {
    const auto row = table.row(r);
    for (std::size_t c = 0; c < table.dim(); ++c) p.embed_table(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
  }
  p.reindex();
  return p;
}

}  // namespace debcse
