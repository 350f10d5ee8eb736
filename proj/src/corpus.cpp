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

#include "debcse/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <utility>

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "debcse/error.hpp"
#include "debcse/log.hpp"

namespace debcse {
namespace {

struct CodePoint {
  std::size_t begin;
  std::size_t end;
  UChar32 value;  // negative for an ill-formed sequence
};

std::vector<CodePoint> decode(std::string_view text) {
  std::vector<CodePoint> out;
  out.reserve(text.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t begin = i;
    UChar32 c = 0;
    U8_NEXT(bytes, i, length, c);
    out.push_back({static_cast<std::size_t>(begin), static_cast<std::size_t>(i), c});
  }
  return out;
}

bool is_space(const CodePoint& cp) { return cp.value >= 0 && u_isUWhiteSpace(cp.value); }
bool is_punct(const CodePoint& cp) { return cp.value >= 0 && u_ispunct(cp.value); }

void append_lower(std::string& out, std::string_view text, const CodePoint& cp) {
  if (cp.value < 0) {
    out.append(text.substr(cp.begin, cp.end - cp.begin));
    return;
  }
  const UChar32 lower = u_tolower(cp.value);
  char buffer[U8_MAX_LENGTH];
  int32_t n = 0;
  U8_APPEND_UNSAFE(buffer, n, lower);
  out.append(buffer, static_cast<std::size_t>(n));
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  if (in.bad()) throw DataError("read failure on " + path.string());
  return lines;
}

}  // namespace

Tokens tokenize(std::string_view text) {
  const std::vector<CodePoint> cps = decode(text);
  Tokens tokens;
  std::size_t i = 0;
  while (i < cps.size()) {
    while (i < cps.size() && is_space(cps[i])) ++i;
    std::size_t j = i;
    while (j < cps.size() && !is_space(cps[j])) ++j;
    std::size_t lo = i;
    std::size_t hi = j;
    while (lo < hi && is_punct(cps[lo])) ++lo;
    while (hi > lo && is_punct(cps[hi - 1])) --hi;
    if (lo < hi) {
      std::string token;
      for (std::size_t k = lo; k < hi; ++k) append_lower(token, text, cps[k]);
      tokens.push_back(std::move(token));
    }
    i = j;
  }
  return tokens;
}

bool is_valid_utf8(std::string_view text) {
  const std::vector<CodePoint> cps = decode(text);
  return std::none_of(cps.begin(), cps.end(), [](const CodePoint& cp) { return cp.value < 0; });
}

std::string join_tokens(const Tokens& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

Corpus::Corpus(std::vector<Sentence> sentences) : sentences_(std::move(sentences)) {
  for (std::size_t i = 0; i < sentences_.size(); ++i) {
    sentences_[i].id = i;
    for (const auto& token : sentences_[i].tokens) {
      ++freq_[token];
      ++total_tokens_;
    }
  }
}

IngestResult ingest_lines(const std::vector<std::string>& lines, const IngestOptions& options) {
  if (options.min_tokens < 1 || options.max_tokens < options.min_tokens) {
    throw InvalidArgument("token window must satisfy 1 <= min_tokens <= max_tokens");
  }
  IngestResult result;
  std::vector<Sentence> kept;
  for (std::size_t line_no = 0; line_no < lines.size(); ++line_no) {
    const std::string& line = lines[line_no];
    if (!is_valid_utf8(line)) {
      logger().warn("line {}: invalid UTF-8, skipped", line_no + 1);
      result.invalid_utf8_lines.push_back(line_no);
      continue;
    }
    Tokens tokens = tokenize(line);
    if (tokens.size() < options.min_tokens || tokens.size() > options.max_tokens) {
      ++result.dropped;
      continue;
    }
    kept.push_back(Sentence{0, line_no, line, std::move(tokens)});
  }
  if (kept.empty()) throw DataError("no sentence survived the length filter");
  result.corpus = Corpus(std::move(kept));
  logger().info("ingested {} sentences, dropped {}", result.corpus.size(), result.dropped);
  return result;
}

IngestResult ingest(const std::filesystem::path& path, const IngestOptions& options) {
  return ingest_lines(read_lines(path), options);
}

Corpus load_sidecar(const std::filesystem::path& path) {
  const std::vector<std::string> lines = read_lines(path);
  std::vector<Sentence> sentences;
  sentences.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!is_valid_utf8(lines[i])) throw DataError(path.string() + ":" + std::to_string(i + 1) + ": invalid UTF-8");
    Tokens tokens = tokenize(lines[i]);
    if (tokens.empty()) throw DataError(path.string() + ":" + std::to_string(i + 1) + ": sentence has no tokens");
    sentences.push_back(Sentence{i, i, lines[i], std::move(tokens)});
  }
  if (sentences.empty()) throw DataError(path.string() + ": empty corpus");
  return Corpus(std::move(sentences));
}

void write_sidecar(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& s : corpus.sentences()) out << s.text << '\n';
  if (!out) throw DataError("write failure on " + path.string());
}

std::vector<std::string> top_frequency_words(const Corpus& corpus, std::size_t k) {
  if (k < 1) throw InvalidArgument("k must be >= 1");
  std::vector<std::pair<std::string, std::uint64_t>> entries(corpus.freq().begin(), corpus.freq().end());
  const std::size_t take = std::min(k, entries.size());
  // freq() is ordered by token, so a stable sort on count keeps ties ascending.
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(entries[i].first);
  return out;
}

}  // namespace debcse
