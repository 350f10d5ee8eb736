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
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace debcse {

using SentenceId = std::uint64_t;
using Tokens = std::vector<std::string>;

/// Splits on Unicode whitespace, strips leading/trailing punctuation from each
/// piece and lowercases it. Pieces that end up empty are dropped. Input is
/// expected to be valid UTF-8; invalid sequences are treated as opaque
/// non-space, non-punctuation bytes.
Tokens tokenize(std::string_view text);

/// True when `text` is well-formed UTF-8.
bool is_valid_utf8(std::string_view text);

/// Joins tokens with single spaces.
std::string join_tokens(const Tokens& tokens);

struct Sentence {
  SentenceId id = 0;
  std::size_t source_line = 0;  // zero-based line in the ingested file
  std::string text;
  Tokens tokens;
};

class Corpus {
 public:
  Corpus() = default;

  /// Builds a corpus from already-tokenized sentences. Ids are reassigned densely.
  explicit Corpus(std::vector<Sentence> sentences);

  const std::vector<Sentence>& sentences() const { return sentences_; }
  const Sentence& operator[](SentenceId id) const { return sentences_.at(id); }
  std::size_t size() const { return sentences_.size(); }
  bool empty() const { return sentences_.empty(); }

  const std::map<std::string, std::uint64_t>& freq() const { return freq_; }
  std::uint64_t total_tokens() const { return total_tokens_; }

 private:
  std::vector<Sentence> sentences_;
  std::map<std::string, std::uint64_t> freq_;
  std::uint64_t total_tokens_ = 0;
};

struct IngestOptions {
  std::size_t min_tokens = 3;
  std::size_t max_tokens = 64;
};

struct IngestResult {
  Corpus corpus;
  std::size_t dropped = 0;  // lines outside the token-length window
  std::vector<std::size_t> invalid_utf8_lines;  // zero-based, skipped
};

/// Reads one sentence per line (LF; a trailing CR is tolerated).
///
/// Throws InvalidArgument for a bad length window and DataError when the file
/// cannot be read or nothing survives filtering.
IngestResult ingest(const std::filesystem::path& path, const IngestOptions& options = {});

/// Same filtering applied to in-memory lines.
IngestResult ingest_lines(const std::vector<std::string>& lines, const IngestOptions& options = {});

/// Loads an index-aligned sidecar: every line is a sentence, ids equal line
/// indices. Empty or untokenizable lines are a DataError since they would break
/// alignment with an embedding file.
Corpus load_sidecar(const std::filesystem::path& path);

void write_sidecar(const Corpus& corpus, const std::filesystem::path& path);

/// The k most frequent tokens, ties broken by ascending token.
std::vector<std::string> top_frequency_words(const Corpus& corpus, std::size_t k);

}  // namespace debcse
