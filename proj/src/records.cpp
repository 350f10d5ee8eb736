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

#include "debcse/records.hpp"

#include <fstream>
#include <functional>

#include "json.hpp"

#include "debcse/error.hpp"

namespace debcse {
namespace {

using nlohmann::json;

template <typename T, typename Fn>
void write_lines(const std::vector<T>& items, const std::filesystem::path& path, Fn&& to_line) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& item : items) out << to_line(item) << '\n';
  if (!out) throw DataError("write failure on " + path.string());
}

template <typename T>
std::vector<T> read_lines(const std::filesystem::path& path, const std::function<T(const json&)>& parse) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<T> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(parse(json::parse(line)));
    } catch (const json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

std::string negative_record(const MinedNegatives& mined) {
  nlohmann::ordered_json j;
  j["anchor"] = mined.anchor_id;
  j["negatives"] = mined.negative_ids;
  j["p"] = mined.probabilities;
  j["cos"] = mined.cosines;
  return j.dump();
}

std::string positive_record(const MinedPositives& mined) {
  nlohmann::ordered_json j;
  j["anchor"] = mined.anchor_id;
  j["positives"] = mined.positives;
  j["p"] = mined.probabilities;
  return j.dump();
}

std::string candidate_record(SentenceId anchor, const std::string& candidate) {
  nlohmann::ordered_json j;
  j["anchor_id"] = anchor;
  j["candidate"] = candidate;
  return j.dump();
}

void write_negatives(const std::vector<MinedNegatives>& mined, const std::filesystem::path& path) {
  write_lines(mined, path, negative_record);
}

void write_positives(const std::vector<MinedPositives>& mined, const std::filesystem::path& path) {
  write_lines(mined, path, positive_record);
}

std::vector<MinedNegatives> read_negatives(const std::filesystem::path& path) {
  return read_lines<MinedNegatives>(path, [](const json& j) {
    MinedNegatives m;
    m.anchor_id = j.at("anchor").get<SentenceId>();
    m.negative_ids = j.at("negatives").get<std::vector<SentenceId>>();
    m.probabilities = j.at("p").get<std::vector<double>>();
    m.cosines = j.at("cos").get<std::vector<double>>();
    return m;
  });
}

std::vector<MinedPositives> read_positives(const std::filesystem::path& path) {
  return read_lines<MinedPositives>(path, [](const json& j) {
    MinedPositives m;
    m.anchor_id = j.at("anchor").get<SentenceId>();
    m.positives = j.at("positives").get<std::vector<std::string>>();
    m.probabilities = j.at("p").get<std::vector<double>>();
    return m;
  });
}

}  // namespace debcse
