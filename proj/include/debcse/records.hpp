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

#include <filesystem>
#include <string>
#include <vector>

#include "debcse/negative_miner.hpp"
#include "debcse/positive_miner.hpp"

namespace debcse {

/// {"anchor": id, "negatives": [ids], "p": [probabilities], "cos": [cosines]}
std::string negative_record(const MinedNegatives& mined);

/// {"anchor": id, "positives": [texts], "p": [probabilities]}
std::string positive_record(const MinedPositives& mined);

/// {"anchor_id": id, "candidate": text}
std::string candidate_record(SentenceId anchor, const std::string& candidate);

void write_negatives(const std::vector<MinedNegatives>& mined, const std::filesystem::path& path);
void write_positives(const std::vector<MinedPositives>& mined, const std::filesystem::path& path);

/// DataError on any malformed line.
std::vector<MinedNegatives> read_negatives(const std::filesystem::path& path);
std::vector<MinedPositives> read_positives(const std::filesystem::path& path);

}  // namespace debcse
