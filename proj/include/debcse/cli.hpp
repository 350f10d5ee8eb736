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

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace debcse::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs one subcommand. argv[0] is the program name. Returns 0 on success, 1
/// on a usage or configuration error, 2 when input data cannot be used.
int run(const std::vector<std::string>& argv);

struct RunManifest {
  std::string subcommand;
  std::map<std::string, std::string> config;  // every option, defaults included
  std::uint64_t seed = 0;
  std::map<std::string, std::string> input_digests;  // path -> sha256 hex
  std::map<std::string, std::string> notes;
  std::string started_at;
  std::string finished_at;
};

/// Lowercase hex SHA-256 of a file's bytes. DataError when unreadable.
std::string sha256_file(const std::filesystem::path& path);

/// UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_now();

/// Writes <dir>/manifest.json.
void write_manifest(const RunManifest& manifest, const std::filesystem::path& dir);

/// Name of the manifest file inside every run directory.
inline constexpr const char* kManifestName = "manifest.json";

/// Version string recorded in manifests.
std::string tool_version();

}  // namespace debcse::cli
