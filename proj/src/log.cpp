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

#include "debcse/log.hpp"

#include <cstdlib>
#include <memory>
#include <string_view>

#include <spdlog/sinks/stdout_sinks.h>

namespace debcse {
namespace {

spdlog::level::level_enum level_from_env() {
  const char* raw = std::getenv("DEBCSE_LOG");
  if (raw == nullptr) return spdlog::level::warn;
  const std::string_view value(raw);
  if (value == "error") return spdlog::level::err;
  if (value == "warn") return spdlog::level::warn;
  if (value == "info") return spdlog::level::info;
  if (value == "debug") return spdlog::level::debug;
  return spdlog::level::warn;
}

std::shared_ptr<spdlog::logger> make_logger() {
  auto sink = std::make_shared<spdlog::sinks::stderr_sink_mt>();
  auto log = std::make_shared<spdlog::logger>("debcse", std::move(sink));
  log->set_pattern("[%l] %v");
  log->set_level(level_from_env());
  return log;
}

}  // namespace

spdlog::logger& logger() {
  static const std::shared_ptr<spdlog::logger> instance = make_logger();
  return *instance;
}

void configure_logging_from_env() { logger().set_level(level_from_env()); }

}  // namespace debcse
