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
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace debcse {

/// Runs fn(begin, end) over [0, n) in chunks of `chunk` items on up to
/// `workers` threads. The first exception thrown by any chunk is rethrown.
/// Callers write results into per-index slots, so output order never depends
/// on scheduling.
template <typename Fn>
void parallel_chunks(std::size_t n, std::size_t chunk, std::size_t workers, Fn&& fn) {
  chunk = std::max<std::size_t>(chunk, 1);
  workers = std::max<std::size_t>(workers, 1);
  if (workers == 1 || n <= chunk) {
    for (std::size_t b = 0; b < n; b += chunk) fn(b, std::min(n, b + chunk));
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(chunk);
      if (b >= n) return;
      try {
        fn(b, std::min(n, b + chunk));
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  const std::size_t count = std::min(workers, (n + chunk - 1) / chunk);
  threads.reserve(count);
  for (std::size_t t = 0; t < count; ++t) threads.emplace_back(body);
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace debcse
