// Copyright 2026 The ScanOracle Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "scanoracle/parallel.h"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace scanoracle {

unsigned default_thread_count() {
  if (const char* env = std::getenv("SCANORACLE_THREADS")) {
    try {
      long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(size_t n, unsigned threads,
                  const std::function<void(size_t)>& fn) {
  if (threads == 0) threads = default_thread_count();
  threads = static_cast<unsigned>(std::min<size_t>(threads, n));
  if (threads <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::mutex mu;
  std::exception_ptr error;
  size_t error_index = n;
  auto worker = [&] {
    for (size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::optional<uint64_t> parallel_first(
    uint64_t begin, uint64_t end, uint64_t segment, unsigned threads,
    const std::function<std::optional<uint64_t>(uint64_t, uint64_t)>& fn) {
  if (begin >= end) return std::nullopt;
  if (threads == 0) threads = default_thread_count();
  if (threads <= 1) return fn(begin, end);
  segment = std::max<uint64_t>(segment, 1);
  const uint64_t nseg = (end - begin + segment - 1) / segment;
  std::atomic<uint64_t> next{0};
  std::atomic<uint64_t> best{UINT64_MAX};
  std::mutex mu;
  std::exception_ptr error;
  auto worker = [&] {
    for (uint64_t s = next++; s < nseg; s = next++) {
      uint64_t lo = begin + s * segment;
      if (lo >= best.load()) return;
      uint64_t hi = std::min(end, lo + segment);
      try {
        if (auto v = fn(lo, hi)) {
          uint64_t cur = best.load();
          while (*v < cur && !best.compare_exchange_weak(cur, *v)) {
          }
          return;
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  unsigned n = static_cast<unsigned>(std::min<uint64_t>(threads, nseg));
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  if (best.load() == UINT64_MAX) return std::nullopt;
  return best.load();
}

}  // namespace scanoracle
