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
#ifndef SCANORACLE_PARALLEL_H_
#define SCANORACLE_PARALLEL_H_

#include <cstdint>
#include <functional>
#include <optional>

namespace scanoracle {

// Worker count: SCANORACLE_THREADS if set to a positive integer, else the
// hardware concurrency (at least 1).
unsigned default_thread_count();

// Runs fn(i) for i in [0, n) on up to `threads` workers. fn must be safe to
// call concurrently for distinct i. Exceptions from fn are rethrown (the one
// with the smallest i wins).
void parallel_for(size_t n, unsigned threads, const std::function<void(size_t)>& fn);

// Smallest value returned by fn over the ordered segments of [begin, end).
// Segments are claimed in ascending order and workers stop once a result is
// known below their segment, so the answer equals a sequential scan.
std::optional<uint64_t> parallel_first(
    uint64_t begin, uint64_t end, uint64_t segment, unsigned threads,
    const std::function<std::optional<uint64_t>(uint64_t, uint64_t)>& fn);

}  // namespace scanoracle

#endif  // SCANORACLE_PARALLEL_H_
