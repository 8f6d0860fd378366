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
#include "scanoracle/error.h"
#include "scanoracle/modmath.h"

namespace scanoracle {

std::vector<uint64_t> distinct_primes(const FieldParams& field) {
  std::vector<uint64_t> primes;
  primes.reserve(field.factors.size());
  for (const PrimeFactor& pf : field.factors) primes.push_back(pf.prime);
  return primes;
}

bool is_coprime_with_order(uint64_t k, const FieldParams& field) {
  for (const PrimeFactor& pf : field.factors) {
    if (k % pf.prime == 0) return false;
  }
  return true;
}

uint64_t coprime_count_upto(uint64_t x, const FieldParams& field) {
  const size_t nprimes = field.factors.size();
  int64_t total = 0;
  for (uint32_t mask = 0; mask < (1u << nprimes); ++mask) {
    uint64_t d = 1;
    int sign = 1;
    for (size_t i = 0; i < nprimes; ++i) {
      if (mask & (1u << i)) {
        d *= field.factors[i].prime;
        sign = -sign;
      }
    }
    total += sign * static_cast<int64_t>(x / d);
  }
  return static_cast<uint64_t>(total);
}

uint64_t nth_coprime(uint64_t index, const FieldParams& field) {
  if (index >= field.totient) {
    throw Error(ErrorCode::kIndexOutOfRange, "coprime index past phi(p-1)");
  }
  // Smallest c with count(c) >= index + 1.
  uint64_t lo = 1, hi = field.p - 2;
  while (lo < hi) {
    uint64_t mid = lo + (hi - lo) / 2;
    if (coprime_count_upto(mid, field) >= index + 1) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

CoprimeStream::CoprimeStream(const FieldParams& field, uint64_t start_index,
                             uint64_t count)
    : primes_(distinct_primes(field)),
      current_(0),
      remaining_(0) {
  if (start_index >= field.totient) return;
  current_ = nth_coprime(start_index, field);
  remaining_ = std::min(count, field.totient - start_index);
}

std::optional<uint64_t> CoprimeStream::next() {
  if (remaining_ == 0) return std::nullopt;
  const uint64_t value = current_;
  --remaining_;
  if (remaining_ > 0) {
    uint64_t c = current_ + 1;
    for (;;) {
      bool ok = true;
      for (uint64_t q : primes_) {
        if (c % q == 0) {
          ok = false;
          break;
        }
      }
      if (ok) break;
      ++c;
    }
    current_ = c;
  }
  return value;
}

std::vector<uint64_t> coprime_stream(const FieldParams& field,
                                     uint64_t start_index, uint64_t count) {
  std::vector<uint64_t> out;
  CoprimeStream stream(field, start_index, count);
  while (auto k = stream.next()) out.push_back(*k);
  return out;
}

}  // namespace scanoracle
