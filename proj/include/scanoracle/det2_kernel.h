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
#ifndef SCANORACLE_DET2_KERNEL_H_
#define SCANORACLE_DET2_KERNEL_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "scanoracle/modmath.h"

namespace scanoracle {

// Search for the smallest multiplier c in [c_begin, c_end), gcd(c, p-1) = 1,
// such that 0 < f[0]*c < f[1]*c < ... (all mod p-1) is strictly increasing.
// `f` holds the discrete logs f_2..f_m relative to the first observation.
//
// Candidates are walked on a wheel over the small prime factors of p-1 and
// the first few products are kept in 8-wide vector lanes; lanes that pass
// the vector test are confirmed with scalar arithmetic.
class Det2Kernel {
 public:
  Det2Kernel(const FieldParams& field, std::vector<uint64_t> f);

  std::optional<uint64_t> search(uint64_t c_begin, uint64_t c_end) const;

  // Scalar confirmation of a single multiplier (ignores coprimality).
  bool increasing(uint64_t c) const;

  uint64_t wheel() const { return wheel_; }
  size_t lanes() const { return residues_.size(); }

 private:
  const FieldParams* field_;
  uint64_t order_;  // p-1
  std::vector<uint64_t> f_;
  std::vector<uint64_t> wheel_primes_;
  std::vector<uint64_t> other_primes_;
  uint64_t wheel_;
  std::vector<uint64_t> residues_;  // in [0, wheel), coprime with wheel primes
};

}  // namespace scanoracle

#endif  // SCANORACLE_DET2_KERNEL_H_
