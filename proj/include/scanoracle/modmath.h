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
#ifndef SCANORACLE_MODMATH_H_
#define SCANORACLE_MODMATH_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace scanoracle {

struct PrimeFactor {
  uint64_t prime;
  unsigned exponent;
};

// One of the five moduli ZMap iterates over, with the factorization of the
// group order p-1 and the primitive root used as the discrete-log base.
struct FieldParams {
  unsigned index = 0;  // 0..4
  uint64_t p = 0;
  uint64_t root = 0;
  std::vector<PrimeFactor> factors;
  uint64_t totient = 0;  // phi(p-1)

  uint64_t order() const { return p - 1; }
};

// p0..p4 in ascending order.
const std::vector<FieldParams>& zmap_fields();

// Smallest ZMap prime >= n. n must be in [1, 2^32].
const FieldParams& select_prime(uint64_t n);

// Field whose modulus is exactly p; nullptr if p is not a ZMap prime.
const FieldParams* field_for_prime(uint64_t p);

inline uint64_t mod_mul(uint64_t a, uint64_t b, uint64_t m) {
  return static_cast<uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline uint64_t mod_add(uint64_t a, uint64_t b, uint64_t m) {
  uint64_t s = a + b;
  return s >= m ? s - m : s;
}

inline uint64_t mod_sub(uint64_t a, uint64_t b, uint64_t m) {
  return a >= b ? a - b : a + m - b;
}

uint64_t mod_pow(uint64_t base, uint64_t exp, uint64_t m);

// Inverse of x modulo m; throws Error(kZeroDivisor) when gcd(x, m) != 1.
uint64_t mod_inverse(uint64_t x, uint64_t m);

// Reduces a signed value into [0, m).
uint64_t mod_reduce(int64_t v, uint64_t m);

bool is_primitive_root(uint64_t g, const FieldParams& field);

// Multiplication by a fixed factor modulo p (p < 2^63) with a precomputed
// quotient estimate; avoids the 128-bit division in state iteration.
class FixedMultiplier {
 public:
  FixedMultiplier() = default;
  FixedMultiplier(uint64_t factor, uint64_t modulus);

  uint64_t operator()(uint64_t x) const {
    uint64_t q = static_cast<uint64_t>(
        (static_cast<unsigned __int128>(x) * quotient_) >> 64);
    uint64_t r = x * factor_ - q * modulus_;
    return r >= modulus_ ? r - modulus_ : r;
  }

  uint64_t factor() const { return factor_; }

 private:
  uint64_t factor_ = 0;
  uint64_t modulus_ = 1;
  uint64_t quotient_ = 0;
};

// ---------------------------------------------------------------------------
// Integers coprime with p-1.

// Distinct prime factors of p-1.
std::vector<uint64_t> distinct_primes(const FieldParams& field);

bool is_coprime_with_order(uint64_t k, const FieldParams& field);

// Number of k in [1, x] with gcd(k, p-1) = 1, by inclusion-exclusion.
uint64_t coprime_count_upto(uint64_t x, const FieldParams& field);

// The index-th (0-based) integer coprime with p-1; index < phi(p-1).
uint64_t nth_coprime(uint64_t index, const FieldParams& field);

// Ascending stream of k in {1..p-2} coprime with p-1. Skips `start_index`
// values and yields at most `count`. Nothing is materialized.
class CoprimeStream {
 public:
  CoprimeStream(const FieldParams& field, uint64_t start_index,
                uint64_t count);

  std::optional<uint64_t> next();

 private:
  std::vector<uint64_t> primes_;
  uint64_t current_;
  uint64_t remaining_;
};

// Convenience: materializes a stream; tests and small fields only.
std::vector<uint64_t> coprime_stream(const FieldParams& field,
                                     uint64_t start_index, uint64_t count);

// ---------------------------------------------------------------------------
// Discrete logarithms base field.root.

// Pohlig-Hellman over the factorization of p-1 with baby-step giant-step in
// each prime-order subgroup. Tables are built once per field.
class DiscreteLog {
 public:
  explicit DiscreteLog(const FieldParams& field);

  // The unique x in [0, p-2] with root^x = b (mod p). b in [1, p-1].
  uint64_t operator()(uint64_t b) const;

  const FieldParams& field() const { return *field_; }

 private:
  struct Subgroup {
    uint64_t prime;
    unsigned exponent;
    uint64_t prime_power;
    uint64_t gamma;       // root^((p-1)/prime), order `prime`
    uint64_t giant;       // gamma^(-step)
    uint64_t step;        // ceil(sqrt(prime))
    uint64_t crt_weight;  // (p-1)/q^e * inverse mod q^e, reduced mod p-1
    std::vector<std::pair<uint64_t, uint32_t>> baby;  // sorted (gamma^j, j)
  };

  uint64_t log_in_subgroup(const Subgroup& sg, uint64_t h) const;

  const FieldParams* field_;
  std::vector<Subgroup> subgroups_;
};

// Shared, lazily built solver per ZMap field. Thread-safe.
const DiscreteLog& discrete_log_solver(const FieldParams& field);

uint64_t discrete_log(uint64_t b, const FieldParams& field);

// Plain baby-step giant-step over the whole group; independent cross-check
// for the Pohlig-Hellman path.
uint64_t discrete_log_bsgs(uint64_t b, const FieldParams& field);

}  // namespace scanoracle

#endif  // SCANORACLE_MODMATH_H_
