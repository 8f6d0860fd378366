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
#include "scanoracle/modmath.h"

#include <string>

#include "scanoracle/error.h"

namespace scanoracle {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kZeroDivisor: return "ZeroDivisor";
    case ErrorCode::kEmptyScanSet: return "EmptyScanSet";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNotZMap: return "NotZMap";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kIncompatibleOffset: return "IncompatibleOffset";
    case ErrorCode::kDuplicateAddress: return "DuplicateAddress";
    case ErrorCode::kObservationBlacklisted: return "ObservationBlacklisted";
    case ErrorCode::kTooShort: return "TooShort";
    case ErrorCode::kBudgetExceeded: return "BudgetExceeded";
    case ErrorCode::kRequiresSuccess: return "RequiresSuccess";
    case ErrorCode::kZeroDuration: return "ZeroDuration";
  }
  return "Unknown";
}

namespace {

// Factorizations of p-1, produced by trial division and re-verified in
// modmath_test.
std::vector<FieldParams> build_fields() {
  std::vector<FieldParams> fields = {
      {0, (1ULL << 8) + 1, 0, {{2, 8}}, 0},
      {1, (1ULL << 16) + 1, 0, {{2, 16}}, 0},
      {2, (1ULL << 24) + 43, 0, {{2, 1}, {23, 1}, {103, 1}, {3541, 1}}, 0},
      {3, (1ULL << 28) + 3, 0, {{2, 1}, {3, 4}, {19, 1}, {87211, 1}}, 0},
      {4, (1ULL << 32) + 15, 0,
       {{2, 1}, {3, 2}, {5, 1}, {131, 1}, {364289, 1}}, 0},
  };
  for (FieldParams& f : fields) {
    uint64_t phi = f.p - 1;
    for (const PrimeFactor& pf : f.factors) phi = phi / pf.prime * (pf.prime - 1);
    f.totient = phi;
    uint64_t a = 2;
    while (!is_primitive_root(a, f)) ++a;
    f.root = a;
  }
  return fields;
}

}  // namespace

const std::vector<FieldParams>& zmap_fields() {
  static const std::vector<FieldParams> fields = build_fields();
  return fields;
}

const FieldParams& select_prime(uint64_t n) {
  if (n < 1 || n > (1ULL << 32)) {
    throw Error(ErrorCode::kInvalidArgument,
                "address count out of range: " + std::to_string(n));
  }
  for (const FieldParams& f : zmap_fields()) {
    if (f.p >= n) return f;
  }
  return zmap_fields().back();
}

const FieldParams* field_for_prime(uint64_t p) {
  for (const FieldParams& f : zmap_fields()) {
    if (f.p == p) return &f;
  }
  return nullptr;
}

uint64_t mod_pow(uint64_t base, uint64_t exp, uint64_t m) {
  uint64_t result = 1 % m;
  base %= m;
  while (exp > 0) {
    if (exp & 1) result = mod_mul(result, base, m);
    base = mod_mul(base, base, m);
    exp >>= 1;
  }
  return result;
}

uint64_t mod_inverse(uint64_t x, uint64_t m) {
  int64_t t = 0, new_t = 1;
  int64_t r = static_cast<int64_t>(m), new_r = static_cast<int64_t>(x % m);
  while (new_r != 0) {
    int64_t q = r / new_r;
    int64_t tmp = t - q * new_t;
    t = new_t;
    new_t = tmp;
    tmp = r - q * new_r;
    r = new_r;
    new_r = tmp;
  }
  if (r != 1) {
    throw Error(ErrorCode::kZeroDivisor,
                std::to_string(x) + " is not invertible mod " +
                    std::to_string(m));
  }
  return t < 0 ? static_cast<uint64_t>(t + static_cast<int64_t>(m))
               : static_cast<uint64_t>(t);
}

uint64_t mod_reduce(int64_t v, uint64_t m) {
  int64_t r = v % static_cast<int64_t>(m);
  return static_cast<uint64_t>(r < 0 ? r + static_cast<int64_t>(m) : r);
}

bool is_primitive_root(uint64_t g, const FieldParams& field) {
  if (g == 0 || g >= field.p) return false;
  const uint64_t order = field.p - 1;
  for (const PrimeFactor& pf : field.factors) {
    if (mod_pow(g, order / pf.prime, field.p) == 1) return false;
  }
  return true;
}

FixedMultiplier::FixedMultiplier(uint64_t factor, uint64_t modulus)
    : factor_(factor % modulus),
      modulus_(modulus),
      quotient_(static_cast<uint64_t>(
          (static_cast<unsigned __int128>(factor % modulus) << 64) /
          modulus)) {}

}  // namespace scanoracle
