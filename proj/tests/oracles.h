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
// Straightforward reference implementations used as test oracles. Nothing
// here shares code with the library beyond plain types.
#ifndef SCANORACLE_TESTS_ORACLES_H_
#define SCANORACLE_TESTS_ORACLES_H_

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

inline uint64_t mulmod(uint64_t a, uint64_t b, uint64_t m) {
  return static_cast<uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline uint64_t powmod(uint64_t b, uint64_t e, uint64_t m) {
  uint64_t r = 1 % m;
  b %= m;
  for (int bit = 63; bit >= 0; --bit) {
    r = mulmod(r, r, m);
    if ((e >> bit) & 1) r = mulmod(r, b, m);
  }
  return r;
}

inline std::vector<uint64_t> trial_factor(uint64_t n) {
  std::vector<uint64_t> f;
  for (uint64_t d = 2; d * d <= n; ++d) {
    while (n % d == 0) {
      f.push_back(d);
      n /= d;
    }
  }
  if (n > 1) f.push_back(n);
  return f;
}

inline bool is_generator(uint64_t g, uint64_t p) {
  auto f = trial_factor(p - 1);
  f.erase(std::unique(f.begin(), f.end()), f.end());
  for (uint64_t q : f) {
    if (powmod(g, (p - 1) / q, p) == 1) return false;
  }
  return g % p != 0;
}

// Exhaustive log table for small p.
inline std::vector<uint64_t> log_table(uint64_t root, uint64_t p) {
  std::vector<uint64_t> t(p, UINT64_MAX);
  uint64_t x = 1;
  for (uint64_t i = 0; i + 1 < p; ++i) {
    t[x] = i;
    x = mulmod(x, root, p);
  }
  return t;
}

// ZMap's address order over S = W \ B by enumeration: every fully covered
// /20 block first, then the leftover addresses, both ascending.
inline std::vector<uint32_t> ordered_scan_set(const std::vector<uint32_t>& members_sorted) {
  std::vector<uint32_t> radix, rest;
  size_t i = 0;
  while (i < members_sorted.size()) {
    uint32_t a = members_sorted[i];
    if ((a & 0xFFF) == 0 && i + 4095 < members_sorted.size() &&
        members_sorted[i + 4095] == a + 4095) {
      for (uint32_t j = 0; j < 4096; ++j) radix.push_back(a + j);
      i += 4096;
    } else {
      rest.push_back(a);
      ++i;
    }
  }
  radix.insert(radix.end(), rest.begin(), rest.end());
  return radix;
}

// Emission order of a scan: states s0 * g^i, i < steps, mapped through
// `order` (1-based index) when <= n.
inline std::vector<uint32_t> simulate(uint64_t p, uint64_t g, uint64_t s0,
                                      const std::vector<uint32_t>& order,
                                      uint64_t steps) {
  std::vector<uint32_t> out;
  uint64_t s = s0;
  for (uint64_t i = 0; i < steps; ++i) {
    if (s <= order.size()) out.push_back(order[s - 1]);
    s = mulmod(s, g, p);
  }
  return out;
}

// Inverse of x mod m by extended Euclid; x must be a unit.
inline uint64_t inverse(uint64_t x, uint64_t m) {
  int64_t t0 = 0, t1 = 1;
  uint64_t r0 = m, r1 = x % m;
  while (r1 != 0) {
    uint64_t q = r0 / r1;
    int64_t t2 = t0 - static_cast<int64_t>(q) * t1;
    uint64_t r2 = r0 - q * r1;
    t0 = t1, t1 = t2, r0 = r1, r1 = r2;
  }
  return static_cast<uint64_t>(t0 < 0 ? t0 + static_cast<int64_t>(m) : t0);
}

// Least k coprime with p-1 such that f_j * k^-1 mod (p-1) is strictly
// increasing, by walking every k. Logs come from `log` (exponent of
// x_j / x_1 to the given root).
template <typename Log>
std::optional<uint64_t> first_ordering_k(const std::vector<uint64_t>& x, uint64_t p,
                                         Log log) {
  const uint64_t m = p - 1;
  std::vector<uint64_t> f;
  for (size_t j = 1; j < x.size(); ++j) {
    f.push_back((log(x[j]) + m - log(x[0])) % m);
  }
  for (uint64_t k = 1; k < m; ++k) {
    if (std::gcd(k, m) != 1) continue;
    const uint64_t c = inverse(k, m);
    uint64_t prev = 0;
    bool ok = true;
    for (uint64_t v : f) {
      uint64_t e = mulmod(v, c, m);
      if (e <= prev) {
        ok = false;
        break;
      }
      prev = e;
    }
    if (ok) return k;
  }
  return std::nullopt;
}

inline std::optional<uint64_t> first_ordering_k(const std::vector<uint64_t>& x,
                                                uint64_t root, uint64_t p) {
  auto t = log_table(root, p);
  return first_ordering_k(x, p, [&](uint64_t v) { return t[v]; });
}

}  // namespace oracle

#endif  // SCANORACLE_TESTS_ORACLES_H_
