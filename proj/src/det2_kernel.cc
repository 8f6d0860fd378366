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
#include "scanoracle/det2_kernel.h"

#include <algorithm>
#include <numeric>

#ifdef __AVX512F__
#include <immintrin.h>
#endif

namespace scanoracle {
namespace {

constexpr int kLaneWidth = 8;
constexpr int kMaxDepth = 7;
constexpr uint64_t kTurnsPerChunk = 64;
constexpr uint64_t kWheelLimit = 4096;
constexpr size_t kMinLanes = 64;

typedef uint64_t v8u __attribute__((vector_size(64)));
typedef int64_t v8i __attribute__((vector_size(64)));

inline v8u splat(uint64_t x) { return v8u{x, x, x, x, x, x, x, x}; }

// (e + d) mod m for e, d < m: the wrapped difference is huge when no
// reduction is needed, so the unsigned minimum picks the right one.
inline v8u add_mod(v8u e, v8u d, v8u m) {
  v8u u = e + d;
  v8u t = u - m;
  v8i lt = t < u;
  return lt ? t : u;
}

// Runs `turns` wheel turns for NB adjacent 8-lane blocks (laid out block
// after block, T vectors each). e holds the per-step increments
// u_j = g_j * c mod (p-1) and is advanced in place. A lane passes when
// u_1 + ... + u_T < p-1; the returned mask has bit 8b+l set for every lane l
// of block b that passed at least once.
#if defined(__AVX512F__) && defined(__AVX512VL__)
// 256-bit halves: the VL forms issue on more ports than full-width ops.
template <int T, int NB>
uint32_t run_blocks(v8u* e, const v8u* d, v8u m, uint64_t turns) {
  constexpr int H = 2 * NB;
  __m256i r[H][T];
  __m256i dv[T];
  const __m256i mv = _mm256_set1_epi64x(static_cast<int64_t>(m[0]));
  for (int j = 0; j < T; ++j) dv[j] = _mm256_set1_epi64x(static_cast<int64_t>(d[j][0]));
  for (int h = 0; h < H; ++h) {
    for (int j = 0; j < T; ++j) {
      r[h][j] = _mm256_loadu_si256(
          reinterpret_cast<const __m256i*>(&e[(h / 2) * T + j]) + (h % 2));
    }
  }
  __m256i acc[H];
  for (int h = 0; h < H; ++h) acc[h] = _mm256_setzero_si256();
  for (uint64_t t = 0; t < turns; ++t) {
    for (int h = 0; h < H; ++h) {
      __m256i sum = r[h][0];
      for (int j = 1; j < T; ++j) sum = _mm256_add_epi64(sum, r[h][j]);
      acc[h] = _mm256_or_si256(acc[h], _mm256_sub_epi64(sum, mv));
      for (int j = 0; j < T; ++j) {
        __m256i u = _mm256_add_epi64(r[h][j], dv[j]);
        r[h][j] = _mm256_min_epu64(u, _mm256_sub_epi64(u, mv));
      }
    }
  }
  uint32_t hits = 0;
  for (int h = 0; h < H; ++h) {
    for (int j = 0; j < T; ++j) {
      _mm256_storeu_si256(reinterpret_cast<__m256i*>(&e[(h / 2) * T + j]) + (h % 2),
                          r[h][j]);
    }
    hits |= static_cast<uint32_t>(
                _mm256_movemask_pd(_mm256_castsi256_pd(acc[h])))
            << (4 * h);
  }
  return hits;
}
#else
template <int T, int NB>
uint32_t run_blocks(v8u* e, const v8u* d, v8u m, uint64_t turns) {
  v8u r[NB][T];
  for (int b = 0; b < NB; ++b) {
    for (int j = 0; j < T; ++j) r[b][j] = e[b * T + j];
  }
  v8u acc[NB] = {};
  for (uint64_t t = 0; t < turns; ++t) {
    for (int b = 0; b < NB; ++b) {
      v8u sum = r[b][0];
      for (int j = 1; j < T; ++j) sum += r[b][j];
      acc[b] |= sum - m;
      for (int j = 0; j < T; ++j) r[b][j] = add_mod(r[b][j], d[j], m);
    }
  }
  uint32_t hits = 0;
  for (int b = 0; b < NB; ++b) {
    for (int j = 0; j < T; ++j) e[b * T + j] = r[b][j];
    for (int l = 0; l < kLaneWidth; ++l) {
      if (acc[b][l] >> 63) hits |= 1u << (kLaneWidth * b + l);
    }
  }
  return hits;
}
#endif

using BlockFn = uint32_t (*)(v8u*, const v8u*, v8u, uint64_t);

template <int NB>
BlockFn block_fn(int depth) {
  switch (depth) {
    case 1: return run_blocks<1, NB>;
    case 2: return run_blocks<2, NB>;
    case 3: return run_blocks<3, NB>;
    case 4: return run_blocks<4, NB>;
    case 5: return run_blocks<5, NB>;
    case 6: return run_blocks<6, NB>;
    default: return run_blocks<7, NB>;
  }
}

}  // namespace

Det2Kernel::Det2Kernel(const FieldParams& field, std::vector<uint64_t> f)
    : field_(&field), order_(field.p - 1), f_(std::move(f)) {
  uint64_t base = 1;
  for (uint64_t q : distinct_primes(field)) {
    if (base * q <= kWheelLimit) {
      base *= q;
      wheel_primes_.push_back(q);
    } else {
      other_primes_.push_back(q);
    }
  }
  auto coprime_to_wheel = [&](uint64_t x) {
    for (uint64_t q : wheel_primes_) {
      if (x % q == 0) return false;
    }
    return true;
  };
  uint64_t per_base = 0;
  for (uint64_t x = 0; x < base; ++x) per_base += coprime_to_wheel(x);
  uint64_t stretch = 1;
  while ((per_base * stretch) % kLaneWidth != 0 || per_base * stretch < kMinLanes) {
    ++stretch;
  }
  wheel_ = base * stretch;
  for (uint64_t x = 0; x < wheel_; ++x) {
    if (coprime_to_wheel(x)) residues_.push_back(x);
  }
}

bool Det2Kernel::increasing(uint64_t c) const {
  uint64_t prev = 0;
  for (uint64_t fj : f_) {
    uint64_t e = mod_mul(fj, c, order_);
    if (e <= prev) return false;
    prev = e;
  }
  return true;
}

std::optional<uint64_t> Det2Kernel::search(uint64_t c_begin,
                                           uint64_t c_end) const {
  c_begin = std::max<uint64_t>(c_begin, 1);
  c_end = std::min(c_end, order_);
  if (c_begin >= c_end) return std::nullopt;

  auto accept = [&](uint64_t c) {
    if (c < c_begin || c >= c_end) return false;
    for (uint64_t q : other_primes_) {
      if (c % q == 0) return false;
    }
    return increasing(c);
  };
  if (f_.empty()) {
    for (uint64_t c = c_begin; c < c_end; ++c) {
      if (std::gcd(c, order_) == 1) return c;
    }
    return std::nullopt;
  }

  // The first `depth` products are increasing iff the increments
  // (f_j - f_{j-1}) * c mod (p-1) sum to less than p-1.
  const int depth = static_cast<int>(std::min<size_t>(kMaxDepth, f_.size()));
  uint64_t g[kMaxDepth];
  for (int j = 0; j < depth; ++j) {
    g[j] = j == 0 ? f_[0] : mod_sub(f_[j], f_[j - 1], order_);
  }
  const size_t nblocks = residues_.size() / kLaneWidth;
  const BlockFn run_pair = block_fn<2>(depth);
  const BlockFn run_one = block_fn<1>(depth);
  const v8u m = splat(order_);

  v8u d[kMaxDepth];
  for (int j = 0; j < depth; ++j) d[j] = splat(mod_mul(g[j], wheel_ % order_, order_));

  uint64_t turn = c_begin / wheel_;
  const uint64_t last_turn = (c_end - 1) / wheel_;

  // state[b * depth + j] holds u_j for the 8 lanes of block b.
  std::vector<v8u> state(nblocks * depth);
  for (size_t b = 0; b < nblocks; ++b) {
    for (int j = 0; j < depth; ++j) {
      v8u v;
      for (int l = 0; l < kLaneWidth; ++l) {
        uint64_t c = turn * wheel_ + residues_[b * kLaneWidth + l];
        v[l] = mod_mul(g[j], c % order_, order_);
      }
      state[b * depth + j] = v;
    }
  }

  std::vector<std::pair<size_t, int>> suspects;
  std::vector<v8u> saved(state.size());
  while (turn <= last_turn) {
    const uint64_t turns = std::min(kTurnsPerChunk, last_turn - turn + 1);
    suspects.clear();
    std::copy(state.begin(), state.end(), saved.begin());
    for (size_t b = 0; b < nblocks;) {
      const int nb = b + 1 < nblocks ? 2 : 1;
      uint32_t hits = (nb == 2 ? run_pair : run_one)(&state[b * depth], d, m, turns);
      while (hits) {
        int bit = __builtin_ctz(hits);
        hits &= hits - 1;
        suspects.emplace_back(b + bit / kLaneWidth, bit % kLaneWidth);
      }
      b += nb;
    }
    std::optional<uint64_t> best;
    for (auto [b, l] : suspects) {
      uint64_t u[kMaxDepth];
      for (int j = 0; j < depth; ++j) u[j] = saved[b * depth + j][l];
      for (uint64_t t = 0; t < turns; ++t) {
        uint64_t sum = 0;
        for (int j = 0; j < depth; ++j) sum += u[j];
        if (sum < order_) {
          uint64_t c = (turn + t) * wheel_ + residues_[b * kLaneWidth + l];
          if ((!best || c < *best) && accept(c)) best = c;
        }
        for (int j = 0; j < depth; ++j) {
          u[j] += d[j][0];
          if (u[j] >= order_) u[j] -= order_;
        }
      }
    }
    if (best) return best;
    turn += turns;
  }
  return std::nullopt;
}

}  // namespace scanoracle
