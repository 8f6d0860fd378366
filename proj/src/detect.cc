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
#include "scanoracle/detect.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include <json.hpp>

#include "scanoracle/det2_kernel.h"
#include "scanoracle/parallel.h"
#include "scanoracle/zmapgen.h"

namespace scanoracle {
namespace {

using Clock = std::chrono::steady_clock;

uint64_t micros_since(Clock::time_point start) {
  return static_cast<uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start)
          .count());
}

DetectionResult failure(ErrorCode code, std::string message) {
  DetectionResult r;
  r.status = code;
  r.message = std::move(message);
  return r;
}

// Multipliers per parallel work unit of the sweep.
constexpr uint64_t kSearchSegment = 1ULL << 26;
// Candidate k values per work unit of the direct scan.
constexpr uint64_t kDirectSegment = 1ULL << 22;

// a*b mod m for m < 2^40. A double estimates the quotient (off by at most
// one) and the wrapped 64-bit remainder corrects it.
class OrderMul {
 public:
  explicit OrderMul(uint64_t m) : m_(m), inv_(1.0 / static_cast<double>(m)) {}
  uint64_t operator()(uint64_t a, uint64_t b) const {
    auto q = static_cast<uint64_t>(static_cast<double>(a) * static_cast<double>(b) * inv_);
    auto r = static_cast<int64_t>(a * b - q * m_);
    const auto m = static_cast<int64_t>(m_);
    while (r < 0) r += m;
    while (r >= m) r -= m;
    return static_cast<uint64_t>(r);
  }

 private:
  uint64_t m_;
  double inv_;
};

// Walks k in ascending order, testing whether the multiplier k^-1 orders
// the logs. Inverses come from batched prefix products, one modular
// inversion per batch.
class InverseScan {
 public:
  InverseScan(const FieldParams& field, const std::vector<uint64_t>& f)
      : order_(field.p - 1), mul_(field.p - 1) {
    for (uint64_t v : f) f_.emplace_back(v, order_);
    uint64_t w = 1;
    for (uint64_t q : distinct_primes(field)) {
      if (w * q <= (1u << 16)) {
        w *= q;
        small_.push_back(q);
      } else {
        large_.push_back(q);
      }
    }
    wheel_.resize(w);
    for (uint64_t x = 0; x < w; ++x) {
      wheel_[x] = std::none_of(small_.begin(), small_.end(),
                               [&](uint64_t q) { return x % q == 0; });
    }
  }

  // Smallest k in [lo, hi) coprime with p-1 whose inverse orders f.
  std::optional<uint64_t> first(uint64_t lo, uint64_t hi) const {
    constexpr size_t kBatch = 256;
    uint64_t ks[kBatch], pre[kBatch], inv[kBatch];
    const uint64_t w = wheel_.size();
    uint64_t k = lo, res = lo % w;
    // Residues of k modulo the large factors, advanced alongside k.
    uint64_t big[8];
    const size_t nbig = large_.size();
    for (size_t i = 0; i < nbig; ++i) big[i] = lo % large_[i];
    while (k < hi) {
      size_t nb = 0;
      for (; k < hi && nb < kBatch; ++k) {
        bool ok = wheel_[res];
        if (++res == w) res = 0;
        for (size_t i = 0; i < nbig; ++i) {
          ok = ok && big[i] != 0;
          if (++big[i] == large_[i]) big[i] = 0;
        }
        if (ok) ks[nb++] = k;
      }
      if (nb == 0) break;
      uint64_t acc = 1;
      for (size_t i = 0; i < nb; ++i) {
        pre[i] = acc;
        acc = mul_(acc, ks[i]);
      }
      uint64_t t = mod_inverse(acc, order_);
      for (size_t i = nb; i-- > 0;) {
        inv[i] = mul_(t, pre[i]);
        t = mul_(t, ks[i]);
      }
      for (size_t i = 0; i < nb; ++i) {
        if (orders(inv[i])) return ks[i];
      }
    }
    return std::nullopt;
  }

  bool orders(uint64_t c) const {
    uint64_t prev = 0;
    for (const auto& fj : f_) {
      uint64_t e = fj(c);
      if (e <= prev) return false;
      prev = e;
    }
    return true;
  }

 private:
  uint64_t order_;
  OrderMul mul_;
  std::vector<FixedMultiplier> f_;
  std::vector<uint64_t> small_, large_;
  std::vector<uint8_t> wheel_;
};

// Smallest coprime k in [from, k_end) with k^-1 ordering the logs. Short
// ranges are scanned directly. Long ones scan a prefix directly, then sweep
// every multiplier with the vector kernel and keep the least inverse; hits
// are sparse by then, so few inversions are needed.
std::optional<uint64_t> first_ordering_k(const FieldParams& field,
                                         const std::vector<uint64_t>& f,
                                         uint64_t from, uint64_t k_end,
                                         unsigned threads) {
  const uint64_t order = field.p - 1;
  if (from >= k_end) return std::nullopt;
  InverseScan scan(field, f);
  uint64_t direct_end = k_end;
  if (k_end - from > order / 16) direct_end = from + order / 128;
  auto k = parallel_first(from, direct_end, kDirectSegment, threads,
                          [&](uint64_t lo, uint64_t hi) { return scan.first(lo, hi); });
  if (k || direct_end >= k_end) return k;

  Det2Kernel kernel(field, f);
  const size_t segments = (order - 1 + kSearchSegment - 1) / kSearchSegment;
  std::vector<uint64_t> best(segments, k_end);
  parallel_for(segments, threads, [&](size_t s) {
    uint64_t lo = 1 + s * kSearchSegment;
    const uint64_t hi = std::min(order, lo + kSearchSegment);
    while (lo < hi) {
      auto c = kernel.search(lo, hi);
      if (!c) break;
      uint64_t inv = mod_inverse(*c, order);
      if (inv >= direct_end && inv < best[s]) best[s] = inv;
      lo = *c + 1;
    }
  });
  uint64_t least = *std::min_element(best.begin(), best.end());
  if (least >= k_end) return std::nullopt;
  return least;
}

}  // namespace

ObservedSequence ObservedSequence::prefix(size_t count) const {
  ObservedSequence out;
  out.session_id = session_id;
  count = std::min(count, addresses.size());
  out.addresses.assign(addresses.begin(), addresses.begin() + count);
  if (has_timestamps()) {
    out.timestamps_us.assign(timestamps_us.begin(), timestamps_us.begin() + count);
  }
  return out;
}

const char* blacklist_mode_name(BlacklistMode mode) {
  switch (mode) {
    case BlacklistMode::kNone: return "none";
    case BlacklistMode::kEmpty: return "empty";
    case BlacklistMode::kDefault: return "default";
    case BlacklistMode::kAmbiguous: return "ambiguous";
  }
  return "none";
}

DetectionResult det1(const ObservedSequence& seq, const FieldParams& field) {
  auto start = Clock::now();
  const uint64_t p = field.p;
  if (seq.size() < 4) {
    return failure(ErrorCode::kTooShort, "det1 needs at least 4 addresses");
  }
  const auto& h = seq.addresses;
  uint64_t d21 = mod_sub(h[1] % p, h[0] % p, p);
  uint64_t d31 = mod_sub(h[2] % p, h[0] % p, p);
  if (d21 == 0) return failure(ErrorCode::kDegenerateInput, "h2 = h1 mod p");
  uint64_t g = mod_sub(mod_mul(d31, mod_inverse(d21, p), p), 1, p);
  if (g == 0 || g == 1) {
    return failure(ErrorCode::kDegenerateInput, "derived generator is 0 or 1");
  }
  uint64_t s = mod_mul(d21, mod_inverse(mod_sub(g, 1, p), p), p);
  int64_t offset = static_cast<int64_t>(h[0]) - static_cast<int64_t>(s);

  DetectionResult r;
  r.detector = "det1";
  r.sampling = "raw";
  r.session_id = seq.session_id;
  r.p = p;
  r.g = g;
  r.offset = offset;
  r.first_state = s;
  uint64_t state = s;
  for (size_t j = 0; j < h.size(); ++j) {
    if (static_cast<int64_t>(state) + offset != static_cast<int64_t>(h[j])) {
      r.status = ErrorCode::kNotZMap;
      r.message = "address " + std::to_string(j + 1) + " does not follow";
      r.elapsed_us = micros_since(start);
      return r;
    }
    r.steps.push_back(j);
    state = mod_mul(state, g, p);
  }
  if (!is_primitive_root(g, field)) {
    r.status = ErrorCode::kNotZMap;
    r.message = "derived generator is not a primitive root";
  } else {
    r.status = ErrorCode::kOk;
  }
  r.elapsed_us = micros_since(start);
  return r;
}

DetectionResult det2(const ObservedSequence& seq, const OffsetHypothesis& hyp,
                     const Det2Options& options) {
  auto start = Clock::now();
  const FieldParams& field = *hyp.field;
  const uint64_t p = field.p;
  const uint64_t order = p - 1;
  const size_t m = options.m;
  if (m < 2 || seq.size() < m) {
    return failure(ErrorCode::kTooShort,
                   "need " + std::to_string(m) + " addresses, have " +
                       std::to_string(seq.size()));
  }
  std::vector<uint64_t> x(m);
  {
    std::unordered_set<Ipv4> seen;
    for (size_t j = 0; j < m; ++j) {
      if (!seen.insert(seq.addresses[j]).second) {
        return failure(ErrorCode::kDuplicateAddress, "repeated address in sequence");
      }
    }
  }
  const uint64_t n = hyp.n ? hyp.n : order;
  for (size_t j = 0; j < m; ++j) {
    int64_t v = static_cast<int64_t>(seq.addresses[j]) - hyp.offset;
    if (v < 1 || static_cast<uint64_t>(v) > n) {
      return failure(ErrorCode::kIncompatibleOffset,
                     "address outside the hypothesis index range");
    }
    x[j] = static_cast<uint64_t>(v);
  }

  const DiscreteLog& dlog = discrete_log_solver(field);
  const uint64_t inv_x1 = mod_inverse(x[0], p);
  std::vector<uint64_t> f(m - 1);
  for (size_t j = 1; j < m; ++j) f[j - 1] = dlog(mod_mul(x[j], inv_x1, p));

  // k runs over ascending coprimes; the multiplier applied to the logs is
  // k^-1, so the first hit is the least k in coprime order.
  uint64_t k_end = order;
  if (options.k_max) {
    k_end = *options.k_max >= field.totient ? order : nth_coprime(*options.k_max, field);
  }
  const unsigned threads = options.threads ? options.threads : default_thread_count();

  DetectionResult r;
  r.detector = "det2";
  r.sampling = "raw";
  r.session_id = seq.session_id;
  r.hypothesis = hyp;
  r.p = p;
  r.offset = hyp.offset;
  r.first_state = x[0];

  uint64_t from = 1;
  for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
    auto k = first_ordering_k(field, f, from, k_end, threads);
    if (!k) break;
    const uint64_t c = mod_inverse(*k, order);
    std::vector<uint64_t> e(m - 1);
    uint64_t gcd_e = 0;
    for (size_t j = 0; j + 1 < m; ++j) {
      e[j] = mod_mul(f[j], c, order);
      gcd_e = std::gcd(gcd_e, e[j]);
    }
    uint64_t gen = mod_pow(field.root, mod_mul(*k, gcd_e, order), p);
    // Replay: x_1 * G^(e_j / r) must give back every observed state.
    bool replay = true;
    for (size_t j = 0; j + 1 < m && replay; ++j) {
      replay = mod_mul(x[0], mod_pow(gen, e[j] / gcd_e, p), p) == x[j + 1];
    }
    r.multiplier = c;
    r.iterations = coprime_count_upto(*k, field);
    if (replay) {
      r.status = ErrorCode::kOk;
      r.g = gen;
      r.k = *k;
      r.r = gcd_e;
      r.steps.assign(1, 0);
      for (uint64_t v : e) r.steps.push_back(v / gcd_e);
      r.elapsed_us = micros_since(start);
      return r;
    }
    from = *k + 1;
  }
  r.status = ErrorCode::kNotZMap;
  r.message = "no multiplier orders the sequence";
  r.iterations = k_end > 1 ? coprime_count_upto(k_end - 1, field) : 0;
  r.elapsed_us = micros_since(start);
  return r;
}

ObservedSequence sample_sequence(const ObservedSequence& seq, size_t m) {
  const size_t c = seq.size();
  if (m < 2 || c < m) {
    throw Error(ErrorCode::kTooShort, "sequence has " + std::to_string(c) +
                                          " records, sampling needs " +
                                          std::to_string(m));
  }
  if (c == m) return seq;
  const size_t stride = (c - 1) / (m - 1);
  ObservedSequence out;
  out.session_id = seq.session_id;
  auto take = [&](size_t i) {
    out.addresses.push_back(seq.addresses[i]);
    if (seq.has_timestamps()) out.timestamps_us.push_back(seq.timestamps_us[i]);
  };
  for (size_t i = 0; i + 1 < m; ++i) take(i * stride);
  take(c - 1);
  return out;
}

DetectionResult detect_with_offsets(const ObservedSequence& seq,
                                    const CidrSet& blacklist,
                                    const DetectOptions& options) {
  auto start = Clock::now();
  if (seq.size() < options.m) {
    auto r = failure(ErrorCode::kTooShort, "sequence shorter than m");
    r.session_id = seq.session_id;
    return r;
  }
  std::vector<OffsetHypothesis> hyps;
  try {
    hyps = compute_offsets(seq, blacklist, options.observation);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kObservationBlacklisted) throw;
    hyps = compute_offsets(seq, CidrSet(), options.observation);
  }

  const ObservedSequence raw = seq.prefix(options.m);
  const ObservedSequence sampled = sample_sequence(seq, options.m);
  const bool distinct = sampled.addresses != raw.addresses;
  Det2Options d2;
  d2.m = options.m;
  d2.k_max = options.k_max;
  d2.threads = options.threads;

  uint64_t iterations = 0;
  bool all_duplicate = true;
  auto run = [&](const ObservedSequence& s, const OffsetHypothesis& h) {
    DetectionResult r = det2(s, h, d2);
    iterations += r.iterations;
    if (r.status != ErrorCode::kDuplicateAddress) all_duplicate = false;
    return r;
  };
  // Completes a success on one variant with the other variant's outcome.
  auto finish = [&](DetectionResult r, bool raw_ok, const OffsetHypothesis& h) {
    bool other_ok = false;
    if (!distinct) {
      other_ok = true;
    } else {
      other_ok = run(raw_ok ? sampled : raw, h).success();
    }
    r.sampling = other_ok ? "raw+sampled" : (raw_ok ? "raw" : "sampled");
    r.session_id = seq.session_id;
    return r;
  };

  std::vector<DetectionResult> wins;
  if (!options.exhaustive) {
    // Raw first over all hypotheses, sampled only if nothing matched.
    for (int pass = 0; pass < (distinct ? 2 : 1) && wins.empty(); ++pass) {
      const ObservedSequence& s = pass == 0 ? raw : sampled;
      for (const auto& h : hyps) {
        DetectionResult r = run(s, h);
        if (r.success()) {
          wins.push_back(finish(std::move(r), pass == 0, h));
          break;
        }
      }
    }
  } else {
    for (const auto& h : hyps) {
      DetectionResult a = run(raw, h);
      DetectionResult b = distinct ? run(sampled, h) : a;
      if (a.success() || b.success()) {
        DetectionResult r = a.success() ? a : b;
        r.sampling = a.success() && b.success() ? "raw+sampled"
                     : a.success()             ? "raw"
                                               : "sampled";
        r.session_id = seq.session_id;
        wins.push_back(std::move(r));
      }
    }
  }

  if (wins.empty()) {
    DetectionResult r = failure(
        all_duplicate && !hyps.empty() ? ErrorCode::kDuplicateAddress
                                       : ErrorCode::kNotZMap,
        hyps.empty() ? "no offset hypothesis fits the observation"
                     : "no hypothesis yields a ZMap ordering");
    r.session_id = seq.session_id;
    r.detector = "det2";
    r.iterations = iterations;
    r.total_iterations = iterations;
    r.elapsed_us = micros_since(start);
    return r;
  }
  DetectionResult best = wins.front();
  for (size_t i = 1; i < wins.size(); ++i) {
    if (wins[i].g != best.g || wins[i].p != best.p) best.conflict = true;
    best.others.push_back(wins[i]);
  }
  best.total_iterations = iterations;
  best.elapsed_us = micros_since(start);
  return best;
}

DetectionResult brute_force_offset(const ObservedSequence& seq,
                                   const FieldParams& field,
                                   const BruteForceOptions& options) {
  auto start = Clock::now();
  if (options.observed_size == 0) {
    throw Error(ErrorCode::kInvalidArgument, "observation size must be positive");
  }
  const uint64_t scan_size = options.scan_size ? options.scan_size : field.p - 1;
  const uint64_t budget_k = k_max(static_cast<double>(options.observed_size),
                                  static_cast<double>(scan_size), options.m,
                                  options.alpha);
  uint64_t i0 = options.i0_begin;
  uint64_t ops = 0;
  const uint64_t block = options.block_base & ~0xFFFu;

  if (options.checkpoint && std::filesystem::exists(*options.checkpoint)) {
    std::ifstream in(*options.checkpoint);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormatError, "bad checkpoint: " + std::string(e.what()));
    }
    if (j.value("p", uint64_t{0}) == field.p &&
        j.value("block_base", uint64_t{0}) == block) {
      i0 = std::max(i0, j.value("next_i0", i0));
      ops = j.value("operations", uint64_t{0});
    }
  }
  auto save = [&](uint64_t next, bool done) {
    if (!options.checkpoint) return;
    nlohmann::json j = {{"p", field.p},           {"block_base", block},
                        {"next_i0", next},        {"operations", ops},
                        {"k_max", budget_k},      {"done", done}};
    std::ofstream out(*options.checkpoint);
    out << j.dump(2) << '\n';
    if (!out) throw Error(ErrorCode::kIo, "cannot write checkpoint");
  };

  Det2Options d2;
  d2.m = options.m;
  d2.k_max = budget_k;
  d2.threads = options.threads;
  for (; i0 < options.i0_end; ++i0) {
    if (options.budget && ops >= *options.budget) {
      save(i0, false);
      DetectionResult r = failure(ErrorCode::kBudgetExceeded, "operation budget exhausted");
      r.detector = "brute";
      r.session_id = seq.session_id;
      r.checkpoint = i0;
      r.operations = ops;
      r.elapsed_us = micros_since(start);
      return r;
    }
    OffsetHypothesis h;
    h.prefix_len = -1;
    h.target = Cidr::containing(options.block_base, kRadixPrefixLen);
    h.blacklist = BlacklistMode::kNone;
    h.field = &field;
    h.n = scan_size;
    h.offset = static_cast<int64_t>(block) - static_cast<int64_t>(i0 << 12) - 1;
    DetectionResult r = det2(seq, h, d2);
    ops += r.iterations;
    if (r.success()) {
      save(i0 + 1, true);
      r.detector = "brute";
      r.checkpoint = i0;
      r.operations = ops;
      r.elapsed_us = micros_since(start);
      return r;
    }
    if (r.status == ErrorCode::kDuplicateAddress || r.status == ErrorCode::kTooShort) {
      r.detector = "brute";
      return r;
    }
  }
  save(i0, true);
  DetectionResult r = failure(ErrorCode::kNotZMap, "no candidate offset matched");
  r.detector = "brute";
  r.session_id = seq.session_id;
  r.checkpoint = i0;
  r.operations = ops;
  r.elapsed_us = micros_since(start);
  return r;
}

double expected_iterations(double observed_size, double scan_size, size_t m) {
  return static_cast<double>(m - 1) * scan_size / observed_size;
}

double expected_operations(double observed_size, double scan_size, size_t m) {
  return std::exp(1.0) * expected_iterations(observed_size, scan_size, m);
}

uint64_t k_max(double observed_size, double scan_size, size_t m, double alpha) {
  double q = observed_size / (static_cast<double>(m - 1) * scan_size);
  if (q >= 1.0) return 1;
  return static_cast<uint64_t>(std::ceil(std::log(alpha) / std::log1p(-q)));
}

double brute_force_false_negative(double alpha) {
  return -std::expm1(std::ldexp(1.0, 20) * std::log1p(-alpha));
}

double theta_bound(size_t m, const FieldParams& field) {
  // 1/(m-1)! = exp(-lgamma(m)).
  double inv_fact = std::exp(-std::lgamma(static_cast<double>(m)));
  return -std::expm1(static_cast<double>(field.totient) * std::log1p(-inv_fact));
}

}  // namespace scanoracle
