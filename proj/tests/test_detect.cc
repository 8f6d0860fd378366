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
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.h"
#include "scanoracle/detect.h"
#include "scanoracle/error.h"
#include "scanoracle/zmapgen.h"

namespace scanoracle {
namespace {

Ipv4 ip(const char* s) { return *parse_ipv4(s); }
CidrSet net(const char* s) { return CidrSet::single(*parse_cidr(s)); }
const FieldParams& field(int i) { return zmap_fields()[i]; }

ObservedSequence seq_of(std::vector<Ipv4> a) {
  ObservedSequence s;
  s.session_id = "t";
  s.addresses = std::move(a);
  return s;
}

ObservedSequence observe(const ScanConfig& cfg, const CidrSet& obs, size_t count) {
  return seq_of(generate_sequence(cfg, count, &obs));
}

// The hypothesis that matches the scan's own whitelist and blacklist.
OffsetHypothesis true_hypothesis(const ObservedSequence& seq, const ScanConfig& cfg,
                                 int prefix_len, BlacklistMode mode) {
  CidrSet b = mode == BlacklistMode::kEmpty ? CidrSet() : cfg.blacklist;
  for (const auto& h : compute_offsets(seq, b)) {
    bool mode_ok = h.blacklist == mode || h.blacklist == BlacklistMode::kAmbiguous;
    if (h.prefix_len == prefix_len && mode_ok) return h;
    for (auto [k, m] : h.aliases) {
      if (k == prefix_len && m == mode) return h;
    }
  }
  ADD_FAILURE() << "no hypothesis for /" << prefix_len;
  return {};
}

TEST(Det1, Examples) {
  auto r = det1(seq_of({15, 45, 135, 148}), field(0));
  ASSERT_TRUE(r.success()) << r.message;
  EXPECT_EQ(r.g, 3u);
  EXPECT_EQ(r.offset, 0);
  EXPECT_EQ(r.first_state, 15u);

  r = det1(seq_of({25, 55, 145, 158}), field(0));
  ASSERT_TRUE(r.success()) << r.message;
  EXPECT_EQ(r.g, 3u);
  EXPECT_EQ(r.offset, 10);

  EXPECT_EQ(det1(seq_of({7, 7, 9, 11}), field(0)).status, ErrorCode::kDegenerateInput);
  EXPECT_EQ(det1(seq_of({15, 45, 135}), field(0)).status, ErrorCode::kTooShort);
  EXPECT_EQ(det1(seq_of({15, 45, 135, 149}), field(0)).status, ErrorCode::kNotZMap);
  // g = 2 is no primitive root of 257.
  EXPECT_EQ(det1(seq_of({5, 10, 20, 40}), field(0)).status, ErrorCode::kNotZMap);
}

TEST(Det1, SyntheticScans) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    auto cfg = build_scan_config(net("45.1.2.0/24"), {}, seed);
    auto seq = seq_of(generate_sequence(cfg, kNoLimit));
    auto r = det1(seq, *cfg.field);
    ASSERT_TRUE(r.success()) << r.message;
    EXPECT_EQ(r.g, cfg.generator);
    EXPECT_EQ(r.offset, static_cast<int64_t>(ip("45.1.2.0")) - 1);
  }
}

TEST(Det2, Example) {
  OffsetHypothesis h;
  h.field = &field(0);
  h.offset = 0;
  Det2Options o;
  o.m = 3;
  auto r = det2(seq_of({5, 45, 187}), h, o);
  ASSERT_TRUE(r.success()) << r.message;
  EXPECT_EQ(r.g, 3u);
  EXPECT_EQ(r.r, 1u);
  EXPECT_EQ(r.multiplier, 1u);
  EXPECT_EQ(r.iterations, 1u);
  EXPECT_EQ(r.steps, (std::vector<uint64_t>{0, 2, 5}));
  EXPECT_EQ(mod_pow(field(0).root, r.k * r.r % 256, 257), r.g);
}

TEST(Det2, Errors) {
  OffsetHypothesis h;
  h.field = &field(0);
  Det2Options o;
  o.m = 3;
  EXPECT_EQ(det2(seq_of({5, 5, 187}), h, o).status, ErrorCode::kDuplicateAddress);
  h.offset = 5;
  EXPECT_EQ(det2(seq_of({5, 45, 187}), h, o).status, ErrorCode::kIncompatibleOffset);
  h.offset = 0;
  h.n = 100;
  EXPECT_EQ(det2(seq_of({5, 45, 187}), h, o).status, ErrorCode::kIncompatibleOffset);
  h.n = 0;
  EXPECT_EQ(det2(seq_of({5, 45}), h, o).status, ErrorCode::kTooShort);
}

TEST(Det2, MatchesDefinitionAtSmallPrimes) {
  std::mt19937_64 rng(21);
  for (int fi = 0; fi < 2; ++fi) {
    const auto& f = field(fi);
    for (int round = 0; round < 300; ++round) {
      size_t m = 3 + rng() % 6;
      std::set<uint64_t> s;
      while (s.size() < m) s.insert(1 + rng() % (f.p - 1));
      std::vector<Ipv4> a(s.begin(), s.end());
      std::shuffle(a.begin(), a.end(), rng);
      OffsetHypothesis h;
      h.field = &f;
      Det2Options o;
      o.m = m;
      auto r = det2(seq_of(a), h, o);
      std::vector<uint64_t> x(a.begin(), a.end());
      auto k = oracle::first_ordering_k(x, f.root, f.p);
      ASSERT_EQ(r.success(), k.has_value());
      if (k) {
        EXPECT_EQ(r.k, *k);
        EXPECT_EQ(oracle::mulmod(r.multiplier, *k, f.p - 1), 1u);
        EXPECT_EQ(r.iterations, coprime_count_upto(*k, f));
        // The recovered G steps x_1 onto every observation.
        for (size_t j = 0; j < m; ++j) {
          EXPECT_EQ(oracle::mulmod(x[0], oracle::powmod(r.g, r.steps[j], f.p), f.p), x[j]);
        }
      }
    }
  }
}

// Sparse hits at p2 push the first k past the directly scanned prefix, so
// the answer comes from the multiplier sweep; it must still be the least k.
TEST(Det2, LeastKFromSweepMatchesDefinition) {
  const CidrSet w = net("45.0.0.0/8");
  const CidrSet obs = net("45.1.2.0/24");
  int beyond = 0;
  for (uint64_t seed = 1; seed <= 4; ++seed) {
    auto cfg = build_scan_config(w, {}, seed);
    auto seq = observe(cfg, obs, 20);
    auto h = true_hypothesis(seq, cfg, 8, BlacklistMode::kEmpty);
    auto r = det2(seq, h);
    ASSERT_TRUE(r.success()) << r.message;
    EXPECT_EQ(r.g, cfg.generator);
    std::vector<uint64_t> x;
    for (Ipv4 a : seq.addresses) x.push_back(static_cast<uint64_t>(a - h.offset));
    const auto& f = *cfg.field;
    auto k = oracle::first_ordering_k(x, f.p, [&](uint64_t v) { return discrete_log(v, f); });
    ASSERT_TRUE(k.has_value());
    EXPECT_EQ(r.k, *k);
    beyond += *k > (f.p - 1) / 64;
  }
  EXPECT_GT(beyond, 0);
}

TEST(Det2, RandomSequenceAtP4IsRejected) {
  std::mt19937_64 rng(22);
  std::vector<Ipv4> a;
  while (a.size() < 20) a.push_back(static_cast<Ipv4>(1 + rng() % 0xFFFFFFFEu));
  OffsetHypothesis h;
  h.field = &field(4);
  auto r = det2(seq_of(a), h);
  EXPECT_EQ(r.status, ErrorCode::kNotZMap);
  EXPECT_EQ(r.iterations, field(4).totient);
}

TEST(Det2, KmaxLimitsTheSearch) {
  std::mt19937_64 rng(23);
  std::vector<Ipv4> a;
  while (a.size() < 20) a.push_back(static_cast<Ipv4>(1 + rng() % 0xFFFFFFFEu));
  OffsetHypothesis h;
  h.field = &field(4);
  Det2Options o;
  o.k_max = 5000;
  auto r = det2(seq_of(a), h, o);
  EXPECT_EQ(r.status, ErrorCode::kNotZMap);
  EXPECT_EQ(r.iterations, 5000u);
}

// Soundness: correct offset, in-order packets, 100 configurations per prime.
void soundness(const CidrSet& w, const CidrSet& obs, int prefix_len, int fi) {
  std::mt19937_64 rng(30 + fi);
  for (int round = 0; round < 100; ++round) {
    auto cfg = build_scan_config(w, {}, rng());
    ASSERT_EQ(cfg.field->index, static_cast<unsigned>(fi));
    auto all = generate_sequence(cfg, 30, &obs);
    auto seq = seq_of(std::vector<Ipv4>(all.begin(), all.begin() + 20));
    auto h = true_hypothesis(seq, cfg, prefix_len, BlacklistMode::kEmpty);
    Det2Options o;
    o.threads = 1;
    auto r = det2(seq, h, o);
    ASSERT_TRUE(r.success()) << fi << " " << round;
    ASSERT_EQ(r.g, cfg.generator);
    // Replay predicts the held-out continuation.
    uint64_t s = r.first_state;
    std::vector<Ipv4> predicted;
    while (predicted.size() < all.size()) {
      int64_t a = static_cast<int64_t>(s) + r.offset;
      if (s <= h.n && obs.contains(static_cast<Ipv4>(a))) predicted.push_back(static_cast<Ipv4>(a));
      s = oracle::mulmod(s, r.g, r.p);
    }
    EXPECT_EQ(predicted, all);
  }
}

TEST(Det2, SoundnessP0) { soundness(net("45.1.2.0/24"), net("45.1.2.0/24"), 24, 0); }
TEST(Det2, SoundnessP1) { soundness(net("45.1.0.0/16"), net("45.1.0.0/16"), 16, 1); }
TEST(Det2, SoundnessP2) { soundness(net("45.0.0.0/8"), net("45.7.0.0/16"), 8, 2); }

TEST(Det2, SoundnessSampledLargePrimes) {
  std::mt19937_64 rng(35);
  struct Case {
    const char* w;
    const char* o;
    int k;
  } cases[] = {{"32.0.0.0/4", "45.7.0.0/16", 4}, {"0.0.0.0/0", "45.7.0.0/16", 0}};
  for (const auto& c : cases) {
    for (int round = 0; round < 3; ++round) {
      auto cfg = build_scan_config(net(c.w), {}, rng());
      auto seq = observe(cfg, net(c.o), 20);
      auto r = det2(seq, true_hypothesis(seq, cfg, c.k, BlacklistMode::kEmpty));
      ASSERT_TRUE(r.success());
      EXPECT_EQ(r.g, cfg.generator);
    }
  }
}

TEST(Det2, LegacyShardRecoversPower) {
  std::mt19937_64 rng(36);
  for (uint32_t d : {2u, 3u, 5u}) {
    for (uint32_t k = 0; k < d; ++k) {
      auto cfg = build_scan_config(net("45.1.0.0/16"), {}, rng(), {ShardScheme::kLegacy, d, k});
      auto seq = observe(cfg, net("45.1.0.0/16"), 20);
      auto r = det2(seq, true_hypothesis(seq, cfg, 16, BlacklistMode::kEmpty));
      ASSERT_TRUE(r.success());
      EXPECT_EQ(r.g, oracle::powmod(cfg.generator, d, cfg.p()));
    }
  }
}

TEST(Sampling, Examples) {
  std::vector<Ipv4> a;
  for (Ipv4 i = 1; i <= 41; ++i) a.push_back(i);
  auto s = sample_sequence(seq_of(a), 20);
  std::vector<Ipv4> want;
  for (Ipv4 i = 1; i <= 37; i += 2) want.push_back(i);
  want.push_back(41);
  EXPECT_EQ(s.addresses, want);

  a.resize(20);
  EXPECT_EQ(sample_sequence(seq_of(a), 20).addresses, a);
  a.resize(19);
  try {
    sample_sequence(seq_of(a), 20);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooShort);
  }
}

TEST(Sampling, KeepsTimestampsAndEnds) {
  ObservedSequence s;
  for (int i = 0; i < 100; ++i) {
    s.addresses.push_back(1000 + i);
    s.timestamps_us.push_back(i * 10);
  }
  auto t = sample_sequence(s, 20);
  ASSERT_EQ(t.size(), 20u);
  ASSERT_TRUE(t.has_timestamps());
  EXPECT_EQ(t.addresses.front(), 1000u);
  EXPECT_EQ(t.addresses.back(), 1099u);
  EXPECT_EQ(t.timestamps_us.back(), 990);
  for (size_t i = 1; i < t.size(); ++i) EXPECT_LT(t.addresses[i - 1], t.addresses[i]);
}

TEST(Offsets, InternetWideEmptyBlacklist) {
  auto seq = seq_of({ip("45.7.1.2"), ip("45.7.200.9"), ip("45.7.3.3")});
  auto hs = compute_offsets(seq, {});
  ASSERT_EQ(hs.front().prefix_len, 0);
  EXPECT_EQ(hs.front().offset, -1);
  EXPECT_EQ(hs.front().blacklist, BlacklistMode::kEmpty);
  EXPECT_EQ(hs.front().field->index, 4u);
  // Every prefix up to /16 contains the observations; all share offset
  // N - 1 - (blocks below N inside t_k).
  int deepest = 0;
  for (const auto& h : hs) deepest = std::max(deepest, h.prefix_len);
  for (const auto& h : hs) {
    for (auto [k, m] : h.aliases) deepest = std::max(deepest, k);
  }
  EXPECT_EQ(deepest, 16);
}

TEST(Offsets, ExcludedBlockBelow) {
  auto seq = seq_of({ip("45.7.1.2"), ip("45.7.1.9")});
  CidrSet b = net("20.0.0.0/20");
  auto hs = compute_offsets(seq, b);
  bool found = false;
  for (const auto& h : hs) {
    if (h.prefix_len == 0 && h.blacklist == BlacklistMode::kDefault) {
      EXPECT_EQ(h.offset, 4095);
      EXPECT_EQ(h.n, (1ULL << 32) - 4096);
      found = true;
    }
  }
  EXPECT_TRUE(found);
  // Both modes coincide for prefixes away from the excluded block.
  bool ambiguous = false;
  for (const auto& h : hs) ambiguous = ambiguous || h.blacklist == BlacklistMode::kAmbiguous;
  EXPECT_TRUE(ambiguous);
}

TEST(Offsets, ObservationBlacklisted) {
  auto seq = seq_of({ip("10.0.0.1"), ip("10.0.0.2")});
  try {
    compute_offsets(seq, default_zmap_blacklist());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kObservationBlacklisted);
  }
  CidrSet obs = net("45.0.0.0/8");
  auto ok = seq_of({ip("45.0.0.1"), ip("45.0.0.2")});
  EXPECT_THROW(compute_offsets(ok, net("45.1.0.0/16"), &obs), Error);
}

// The affine map x -> x + offset matches the real
// index map on every address whose image lies in the observed /20.
TEST(Offsets, AffineOnObservedBlock) {
  std::mt19937_64 rng(40);
  for (int round = 0; round < 20; ++round) {
    std::vector<Cidr> holes;
    for (int i = 0; i < 4; ++i) {
      holes.push_back(Cidr::containing(ip("45.0.0.0") + static_cast<Ipv4>(rng() % 65536),
                                       18 + static_cast<int>(rng() % 10)));
    }
    CidrSet b = CidrSet::from_cidrs(holes).subtract(net("45.0.160.0/20"));
    auto cfg = build_scan_config(net("45.0.0.0/16"), b, rng());
    auto seq = seq_of({ip("45.0.160.7"), ip("45.0.175.255")});
    auto h = true_hypothesis(seq, cfg, 16, BlacklistMode::kDefault);
    for (uint64_t x = 1; x <= cfg.n; ++x) {
      Ipv4 a = index_to_address(x, cfg);
      if (a >> 12 == ip("45.0.160.0") >> 12) {
        ASSERT_EQ(static_cast<int64_t>(a), static_cast<int64_t>(x) + h.offset);
      }
    }
  }
}

TEST(DetectWithOffsets, InternetWideDefaultBlacklist) {
  auto cfg = build_scan_config(CidrSet::everything(), default_zmap_blacklist(), 2024);
  CidrSet obs = net("45.7.0.0/16");
  auto seq = observe(cfg, obs, 40);
  DetectOptions o;
  o.observation = &obs;
  auto r = detect_with_offsets(seq, default_zmap_blacklist(), o);
  ASSERT_TRUE(r.success()) << r.message;
  EXPECT_EQ(r.g, cfg.generator);
  ASSERT_TRUE(r.hypothesis);
  EXPECT_EQ(r.hypothesis->prefix_len, 0);
  EXPECT_EQ(r.hypothesis->blacklist, BlacklistMode::kDefault);
  EXPECT_EQ(r.sampling, "raw+sampled");
  EXPECT_GE(r.total_iterations, r.iterations);
}

TEST(DetectWithOffsets, TargetedSlash16) {
  auto cfg = build_scan_config(net("45.7.0.0/16"), {}, 99);
  CidrSet obs = net("45.7.32.0/20");
  auto seq = observe(cfg, obs, 40);
  auto r = detect_with_offsets(seq, default_zmap_blacklist());
  ASSERT_TRUE(r.success()) << r.message;
  EXPECT_EQ(r.g, cfg.generator);
  EXPECT_EQ(r.hypothesis->prefix_len, 16);
  EXPECT_EQ(r.hypothesis->target, *parse_cidr("45.7.0.0/16"));
}

TEST(DetectWithOffsets, InterleavedScansAreNotZMap) {
  auto a = build_scan_config(net("45.7.0.0/16"), {}, 1);
  auto b = build_scan_config(net("45.7.0.0/16"), {}, 2);
  ASSERT_NE(a.generator, b.generator);
  CidrSet obs = net("45.7.0.0/20");
  auto sa = generate_sequence(a, 20, &obs), sb = generate_sequence(b, 20, &obs);
  // Irregular merge keeping each scan's order, so no stride of the merged
  // run falls on a single scan.
  std::vector<Ipv4> mixed;
  std::set<Ipv4> seen;
  std::mt19937_64 rng(12);
  size_t ia = 0, ib = 0;
  while (ia < sa.size() || ib < sb.size()) {
    bool take_a = ib == sb.size() || (ia < sa.size() && rng() % 2);
    Ipv4 v = take_a ? sa[ia++] : sb[ib++];
    if (seen.insert(v).second) mixed.push_back(v);
  }
  auto r = detect_with_offsets(seq_of(mixed), {});
  EXPECT_EQ(r.status, ErrorCode::kNotZMap);
  EXPECT_GT(r.total_iterations, 0u);
}

TEST(DetectWithOffsets, TooShortAndExhaustive) {
  EXPECT_EQ(detect_with_offsets(seq_of({1, 2, 3}), {}).status, ErrorCode::kTooShort);
  auto cfg = build_scan_config(net("45.7.0.0/16"), {}, 5);
  CidrSet obs = net("45.7.0.0/16");
  auto seq = observe(cfg, obs, 20);
  DetectOptions o;
  o.exhaustive = true;
  o.k_max = 200000;  // keeps the wide wrong hypotheses cheap
  auto r = detect_with_offsets(seq, {}, o);
  ASSERT_TRUE(r.success());
  EXPECT_EQ(r.hypothesis->prefix_len, 16);
  EXPECT_FALSE(r.conflict);
}

TEST(ClosedForms, IterationsAndOperations) {
  EXPECT_DOUBLE_EQ(expected_iterations(65536, 4294967296.0, 20), 1245184.0);
  EXPECT_DOUBLE_EQ(expected_iterations(500, 500, 20), 19.0);
  EXPECT_DOUBLE_EQ(expected_iterations(16, 4096, 2), 256.0);
  double ops = expected_operations(256, 4294967296.0, 20);
  EXPECT_NEAR(std::log2(ops), 30.0, 0.5);
}

TEST(ClosedForms, KmaxAndFalseNegative) {
  uint64_t k = k_max(65536, 4294967296.0, 20, 1e-8);
  EXPECT_GT(k, 1ULL << 24);
  EXPECT_LT(k, 1ULL << 26);
  EXPECT_NEAR(brute_force_false_negative(1e-8), 0.01, 0.0005);
  EXPECT_EQ(k_max(1e9, 10, 20, 1e-8), 1u);
}

TEST(ClosedForms, Theta) {
  const auto& p4 = field(4);
  EXPECT_NEAR(theta_bound(14, p4), 0.16, 0.16 * 0.05);
  EXPECT_NEAR(theta_bound(15, p4), 0.013, 0.013 * 0.05);
  EXPECT_NEAR(theta_bound(17, p4), 5.4e-5, 5.4e-5 * 0.05);
  EXPECT_NEAR(theta_bound(20, p4), 9.3e-9, 9.3e-9 * 0.05);
  EXPECT_NEAR(theta_bound(10, field(1)), 0.086, 0.001);
}

// Custom blacklist below the observation: the default hypotheses miss, the
// brute force over i0 finds the block count.
TEST(BruteForce, FindsOffsetAndResumes) {
  CidrSet b = net("45.7.0.0/20").unite(net("45.7.64.0/19"));
  auto cfg = build_scan_config(net("45.7.0.0/16"), b, 77);
  CidrSet obs = net("45.7.240.0/20");
  auto seq = observe(cfg, obs, 20);
  BruteForceOptions o;
  o.alpha = 1e-4;
  o.block_base = ip("45.7.240.0");
  o.observed_size = 4096;
  o.scan_size = cfg.n;
  o.i0_end = 4096;
  o.threads = 1;
  auto r = brute_force_offset(seq, *cfg.field, o);
  ASSERT_TRUE(r.success()) << r.message;
  EXPECT_EQ(r.g, cfg.generator);
  EXPECT_EQ(r.offset, static_cast<int64_t>(ip("45.7.240.0")) - 12 * 4096 - 1);
  EXPECT_EQ(r.checkpoint, 12u);
  EXPECT_EQ(r.detector, "brute");

  auto dir = std::filesystem::temp_directory_path() / "scanoracle_brute_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  o.checkpoint = dir / "ck.json";
  o.budget = 1;
  auto stopped = brute_force_offset(seq, *cfg.field, o);
  EXPECT_EQ(stopped.status, ErrorCode::kBudgetExceeded);
  EXPECT_EQ(stopped.checkpoint, 1u);
  EXPECT_GT(stopped.operations, 0u);
  o.budget.reset();
  auto resumed = brute_force_offset(seq, *cfg.field, o);
  ASSERT_TRUE(resumed.success());
  EXPECT_EQ(resumed.offset, r.offset);
  EXPECT_EQ(resumed.operations, r.operations);
  std::filesystem::remove_all(dir);

  o.checkpoint.reset();
  o.observed_size = 0;
  EXPECT_THROW(brute_force_offset(seq, *cfg.field, o), Error);
}

}  // namespace
}  // namespace scanoracle
