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

#include <random>
#include <vector>

#include "scanoracle/cidr_set.h"
#include "scanoracle/error.h"

namespace scanoracle {
namespace {

constexpr Ipv4 kBase = 0x0A000000;  // 10.0.0.0, universe is the /16 above it

// Membership bitmap over the universe.
std::vector<bool> bitmap(const std::vector<Cidr>& cidrs) {
  std::vector<bool> b(1 << 16, false);
  for (const auto& c : cidrs) {
    for (uint64_t i = 0; i < c.size(); ++i) b[c.base + i - kBase] = true;
  }
  return b;
}

std::vector<Cidr> random_cidrs(std::mt19937_64& rng, int n) {
  std::vector<Cidr> v;
  for (int i = 0; i < n; ++i) {
    int len = 18 + static_cast<int>(rng() % 15);
    v.push_back(Cidr::containing(kBase + static_cast<Ipv4>(rng() % 65536), len));
  }
  return v;
}

void expect_matches(const CidrSet& s, const std::vector<bool>& b) {
  uint64_t below = 0;
  for (uint32_t i = 0; i < b.size(); ++i) {
    Ipv4 a = kBase + i;
    ASSERT_EQ(s.contains(a), b[i]) << format_ipv4(a);
    ASSERT_EQ(s.count_below(a), below);
    if (b[i]) {
      ASSERT_EQ(s.nth(below), a);
      ++below;
    }
  }
  EXPECT_EQ(s.count(), below);
}

TEST(Ipv4Text, ParseAndFormat) {
  EXPECT_EQ(parse_ipv4("10.0.19.135"), 0x0A001387u);
  EXPECT_EQ(format_ipv4(0x0A001387u), "10.0.19.135");
  EXPECT_EQ(parse_ipv4("255.255.255.255"), 0xFFFFFFFFu);
  for (const char* bad : {"", "1.2.3", "1.2.3.4.5", "256.1.1.1", "1..2.3", "a.b.c.d",
                          "1.2.3.4 ", "01.2.3.4x"}) {
    EXPECT_FALSE(parse_ipv4(bad).has_value()) << bad;
  }
}

TEST(CidrText, ParseRejectsMisaligned) {
  auto c = parse_cidr("10.0.16.0/20");
  ASSERT_TRUE(c);
  EXPECT_EQ(c->size(), 4096u);
  EXPECT_EQ(c->to_string(), "10.0.16.0/20");
  EXPECT_FALSE(parse_cidr("10.0.16.1/20"));
  EXPECT_FALSE(parse_cidr("10.0.0.0/33"));
  EXPECT_EQ(parse_cidr("0.0.0.0/0")->size(), 1ULL << 32);
  EXPECT_EQ(Cidr::containing(0x0A0013FF, 24), (Cidr{0x0A001300, 24}));
}

TEST(CidrSet, CanonicalForm) {
  auto s = CidrSet::parse("10.0.0.0/25\n10.0.0.128/25 # tail\n\n# x\n10.0.1.0/24\n10.0.0.0/30\n");
  ASSERT_EQ(s.ranges().size(), 1u);
  EXPECT_EQ(s.to_cidrs(), (std::vector<Cidr>{{0x0A000000, 23}}));
  EXPECT_EQ(s.count(), 512u);
  EXPECT_THROW(CidrSet::parse("10.0.0.0/8\nnope\n"), Error);
  EXPECT_TRUE(CidrSet().empty());
  EXPECT_EQ(CidrSet::everything().count(), 1ULL << 32);
  EXPECT_EQ(CidrSet::everything().nth((1ULL << 32) - 1), 0xFFFFFFFFu);
}

TEST(CidrSet, RandomAgainstBitmap) {
  std::mt19937_64 rng(42);
  for (int round = 0; round < 30; ++round) {
    auto a = random_cidrs(rng, 1 + round % 8);
    auto b = random_cidrs(rng, 1 + round % 5);
    auto sa = CidrSet::from_cidrs(a), sb = CidrSet::from_cidrs(b);
    auto ba = bitmap(a), bb = bitmap(b);
    expect_matches(sa, ba);

    std::vector<bool> u(ba.size()), d(ba.size()), x(ba.size());
    bool any = false;
    for (size_t i = 0; i < ba.size(); ++i) {
      u[i] = ba[i] || bb[i];
      d[i] = ba[i] && !bb[i];
      x[i] = ba[i] && bb[i];
      any = any || x[i];
    }
    expect_matches(sa.unite(sb), u);
    expect_matches(sa.subtract(sb), d);
    expect_matches(sa.intersect(sb), x);
    EXPECT_EQ(sa.intersects(sb), any);
    EXPECT_EQ(CidrSet::from_cidrs(sa.to_cidrs()), sa);

    Ipv4 lo = kBase + static_cast<Ipv4>(rng() % 65536);
    Ipv4 hi = lo + static_cast<Ipv4>(rng() % 5000);
    if (hi >= kBase + 65536) hi = kBase + 65535;
    uint64_t in = 0;
    for (Ipv4 q = lo; q <= hi; ++q) in += ba[q - kBase];
    EXPECT_EQ(sa.count_in(lo, hi), in);
    EXPECT_EQ(sa.covers(lo, hi), in == uint64_t{hi - lo} + 1);
  }
}

TEST(CidrSet, DefaultBlacklist) {
  const auto& b = default_zmap_blacklist();
  EXPECT_FALSE(b.empty());
  EXPECT_TRUE(b.contains(*parse_ipv4("10.1.2.3")));
  EXPECT_TRUE(b.contains(*parse_ipv4("127.0.0.1")));
  EXPECT_TRUE(b.contains(*parse_ipv4("192.168.0.1")));
  EXPECT_FALSE(b.contains(*parse_ipv4("8.8.8.8")));
  EXPECT_EQ(CidrSet::parse(default_zmap_blacklist_text()), b);
}

}  // namespace
}  // namespace scanoracle
