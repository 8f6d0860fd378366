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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "scanoracle/error.h"
#include "scanoracle/ingest.h"

namespace scanoracle {
namespace {

Ipv4 ip(const char* s) { return *parse_ipv4(s); }

PacketRecord rec(int64_t t, const char* src, Ipv4 dst, uint16_t id = kZMapIpId,
                 uint16_t port = 443) {
  PacketRecord r;
  r.timestamp_us = t;
  r.src = ip(src);
  r.dst = dst;
  r.dport = port;
  r.ip_id = id;
  return r;
}

// n packets from src to distinct destinations, `step_us` apart.
std::vector<PacketRecord> burst(const char* src, int64_t t0, int n, int64_t step_us) {
  std::vector<PacketRecord> v;
  for (int i = 0; i < n; ++i) v.push_back(rec(t0 + i * step_us, src, ip("45.0.0.0") + i));
  return v;
}

TEST(ParseLog, Examples) {
  std::string text = std::string(kLogHeader) +
                     "\n1618099200000000,1.2.3.4,10.0.0.7,tcp,443,54321\n"
                     "1618099200000100,1.2.3.4,10.0.0.8,udp,53,7\n"
                     "1618099200000200,1.2.3.5,10.0.0.9,icmp,0,0\n";
  ParseStats st;
  auto r = parse_log_text(text, nullptr, &st);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(st.lines, 3u);
  EXPECT_EQ(r[0].timestamp_us, 1618099200000000);
  EXPECT_EQ(r[0].src, ip("1.2.3.4"));
  EXPECT_EQ(r[0].dst, ip("10.0.0.7"));
  EXPECT_EQ(r[0].proto, Proto::kTcp);
  EXPECT_EQ(r[0].dport, 443);
  EXPECT_EQ(r[0].ip_id, 54321);
  EXPECT_EQ(r[1].proto, Proto::kUdp);
  EXPECT_EQ(format_record(r[0]), "1618099200000000,1.2.3.4,10.0.0.7,tcp,443,54321");

  CidrSet obs = CidrSet::single(*parse_cidr("10.0.0.8/31"));
  auto f = parse_log_text(text, &obs, &st);
  EXPECT_EQ(f.size(), 2u);
  EXPECT_EQ(st.outside, 1u);
}

TEST(ParseLog, MalformedLines) {
  std::ostringstream text;
  text << kLogHeader << '\n';
  for (int i = 0; i < 200; ++i) text << "1000," << "1.2.3.4,10.0.0." << i % 250 << ",tcp,80,1\n";
  text << "oops\n";
  ParseStats st;
  auto r = parse_log_text(text.str(), nullptr, &st);
  EXPECT_EQ(r.size(), 200u);
  EXPECT_EQ(st.malformed, 1u);
  for (const char* bad : {"1,1.2.3.4,10.0.0.1,tcp,80", "1,1.2.3.4,10.0.0.1,tcp,80,1,9",
                          "x,1.2.3.4,10.0.0.1,tcp,80,1", "1,1.2.3.4,10.0.0.1,sctp,80,1",
                          "1,1.2.3.4,10.0.0.1,tcp,70000,1", "1,1.2.3.4,10.0.0.300,tcp,80,1"}) {
    try {
      parse_log_text(bad);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kFormatError);
    }
  }
  // Header is optional.
  EXPECT_EQ(parse_log_text("5,1.2.3.4,10.0.0.1,tcp,80,1\n").size(), 1u);
  try {
    parse_log("/nonexistent/log.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

TEST(ParseLog, FileRoundTrip) {
  auto path = std::filesystem::temp_directory_path() / "scanoracle_ingest.csv";
  auto recs = burst("9.9.9.9", 1000, 10, 5);
  {
    std::ofstream out(path);
    out << kLogHeader << '\n';
    for (const auto& r : recs) out << format_record(r) << '\n';
  }
  auto back = parse_log(path);
  ASSERT_EQ(back.size(), recs.size());
  for (size_t i = 0; i < recs.size(); ++i) EXPECT_EQ(format_record(back[i]), format_record(recs[i]));
  std::filesystem::remove(path);
}

TEST(Sessionize, Examples) {
  auto one = burst("1.1.1.1", 0, 30, 2000000);
  EXPECT_EQ(sessionize(one).size(), 1u);

  auto split = burst("1.1.1.1", 0, 15, 2000000);
  auto later = burst("1.1.1.1", 28000000 + 600000000, 15, 2000000);
  split.insert(split.end(), later.begin(), later.end());
  auto s = sessionize(split);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].records.size(), 15u);
  EXPECT_LT(s[0].records.back().timestamp_us, s[1].records.front().timestamp_us);

  EXPECT_TRUE(sessionize(burst("1.1.1.1", 0, 4, 1000)).empty());
  EXPECT_EQ(sessionize(burst("1.1.1.1", 0, 5, 1000)).size(), 1u);
  // Repeats of 4 destinations still count as 4.
  auto rep = burst("1.1.1.1", 0, 4, 1000);
  auto again = burst("1.1.1.1", 10000, 4, 1000);
  rep.insert(rep.end(), again.begin(), again.end());
  EXPECT_TRUE(sessionize(rep).empty());
}

TEST(Sessionize, KeysAndOrdering) {
  auto a = burst("1.1.1.1", 500, 10, 10);
  auto b = burst("2.2.2.2", 100, 10, 10);
  auto c = burst("1.1.1.1", 300, 10, 10);
  for (auto& r : c) r.dport = 80;
  std::vector<PacketRecord> all;
  // Interleave and shuffle arrival order; sessions must still be time ordered.
  for (size_t i = 0; i < 10; ++i) {
    all.push_back(a[9 - i]);
    all.push_back(b[i]);
    all.push_back(c[i]);
  }
  auto s = sessionize(all);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0].src, ip("2.2.2.2"));
  EXPECT_EQ(s[1].dport, 80);
  EXPECT_EQ(s[2].id, "1.1.1.1/tcp/443@500");
  for (const auto& x : s) {
    EXPECT_GE(x.distinct_dst_count, 5u);
    for (size_t i = 1; i < x.records.size(); ++i) {
      EXPECT_LE(x.records[i - 1].timestamp_us, x.records[i].timestamp_us);
    }
    auto q = x.sequence();
    EXPECT_EQ(q.size(), x.records.size());
    EXPECT_TRUE(q.has_timestamps());
    EXPECT_EQ(q.session_id, x.id);
  }
}

TEST(Sessionize, StableUnderConcatenation) {
  auto log1 = burst("1.1.1.1", 0, 20, 1000);
  auto extra = burst("3.3.3.3", 5000, 8, 1000);
  log1.insert(log1.end(), extra.begin(), extra.end());
  auto log2 = burst("1.1.1.1", 1000000000, 20, 1000);
  auto both = log1;
  both.insert(both.end(), log2.begin(), log2.end());
  auto merged = sessionize(log1);
  auto s2 = sessionize(log2);
  merged.insert(merged.end(), s2.begin(), s2.end());
  auto whole = sessionize(both);
  ASSERT_EQ(whole.size(), merged.size());
  for (size_t i = 0; i < whole.size(); ++i) {
    EXPECT_EQ(whole[i].id, merged[i].id);
    EXPECT_EQ(whole[i].records.size(), merged[i].records.size());
  }
}

TEST(Fingerprint, Threshold) {
  ScanSession s;
  s.records = burst("1.1.1.1", 0, 20, 1);
  EXPECT_TRUE(fingerprint(s).zmap_ipid);
  EXPECT_DOUBLE_EQ(fingerprint(s).zmap_fingerprint_ratio, 1.0);
  s.records[3].ip_id = 1;
  auto f = fingerprint(s);
  EXPECT_DOUBLE_EQ(f.zmap_fingerprint_ratio, 0.95);
  EXPECT_TRUE(f.zmap_ipid);
  s.records[4].ip_id = 1;
  EXPECT_FALSE(fingerprint(s).zmap_ipid);
  for (auto& r : s.records) r.ip_id = 0;
  EXPECT_FALSE(fingerprint(s).zmap_ipid);
  EXPECT_FALSE(fingerprint(ScanSession{}).zmap_ipid);
}

}  // namespace
}  // namespace scanoracle
