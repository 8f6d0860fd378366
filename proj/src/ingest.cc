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
#include "scanoracle/ingest.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <tuple>
#include <unordered_set>

#include "scanoracle/error.h"
#include "scanoracle/zmapgen.h"

namespace scanoracle {
namespace {

template <typename T>
bool parse_int(std::string_view s, T* out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::optional<Proto> parse_proto(std::string_view s) {
  if (s == "tcp") return Proto::kTcp;
  if (s == "udp") return Proto::kUdp;
  if (s == "icmp") return Proto::kIcmp;
  if (s == "other") return Proto::kOther;
  return std::nullopt;
}

std::optional<PacketRecord> parse_line(std::string_view line) {
  std::string_view f[6];
  size_t n = 0;
  while (n < 6) {
    size_t comma = line.find(',');
    f[n++] = line.substr(0, comma);
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
    if (n == 6) return std::nullopt;  // trailing fields
  }
  if (n != 6) return std::nullopt;
  PacketRecord r;
  uint32_t port = 0, id = 0;
  auto src = parse_ipv4(f[1]);
  auto dst = parse_ipv4(f[2]);
  auto proto = parse_proto(f[3]);
  if (!parse_int(f[0], &r.timestamp_us) || !src || !dst || !proto ||
      !parse_int(f[4], &port) || !parse_int(f[5], &id) || port > 65535 ||
      id > 65535) {
    return std::nullopt;
  }
  r.src = *src;
  r.dst = *dst;
  r.proto = *proto;
  r.dport = static_cast<uint16_t>(port);
  r.ip_id = static_cast<uint16_t>(id);
  return r;
}

std::vector<PacketRecord> parse_stream(std::istream& in, const CidrSet* observation,
                                       ParseStats* stats_out,
                                       const ParseOptions& options) {
  ParseStats stats;
  std::vector<PacketRecord> out;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (header) {
      header = false;
      if (line.rfind("timestamp_us", 0) == 0) continue;
    }
    if (line.empty()) continue;
    ++stats.lines;
    auto r = parse_line(line);
    if (!r) {
      ++stats.malformed;
      continue;
    }
    if (observation && !observation->contains(r->dst)) {
      ++stats.outside;
      continue;
    }
    out.push_back(*r);
  }
  if (stats_out) *stats_out = stats;
  if (stats.lines > 0 && static_cast<double>(stats.malformed) >
                             options.max_malformed_fraction * stats.lines) {
    throw Error(ErrorCode::kFormatError,
                std::to_string(stats.malformed) + " of " +
                    std::to_string(stats.lines) + " lines malformed");
  }
  return out;
}

}  // namespace

const char* proto_name(Proto p) {
  switch (p) {
    case Proto::kTcp: return "tcp";
    case Proto::kUdp: return "udp";
    case Proto::kIcmp: return "icmp";
    case Proto::kOther: return "other";
  }
  return "other";
}

std::vector<PacketRecord> parse_log(const std::filesystem::path& path,
                                    const CidrSet* observation, ParseStats* stats,
                                    const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  return parse_stream(in, observation, stats, options);
}

std::vector<PacketRecord> parse_log_text(std::string_view text,
                                         const CidrSet* observation,
                                         ParseStats* stats,
                                         const ParseOptions& options) {
  std::istringstream in{std::string(text)};
  return parse_stream(in, observation, stats, options);
}

std::string format_record(const PacketRecord& r) {
  return std::to_string(r.timestamp_us) + "," + format_ipv4(r.src) + "," +
         format_ipv4(r.dst) + "," + proto_name(r.proto) + "," +
         std::to_string(r.dport) + "," + std::to_string(r.ip_id);
}

ObservedSequence ScanSession::sequence() const {
  ObservedSequence s;
  s.session_id = id;
  for (const auto& r : records) {
    s.addresses.push_back(r.dst);
    s.timestamps_us.push_back(r.timestamp_us);
  }
  return s;
}

std::vector<ScanSession> sessionize(const std::vector<PacketRecord>& records,
                                    double gap_seconds, size_t min_distinct) {
  using Key = std::tuple<Ipv4, int, uint16_t>;
  std::map<Key, std::vector<PacketRecord>> groups;
  for (const auto& r : records) {
    groups[{r.src, static_cast<int>(r.proto), r.dport}].push_back(r);
  }
  const int64_t gap_us = static_cast<int64_t>(gap_seconds * 1e6);
  std::vector<ScanSession> out;
  for (auto& [key, recs] : groups) {
    std::stable_sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) {
      return a.timestamp_us < b.timestamp_us;
    });
    size_t begin = 0;
    for (size_t i = 1; i <= recs.size(); ++i) {
      if (i < recs.size() && recs[i].timestamp_us - recs[i - 1].timestamp_us <= gap_us) {
        continue;
      }
      ScanSession s;
      s.src = std::get<0>(key);
      s.proto = static_cast<Proto>(std::get<1>(key));
      s.dport = std::get<2>(key);
      s.records.assign(recs.begin() + begin, recs.begin() + i);
      std::unordered_set<Ipv4> dsts;
      for (const auto& r : s.records) dsts.insert(r.dst);
      s.distinct_dst_count = dsts.size();
      begin = i;
      if (s.distinct_dst_count < min_distinct) continue;
      out.push_back(fingerprint(std::move(s)));
    }
  }
  std::sort(out.begin(), out.end(), [](const ScanSession& a, const ScanSession& b) {
    return std::make_tuple(a.records.front().timestamp_us, a.src,
                           static_cast<int>(a.proto), a.dport) <
           std::make_tuple(b.records.front().timestamp_us, b.src,
                           static_cast<int>(b.proto), b.dport);
  });
  for (auto& s : out) {
    s.id = format_ipv4(s.src) + "/" + proto_name(s.proto) + "/" +
           std::to_string(s.dport) + "@" +
           std::to_string(s.records.front().timestamp_us);
  }
  return out;
}

ScanSession fingerprint(ScanSession session, double threshold) {
  size_t marked = 0;
  for (const auto& r : session.records) marked += r.ip_id == kZMapIpId;
  session.zmap_fingerprint_ratio =
      session.records.empty() ? 0.0
                              : static_cast<double>(marked) / session.records.size();
  session.zmap_ipid = !session.records.empty() &&
                      session.zmap_fingerprint_ratio >= threshold;
  return session;
}

ObservedSequence sequence_from_dryrun(const std::filesystem::path& path) {
  ObservedSequence s;
  s.session_id = path.filename().string();
  s.addresses = read_dryrun(path);
  return s;
}

}  // namespace scanoracle
