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
#ifndef SCANORACLE_INGEST_H_
#define SCANORACLE_INGEST_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "scanoracle/cidr_set.h"
#include "scanoracle/detect.h"

namespace scanoracle {

enum class Proto { kTcp, kUdp, kIcmp, kOther };
const char* proto_name(Proto p);

inline constexpr uint16_t kZMapIpId = 54321;

struct PacketRecord {
  int64_t timestamp_us = 0;
  Ipv4 src = 0;
  Ipv4 dst = 0;
  Proto proto = Proto::kTcp;
  uint16_t dport = 0;
  uint16_t ip_id = 0;
};

struct ParseOptions {
  double max_malformed_fraction = 0.01;
};

struct ParseStats {
  size_t lines = 0;      // data lines, header excluded
  size_t malformed = 0;
  size_t outside = 0;    // dst not in the observation set
};

// CSV `timestamp_us,src,dst,proto,dport,ip_id` with one header line. Records
// whose dst falls outside `observation` (when given) are dropped. Throws
// Error(kIo) if unreadable and Error(kFormatError) past the malformed limit.
std::vector<PacketRecord> parse_log(const std::filesystem::path& path,
                                    const CidrSet* observation = nullptr,
                                    ParseStats* stats = nullptr,
                                    const ParseOptions& options = {});
std::vector<PacketRecord> parse_log_text(std::string_view text,
                                         const CidrSet* observation = nullptr,
                                         ParseStats* stats = nullptr,
                                         const ParseOptions& options = {});
std::string format_record(const PacketRecord& r);
inline constexpr std::string_view kLogHeader = "timestamp_us,src,dst,proto,dport,ip_id";

struct ScanSession {
  std::string id;
  Ipv4 src = 0;
  Proto proto = Proto::kTcp;
  uint16_t dport = 0;
  std::vector<PacketRecord> records;  // time ordered
  size_t distinct_dst_count = 0;
  double zmap_fingerprint_ratio = 0.0;
  bool zmap_ipid = false;

  ObservedSequence sequence() const;
};

// Groups by (src, proto, dport), splits on gaps longer than gap_seconds and
// drops sessions with fewer than min_distinct destinations. Output is sorted
// by (first timestamp, src, proto, dport).
std::vector<ScanSession> sessionize(const std::vector<PacketRecord>& records,
                                    double gap_seconds = 60.0,
                                    size_t min_distinct = 5);

// Share of packets carrying IP ID 54321; labeled at >= 0.95.
ScanSession fingerprint(ScanSession session, double threshold = 0.95);

// A dry-run file as one session with no timestamps.
ObservedSequence sequence_from_dryrun(const std::filesystem::path& path);

}  // namespace scanoracle

#endif  // SCANORACLE_INGEST_H_
