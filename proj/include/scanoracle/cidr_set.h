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
#ifndef SCANORACLE_CIDR_SET_H_
#define SCANORACLE_CIDR_SET_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scanoracle {

// IPv4 addresses are carried as host-order integers throughout.
using Ipv4 = uint32_t;

std::optional<Ipv4> parse_ipv4(std::string_view text);
std::string format_ipv4(Ipv4 addr);

struct Cidr {
  Ipv4 base = 0;
  int prefix_len = 0;

  uint64_t size() const { return 1ULL << (32 - prefix_len); }
  Ipv4 last() const { return static_cast<Ipv4>(base + size() - 1); }
  bool contains(Ipv4 a) const { return a >= base && a <= last(); }
  std::string to_string() const;

  // The /len block containing addr.
  static Cidr containing(Ipv4 addr, int prefix_len);

  friend bool operator==(const Cidr&, const Cidr&) = default;
};

// "A.B.C.D/len" or a bare address (/32). Host bits must be zero.
std::optional<Cidr> parse_cidr(std::string_view text);

// A set of IPv4 addresses in canonical form: sorted, disjoint, merged
// inclusive ranges. Membership, rank and select are O(log |ranges|).
class CidrSet {
 public:
  struct Range {
    Ipv4 lo;
    Ipv4 hi;  // inclusive
    friend bool operator==(const Range&, const Range&) = default;
  };

  CidrSet() = default;
  explicit CidrSet(std::vector<Range> ranges);

  static CidrSet from_cidrs(const std::vector<Cidr>& cidrs);
  static CidrSet single(const Cidr& cidr) { return from_cidrs({cidr}); }
  static CidrSet everything() { return single(Cidr{0, 0}); }

  // One CIDR per line, '#' comments and blank lines ignored.
  static CidrSet parse(std::string_view text);
  static CidrSet load(const std::filesystem::path& path);

  bool empty() const { return ranges_.empty(); }
  uint64_t count() const { return total_; }
  bool contains(Ipv4 addr) const;
  // Members strictly below addr.
  uint64_t count_below(Ipv4 addr) const;
  // Members in [lo, hi].
  uint64_t count_in(Ipv4 lo, Ipv4 hi) const;
  // The index-th smallest member (0-based).
  Ipv4 nth(uint64_t index) const;
  bool covers(Ipv4 lo, Ipv4 hi) const;
  bool intersects(const CidrSet& other) const;

  CidrSet unite(const CidrSet& other) const;
  CidrSet subtract(const CidrSet& other) const;
  CidrSet intersect(const CidrSet& other) const;

  const std::vector<Range>& ranges() const { return ranges_; }
  // Minimal CIDR decomposition, ascending.
  std::vector<Cidr> to_cidrs() const;
  std::string to_string() const;

  friend bool operator==(const CidrSet& a, const CidrSet& b) {
    return a.ranges_ == b.ranges_;
  }

 private:
  void finalize();

  std::vector<Range> ranges_;
  std::vector<uint64_t> before_;  // members in ranges_[0..i)
  uint64_t total_ = 0;
};

// ZMap's stock conf/blacklist.conf (reserved and special-use ranges).
const CidrSet& default_zmap_blacklist();
std::string_view default_zmap_blacklist_text();

}  // namespace scanoracle

#endif  // SCANORACLE_CIDR_SET_H_
