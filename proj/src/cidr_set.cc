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
#include "scanoracle/cidr_set.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "scanoracle/error.h"

namespace scanoracle {

CidrSet::CidrSet(std::vector<Range> ranges) : ranges_(std::move(ranges)) {
  finalize();
}

void CidrSet::finalize() {
  std::sort(ranges_.begin(), ranges_.end(),
            [](const Range& a, const Range& b) { return a.lo < b.lo; });
  std::vector<Range> merged;
  merged.reserve(ranges_.size());
  for (const Range& r : ranges_) {
    if (!merged.empty() &&
        static_cast<uint64_t>(r.lo) <= static_cast<uint64_t>(merged.back().hi) + 1) {
      merged.back().hi = std::max(merged.back().hi, r.hi);
    } else {
      merged.push_back(r);
    }
  }
  ranges_ = std::move(merged);
  before_.resize(ranges_.size());
  total_ = 0;
  for (size_t i = 0; i < ranges_.size(); ++i) {
    before_[i] = total_;
    total_ += static_cast<uint64_t>(ranges_[i].hi) - ranges_[i].lo + 1;
  }
}

CidrSet CidrSet::from_cidrs(const std::vector<Cidr>& cidrs) {
  std::vector<Range> ranges;
  ranges.reserve(cidrs.size());
  for (const Cidr& c : cidrs) ranges.push_back({c.base, c.last()});
  return CidrSet(std::move(ranges));
}

CidrSet CidrSet::parse(std::string_view text) {
  std::vector<Cidr> cidrs;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    auto cidr = parse_cidr(line);
    if (!cidr) {
      throw Error(ErrorCode::kFormatError,
                  "line " + std::to_string(line_no) + ": bad CIDR '" +
                      std::string(line) + "'");
    }
    cidrs.push_back(*cidr);
  }
  return from_cidrs(cidrs);
}

CidrSet CidrSet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool CidrSet::contains(Ipv4 addr) const {
  auto it = std::upper_bound(
      ranges_.begin(), ranges_.end(), addr,
      [](Ipv4 a, const Range& r) { return a < r.lo; });
  if (it == ranges_.begin()) return false;
  return addr <= std::prev(it)->hi;
}

uint64_t CidrSet::count_below(Ipv4 addr) const {
  auto it = std::upper_bound(
      ranges_.begin(), ranges_.end(), addr,
      [](Ipv4 a, const Range& r) { return a < r.lo; });
  if (it == ranges_.begin()) return 0;
  const size_t i = static_cast<size_t>(std::prev(it) - ranges_.begin());
  const Range& r = ranges_[i];
  if (addr > r.hi) return before_[i] + (static_cast<uint64_t>(r.hi) - r.lo + 1);
  return before_[i] + (addr - r.lo);
}

uint64_t CidrSet::count_in(Ipv4 lo, Ipv4 hi) const {
  if (lo > hi) return 0;
  return count_below(hi) + (contains(hi) ? 1 : 0) - count_below(lo);
}

Ipv4 CidrSet::nth(uint64_t index) const {
  if (index >= total_) {
    throw Error(ErrorCode::kIndexOutOfRange, "CidrSet::nth past end");
  }
  auto it = std::upper_bound(before_.begin(), before_.end(), index);
  const size_t i = static_cast<size_t>(it - before_.begin()) - 1;
  return static_cast<Ipv4>(ranges_[i].lo + (index - before_[i]));
}

bool CidrSet::covers(Ipv4 lo, Ipv4 hi) const {
  return count_in(lo, hi) == static_cast<uint64_t>(hi) - lo + 1;
}

bool CidrSet::intersects(const CidrSet& other) const {
  size_t i = 0, j = 0;
  while (i < ranges_.size() && j < other.ranges_.size()) {
    const Range& a = ranges_[i];
    const Range& b = other.ranges_[j];
    if (a.hi < b.lo) {
      ++i;
    } else if (b.hi < a.lo) {
      ++j;
    } else {
      return true;
    }
  }
  return false;
}

CidrSet CidrSet::unite(const CidrSet& other) const {
  std::vector<Range> all = ranges_;
  all.insert(all.end(), other.ranges_.begin(), other.ranges_.end());
  return CidrSet(std::move(all));
}

CidrSet CidrSet::intersect(const CidrSet& other) const {
  std::vector<Range> out;
  size_t i = 0, j = 0;
  while (i < ranges_.size() && j < other.ranges_.size()) {
    const Range& a = ranges_[i];
    const Range& b = other.ranges_[j];
    const Ipv4 lo = std::max(a.lo, b.lo);
    const Ipv4 hi = std::min(a.hi, b.hi);
    if (lo <= hi) out.push_back({lo, hi});
    if (a.hi < b.hi) {
      ++i;
    } else {
      ++j;
    }
  }
  return CidrSet(std::move(out));
}

CidrSet CidrSet::subtract(const CidrSet& other) const {
  std::vector<Range> out;
  size_t j = 0;
  for (const Range& a : ranges_) {
    uint64_t lo = a.lo;
    const uint64_t hi = a.hi;
    while (j < other.ranges_.size() && other.ranges_[j].hi < lo) ++j;
    size_t k = j;
    while (lo <= hi && k < other.ranges_.size() && other.ranges_[k].lo <= hi) {
      const Range& b = other.ranges_[k];
      if (b.lo > lo) out.push_back({static_cast<Ipv4>(lo), b.lo - 1});
      lo = static_cast<uint64_t>(b.hi) + 1;
      ++k;
    }
    if (lo <= hi) out.push_back({static_cast<Ipv4>(lo), static_cast<Ipv4>(hi)});
  }
  return CidrSet(std::move(out));
}

std::vector<Cidr> CidrSet::to_cidrs() const {
  std::vector<Cidr> out;
  for (const Range& r : ranges_) {
    uint64_t lo = r.lo;
    const uint64_t end = static_cast<uint64_t>(r.hi) + 1;
    while (lo < end) {
      int len = lo == 0 ? 0 : 32 - __builtin_ctzll(lo);
      if (len < 0) len = 0;
      while (lo + (1ULL << (32 - len)) > end) ++len;
      out.push_back(Cidr{static_cast<Ipv4>(lo), len});
      lo += 1ULL << (32 - len);
    }
  }
  return out;
}

std::string CidrSet::to_string() const {
  std::string s;
  for (const Cidr& c : to_cidrs()) {
    if (!s.empty()) s += ",";
    s += c.to_string();
  }
  return s;
}

std::string_view default_zmap_blacklist_text() {
  static constexpr std::string_view kText =
      "0.0.0.0/8\n"
      "10.0.0.0/8\n"
      "100.64.0.0/10\n"
      "127.0.0.0/8\n"
      "169.254.0.0/16\n"
      "172.16.0.0/12\n"
      "192.0.0.0/24\n"
      "192.0.2.0/24\n"
      "192.88.99.0/24\n"
      "192.168.0.0/16\n"
      "198.18.0.0/15\n"
      "198.51.100.0/24\n"
      "203.0.113.0/24\n"
      "240.0.0.0/4\n"
      "255.255.255.255/32\n"
      "224.0.0.0/4\n";
  return kText;
}

const CidrSet& default_zmap_blacklist() {
  static const CidrSet set = CidrSet::parse(default_zmap_blacklist_text());
  return set;
}

}  // namespace scanoracle
