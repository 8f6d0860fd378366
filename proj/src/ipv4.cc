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
#include <charconv>
#include <cstdio>

#include "scanoracle/cidr_set.h"

namespace scanoracle {

std::optional<Ipv4> parse_ipv4(std::string_view text) {
  Ipv4 value = 0;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int octet = 0; octet < 4; ++octet) {
    unsigned part = 0;
    auto [next, ec] = std::from_chars(p, end, part);
    if (ec != std::errc() || next == p || next - p > 3 || part > 255) {
      return std::nullopt;
    }
    value = (value << 8) | part;
    p = next;
    if (octet < 3) {
      if (p == end || *p != '.') return std::nullopt;
      ++p;
    }
  }
  if (p != end) return std::nullopt;
  return value;
}

std::string format_ipv4(Ipv4 addr) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%u.%u.%u.%u", addr >> 24,
                (addr >> 16) & 0xff, (addr >> 8) & 0xff, addr & 0xff);
  return buf;
}

std::string Cidr::to_string() const {
  return format_ipv4(base) + "/" + std::to_string(prefix_len);
}

Cidr Cidr::containing(Ipv4 addr, int prefix_len) {
  const uint32_t mask =
      prefix_len == 0 ? 0u : ~uint32_t{0} << (32 - prefix_len);
  return Cidr{addr & mask, prefix_len};
}

std::optional<Cidr> parse_cidr(std::string_view text) {
  const size_t slash = text.find('/');
  auto addr = parse_ipv4(text.substr(0, slash));
  if (!addr) return std::nullopt;
  int len = 32;
  if (slash != std::string_view::npos) {
    std::string_view rest = text.substr(slash + 1);
    auto [next, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), len);
    if (ec != std::errc() || next != rest.data() + rest.size() || len < 0 ||
        len > 32) {
      return std::nullopt;
    }
  }
  Cidr c = Cidr::containing(*addr, len);
  if (c.base != *addr) return std::nullopt;
  return c;
}

}  // namespace scanoracle
