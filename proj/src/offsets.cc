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
#include <algorithm>

#include "scanoracle/detect.h"
#include "scanoracle/zmapgen.h"

namespace scanoracle {

std::vector<OffsetHypothesis> compute_offsets(const ObservedSequence& seq,
                                              const CidrSet& blacklist,
                                              const CidrSet* observation) {
  std::vector<OffsetHypothesis> out;
  if (seq.addresses.empty()) return out;
  if (observation && observation->intersects(blacklist)) {
    throw Error(ErrorCode::kObservationBlacklisted,
                "observation network overlaps the blacklist");
  }
  const auto [lo_it, hi_it] =
      std::minmax_element(seq.addresses.begin(), seq.addresses.end());
  const Ipv4 h_min = *lo_it, h_max = *hi_it;
  for (Ipv4 a : seq.addresses) {
    if (blacklist.contains(a)) {
      throw Error(ErrorCode::kObservationBlacklisted,
                  "observed address " + format_ipv4(a) + " is blacklisted");
    }
  }

  const CidrSet none;
  const bool with_blacklist = !blacklist.empty();
  for (int k = 0; k <= 24; ++k) {
    Cidr t = Cidr::containing(seq.addresses.front(), k);
    if (!t.contains(h_min) || !t.contains(h_max)) break;
    for (int mode = 0; mode < (with_blacklist ? 2 : 1); ++mode) {
      const CidrSet& b = mode == 0 ? none : blacklist;
      ScanOrdering order(CidrSet::single(t).subtract(b));
      if (order.size() == 0) continue;
      // The observed span must be affine in the index: no gaps, one region.
      uint64_t pos_min = order.position_of(h_min);
      uint64_t pos_max = order.position_of(h_max);
      if (pos_max < pos_min || pos_max - pos_min != uint64_t{h_max} - h_min) continue;

      OffsetHypothesis h;
      h.prefix_len = k;
      h.target = t;
      h.blacklist = mode == 0 ? BlacklistMode::kEmpty : BlacklistMode::kDefault;
      h.n = order.size();
      h.field = &select_prime(h.n);
      h.offset = static_cast<int64_t>(h_min) - static_cast<int64_t>(pos_min) - 1;

      auto same = std::find_if(out.begin(), out.end(), [&](const OffsetHypothesis& o) {
        return o.field == h.field && o.offset == h.offset;
      });
      if (same == out.end()) {
        out.push_back(std::move(h));
        continue;
      }
      if (same->prefix_len == k && same->blacklist != h.blacklist) {
        same->blacklist = BlacklistMode::kAmbiguous;
        same->n = std::max(same->n, h.n);
      } else {
        same->aliases.emplace_back(k, h.blacklist);
      }
    }
  }
  return out;
}

}  // namespace scanoracle
