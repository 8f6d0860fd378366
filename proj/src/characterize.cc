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
#include "scanoracle/characterize.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <tuple>
#include <unordered_set>

#include "scanoracle/error.h"
#include "scanoracle/parallel.h"

namespace scanoracle {
namespace {

using FrameKey = std::tuple<uint64_t, uint64_t, int64_t, uint64_t, uint64_t,
                            std::vector<CidrSet::Range>>;

struct FrameCache {
  std::mutex mu;
  std::vector<std::pair<FrameKey, std::shared_ptr<const void>>> entries;
};

FrameCache& frame_cache() {
  static FrameCache cache;
  return cache;
}

constexpr size_t kFrameCacheSize = 16;

uint64_t index_limit(const DetectionResult& d) {
  if (d.hypothesis && d.hypothesis->n) return d.hypothesis->n;
  return d.p - 1;
}

}  // namespace

RankFrame::RankFrame(const DetectionResult& detection, const CidrSet& observation,
                     uint64_t max_addresses) {
  if (!detection.success()) {
    throw Error(ErrorCode::kRequiresSuccess, "ranking needs a successful detection");
  }
  field_ = field_for_prime(detection.p);
  if (!field_) throw Error(ErrorCode::kInvalidArgument, "not a ZMap prime");
  generator_ = detection.g;
  offset_ = detection.offset;
  n_ = index_limit(detection);
  const uint64_t order = field_->p - 1;
  const DiscreteLog& dlog = discrete_log_solver(*field_);
  const uint64_t lg = dlog(generator_);
  coset_gcd_ = std::gcd(lg, order);
  orbit_ = order / coset_gcd_;
  log_scale_ = orbit_ == 1 ? 0 : mod_inverse((lg / coset_gcd_) % orbit_, orbit_);
  coset_ = dlog(detection.first_state) % coset_gcd_;
  auto pos_of_log = [&](uint64_t lx) -> std::optional<uint64_t> {
    if (lx % coset_gcd_ != coset_) return std::nullopt;
    if (orbit_ == 1) return 0;
    return mod_mul((lx - coset_) / coset_gcd_, log_scale_, orbit_);
  };
  origin_ = *pos_of_log(dlog(detection.first_state));

  FrameKey key{field_->p, generator_, offset_, n_, coset_, observation.ranges()};
  {
    FrameCache& cache = frame_cache();
    std::lock_guard<std::mutex> lock(cache.mu);
    for (const auto& [k, v] : cache.entries) {
      if (k == key) {
        positions_ = std::static_pointer_cast<const Sorted>(v);
        return;
      }
    }
  }

  // Candidate addresses: observation members with a valid index.
  std::vector<Ipv4> cand;
  for (const auto& r : observation.ranges()) {
    int64_t lo = std::max<int64_t>(r.lo, offset_ + 1);
    int64_t hi = std::min<int64_t>(r.hi, offset_ + static_cast<int64_t>(n_));
    if (lo > hi) continue;
    if (cand.size() + static_cast<uint64_t>(hi - lo + 1) > max_addresses) {
      throw Error(ErrorCode::kInvalidArgument, "observation too large to rank");
    }
    for (int64_t h = lo; h <= hi; ++h) cand.push_back(static_cast<Ipv4>(h));
  }
  std::vector<uint64_t> pos(cand.size(), UINT64_MAX);
  const size_t chunk = 4096;
  parallel_for((cand.size() + chunk - 1) / chunk, 0, [&](size_t c) {
    size_t end = std::min(cand.size(), (c + 1) * chunk);
    for (size_t i = c * chunk; i < end; ++i) {
      uint64_t x = static_cast<uint64_t>(static_cast<int64_t>(cand[i]) - offset_);
      if (auto v = pos_of_log(dlog(x))) pos[i] = *v;
    }
  });
  auto sorted = std::make_shared<Sorted>();
  std::vector<size_t> idx;
  for (size_t i = 0; i < cand.size(); ++i) {
    if (pos[i] != UINT64_MAX) idx.push_back(i);
  }
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return pos[a] < pos[b]; });
  for (size_t i : idx) {
    sorted->pos.push_back(pos[i]);
    sorted->addr.push_back(cand[i]);
  }
  positions_ = sorted;
  FrameCache& cache = frame_cache();
  std::lock_guard<std::mutex> lock(cache.mu);
  if (cache.entries.size() >= kFrameCacheSize) cache.entries.erase(cache.entries.begin());
  cache.entries.emplace_back(std::move(key), sorted);
}

std::optional<uint64_t> RankFrame::position(Ipv4 ip) const {
  int64_t x = static_cast<int64_t>(ip) - offset_;
  if (x < 1 || static_cast<uint64_t>(x) > n_) return std::nullopt;
  uint64_t lx = discrete_log(static_cast<uint64_t>(x), *field_);
  if (lx % coset_gcd_ != coset_) return std::nullopt;
  if (orbit_ == 1) return 0;
  return mod_mul((lx - coset_) / coset_gcd_, log_scale_, orbit_);
}

std::optional<uint64_t> RankFrame::delta(Ipv4 ip) const {
  auto p = position(ip);
  if (!p) return std::nullopt;
  return *p >= origin_ ? *p - origin_ : *p + orbit_ - origin_;
}

uint64_t RankFrame::count_positions(uint64_t lo, uint64_t hi) const {
  if (lo >= hi) return 0;
  const auto& v = positions_->pos;
  return static_cast<uint64_t>(std::lower_bound(v.begin(), v.end(), hi) -
                               std::lower_bound(v.begin(), v.end(), lo));
}

uint64_t RankFrame::count_below(uint64_t d) const {
  d = std::min(d, orbit_);
  uint64_t end = origin_ + d;
  if (end <= orbit_) return count_positions(origin_, end);
  return count_positions(origin_, orbit_) + count_positions(0, end - orbit_);
}

uint64_t RankFrame::rank(Ipv4 ip) const {
  auto d = delta(ip);
  if (!d) {
    throw Error(ErrorCode::kInvalidArgument, format_ipv4(ip) + " is not on the scan orbit");
  }
  return 1 + count_below(*d);
}

std::vector<std::pair<Ipv4, uint64_t>> RankFrame::ranks() const {
  const Sorted& s = *positions_;
  std::vector<std::pair<Ipv4, uint64_t>> out;
  out.reserve(s.size());
  size_t start = std::lower_bound(s.pos.begin(), s.pos.end(), origin_) - s.pos.begin();
  for (size_t i = 0; i < s.size(); ++i) {
    out.emplace_back(s.addr[(start + i) % s.size()], i + 1);
  }
  return out;
}

std::pair<double, double> progress_visibility(uint64_t l, uint64_t rk_last,
                                              uint64_t m) {
  if (l == 0 || rk_last == 0) {
    throw Error(ErrorCode::kInvalidArgument, "ranks must be positive");
  }
  return {static_cast<double>(rk_last) / static_cast<double>(l),
          static_cast<double>(m) / static_cast<double>(rk_last)};
}

PacketRates packet_rates(uint64_t rk_first, uint64_t rk_last, uint64_t m,
                         int64_t t_first_us, int64_t t_last_us) {
  if (t_last_us == t_first_us) {
    throw Error(ErrorCode::kZeroDuration, "first and last packet share a timestamp");
  }
  double dt = static_cast<double>(t_last_us - t_first_us) / 1e6;
  return {(static_cast<double>(rk_last) - static_cast<double>(rk_first)) / dt,
          static_cast<double>(m) / dt};
}

double line_rate_pps(double bits_per_second) {
  return bits_per_second / (8.0 * kSynWireBytes);
}

std::pair<Ipv4, int> targeted_prefix(const DetectionResult& detection) {
  if (!detection.success()) {
    throw Error(ErrorCode::kRequiresSuccess, "targeted prefix needs a successful detection");
  }
  if (!detection.hypothesis) return {0, 0};
  return {detection.hypothesis->target.base, detection.hypothesis->prefix_len};
}

std::vector<std::pair<Ipv4, uint64_t>> rank_addresses(
    const DetectionResult& detection, const CidrSet& observation) {
  return RankFrame(detection, observation).ranks();
}

ScanProfile characterize(const DetectionResult& detection,
                         const ObservedSequence& seq, const CidrSet& observation,
                         Ipv4 src) {
  ScanProfile prof;
  prof.session_id = seq.session_id.empty() ? detection.session_id : seq.session_id;
  prof.detection = detection;
  prof.src = src;
  auto frame = std::make_shared<RankFrame>(detection, observation);
  prof.frame = frame;
  prof.l = frame->l();
  if (detection.hypothesis) {
    prof.targeted_prefix = detection.hypothesis->target;
    prof.blacklist = detection.hypothesis->blacklist;
  }

  std::unordered_set<Ipv4> seen;
  std::optional<size_t> first, last;
  uint64_t last_delta = 0;
  for (size_t i = 0; i < seq.size(); ++i) {
    Ipv4 a = seq.addresses[i];
    if (!observation.contains(a)) continue;
    auto d = frame->delta(a);
    if (!d) continue;
    if (!first) first = i;
    last = i;
    last_delta = *d;
    seen.insert(a);
  }
  if (!first || prof.l == 0) {
    throw Error(ErrorCode::kInvalidArgument, "no observed address lies on the scan orbit");
  }
  prof.m = seen.size();
  prof.rk_first = frame->rank(seq.addresses[*first]);
  prof.rk_last = 1 + frame->count_below(last_delta);
  std::tie(prof.progress, prof.visibility) =
      progress_visibility(prof.l, prof.rk_last, prof.m);
  prof.arc_begin = *frame->position(seq.addresses[*first]);
  prof.arc_span = last_delta - *frame->delta(seq.addresses[*first]);

  if (seq.has_timestamps()) {
    prof.t_first_us = seq.timestamps_us[*first];
    prof.t_last_us = seq.timestamps_us[*last];
    if (prof.t_last_us != prof.t_first_us) {
      PacketRates rates = packet_rates(prof.rk_first, prof.rk_last, prof.m,
                                       prof.t_first_us, prof.t_last_us);
      prof.epr = rates.epr;
      prof.opr = rates.opr;
      prof.epr_total = rates.epr * static_cast<double>(index_limit(detection)) /
                       static_cast<double>(prof.l);
    }
  }
  return prof;
}

const char* locality_name(Locality l) {
  switch (l) {
    case Locality::kSame24: return "same_24";
    case Locality::kSeveral24: return "several_24";
    case Locality::kDistinct24: return "distinct_24";
  }
  return "same_24";
}

std::vector<CooperationGroup> group_cooperating_sources(
    std::vector<ScanProfile>& profiles, double window_seconds) {
  using Key = std::tuple<uint64_t, uint64_t, int64_t>;
  std::map<Key, std::vector<size_t>> by_key;
  for (size_t i = 0; i < profiles.size(); ++i) {
    const auto& d = profiles[i].detection;
    profiles[i].cooperation_group = -1;
    if (!d.success()) continue;
    by_key[{d.p, d.g, d.offset}].push_back(i);
  }
  const bool chained = std::isfinite(window_seconds);
  const int64_t window_us = chained ? static_cast<int64_t>(window_seconds * 1e6) : 0;
  std::vector<CooperationGroup> groups;
  for (auto& [key, idx] : by_key) {
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
      return std::tie(profiles[a].t_first_us, a) < std::tie(profiles[b].t_first_us, b);
    });
    size_t begin = 0;
    int64_t end_us = profiles[idx[0]].t_last_us;
    for (size_t i = 1; i <= idx.size(); ++i) {
      if (i < idx.size() &&
          (!chained || profiles[idx[i]].t_first_us <= end_us + window_us)) {
        end_us = std::max(end_us, profiles[idx[i]].t_last_us);
        continue;
      }
      if (i - begin >= 2) {
        CooperationGroup g;
        g.id = 0;
        std::tie(g.p, g.g, g.offset) = key;
        g.members.assign(idx.begin() + begin, idx.begin() + i);
        groups.push_back(std::move(g));
      }
      if (i < idx.size()) {
        begin = i;
        end_us = profiles[idx[i]].t_last_us;
      }
    }
  }
  std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) {
    return a.members.front() < b.members.front();
  });

  for (size_t gi = 0; gi < groups.size(); ++gi) {
    CooperationGroup& g = groups[gi];
    g.id = static_cast<int>(gi);
    std::map<Ipv4, size_t> nets;
    for (size_t i : g.members) {
      profiles[i].cooperation_group = g.id;
      g.summed_visibility += profiles[i].visibility;
      ++nets[profiles[i].src >> 8];
    }
    g.locality = nets.size() == 1                ? Locality::kSame24
                 : nets.size() == g.members.size() ? Locality::kDistinct24
                                                   : Locality::kSeveral24;
    for (size_t a = 0; a < g.members.size() && !g.overlapping; ++a) {
      for (size_t b = a + 1; b < g.members.size(); ++b) {
        const auto& x = profiles[g.members[a]];
        const auto& y = profiles[g.members[b]];
        if (x.t_first_us <= y.t_last_us && y.t_first_us <= x.t_last_us) {
          g.overlapping = true;
          break;
        }
      }
    }
    g.sharding_suspected = g.overlapping;

    // Union of swept arcs per coset, counted on the shared orbit.
    bool frames = std::all_of(g.members.begin(), g.members.end(),
                              [&](size_t i) { return profiles[i].frame != nullptr; });
    if (!frames) continue;
    std::map<uint64_t, std::vector<std::pair<uint64_t, uint64_t>>> arcs;
    std::unordered_set<Ipv4> observed;
    uint64_t swept = 0;
    std::map<uint64_t, const RankFrame*> frame_of;
    for (size_t i : g.members) {
      const auto& pr = profiles[i];
      const RankFrame* f = pr.frame.get();
      frame_of[f->coset()] = f;
      uint64_t len = f->orbit_length();
      uint64_t lo = pr.arc_begin, hi = pr.arc_begin + pr.arc_span + 1;
      auto& v = arcs[f->coset()];
      if (hi <= len) {
        v.emplace_back(lo, hi);
      } else {
        v.emplace_back(lo, len);
        v.emplace_back(0, std::min(len, hi - len));
      }
    }
    uint64_t distinct = 0;
    for (size_t i : g.members) distinct += profiles[i].m;
    for (auto& [coset, v] : arcs) {
      std::sort(v.begin(), v.end());
      uint64_t cur_lo = v[0].first, cur_hi = v[0].second;
      for (size_t k = 1; k <= v.size(); ++k) {
        if (k < v.size() && v[k].first <= cur_hi) {
          cur_hi = std::max(cur_hi, v[k].second);
          continue;
        }
        swept += frame_of[coset]->count_positions(cur_lo, cur_hi);
        if (k < v.size()) {
          cur_lo = v[k].first;
          cur_hi = v[k].second;
        }
      }
    }
    if (swept > 0) {
      g.combined_visibility = static_cast<double>(distinct) / static_cast<double>(swept);
    }
  }
  return groups;
}

}  // namespace scanoracle
