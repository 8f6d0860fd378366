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
#ifndef SCANORACLE_CHARACTERIZE_H_
#define SCANORACLE_CHARACTERIZE_H_

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scanoracle/cidr_set.h"
#include "scanoracle/detect.h"

namespace scanoracle {

// Position of every reachable observation address along a recovered scan
// orbit. Reachable means h - offset is a valid index and lies on the orbit
// of the recovered generator through the first observed state. Positions are
// generator exponents relative to the orbit's canonical origin, so any state
// on the orbit can serve as a reference.
class RankFrame {
 public:
  // Throws Error(kRequiresSuccess) for failed detections and
  // Error(kInvalidArgument) if more than `max_addresses` would need ranking.
  RankFrame(const DetectionResult& detection, const CidrSet& observation,
            uint64_t max_addresses = 1ULL << 22);

  uint64_t l() const { return positions_->size(); }
  uint64_t orbit_length() const { return orbit_; }
  // Exponent of the address relative to the first observed state, or
  // nullopt if the address is unreachable.
  std::optional<uint64_t> delta(Ipv4 ip) const;
  // Reachable observation addresses with delta < d.
  uint64_t count_below(uint64_t d) const;
  // 1 + count_below(delta(ip)); throws Error(kInvalidArgument) if unreachable.
  uint64_t rank(Ipv4 ip) const;
  // Every reachable observation address with its rank, by rank.
  std::vector<std::pair<Ipv4, uint64_t>> ranks() const;

  // Absolute orbit position (for combining several scans on one orbit).
  std::optional<uint64_t> position(Ipv4 ip) const;
  // Reachable observation addresses with absolute position in [lo, hi).
  uint64_t count_positions(uint64_t lo, uint64_t hi) const;
  // Orbits through different cosets never share addresses.
  uint64_t coset() const { return coset_; }

 private:
  struct Sorted {
    std::vector<uint64_t> pos;  // ascending
    std::vector<Ipv4> addr;     // aligned with pos
    size_t size() const { return pos.size(); }
  };

  const FieldParams* field_;
  uint64_t generator_;
  int64_t offset_;
  uint64_t n_;
  uint64_t orbit_;      // order of the generator
  uint64_t coset_gcd_;  // gcd(log g, p-1)
  uint64_t coset_;      // log(x1) mod coset_gcd_
  uint64_t log_scale_;  // (log g / coset_gcd_)^-1 mod orbit_
  uint64_t origin_;     // position of the first observed state
  std::shared_ptr<const Sorted> positions_;
};

// Fig.-style ratios: P = rk_last / l, V = m / rk_last.
std::pair<double, double> progress_visibility(uint64_t l, uint64_t rk_last,
                                              uint64_t m);

struct PacketRates {
  double epr;  // observation-frame probes per second, from rank gaps
  double opr;  // observed packets per second
};
// Throws Error(kZeroDuration) if t_last == t_first.
PacketRates packet_rates(uint64_t rk_first, uint64_t rk_last, uint64_t m,
                         int64_t t_first_us, int64_t t_last_us);

// Wire size of a minimum SYN frame with preamble and inter-frame gap.
inline constexpr double kSynWireBytes = 84.0;
// Packets per second that saturate a link of `bits_per_second`.
double line_rate_pps(double bits_per_second);

struct ScanProfile {
  std::string session_id;
  DetectionResult detection;
  Cidr targeted_prefix;
  BlacklistMode blacklist = BlacklistMode::kNone;
  uint64_t l = 0;
  uint64_t m = 0;
  uint64_t rk_first = 0;
  uint64_t rk_last = 0;
  double progress = 0.0;
  double visibility = 0.0;
  std::optional<double> epr;
  std::optional<double> opr;
  std::optional<double> epr_total;  // epr scaled to the whole scan set
  int64_t t_first_us = 0;
  int64_t t_last_us = 0;
  Ipv4 src = 0;
  int cooperation_group = -1;
  // Swept arc on the orbit: absolute position of o_1 and delta of o_m.
  uint64_t arc_begin = 0;
  uint64_t arc_span = 0;
  std::shared_ptr<const RankFrame> frame;
};

// Targeted subnet of the winning hypothesis. Throws Error(kRequiresSuccess).
std::pair<Ipv4, int> targeted_prefix(const DetectionResult& detection);

// All rank pairs for the observation. Throws Error(kRequiresSuccess).
std::vector<std::pair<Ipv4, uint64_t>> rank_addresses(
    const DetectionResult& detection, const CidrSet& observation);

// Profile of one detected session. Records outside the observation or off
// the orbit are ignored. Rates are left empty when timestamps are missing or
// the session has zero duration.
ScanProfile characterize(const DetectionResult& detection,
                         const ObservedSequence& seq,
                         const CidrSet& observation, Ipv4 src = 0);

enum class Locality { kSame24, kSeveral24, kDistinct24 };
const char* locality_name(Locality l);

struct CooperationGroup {
  int id = 0;
  uint64_t p = 0;
  uint64_t g = 0;
  int64_t offset = 0;
  std::vector<size_t> members;  // indices into the profile list
  Locality locality = Locality::kSame24;
  double summed_visibility = 0.0;
  // Distinct observed addresses over the observation addresses the members
  // jointly swept, on the shared orbit. Empty without rank frames.
  std::optional<double> combined_visibility;
  bool overlapping = false;
  bool sharding_suspected = false;
};

// Groups profiles sharing (p, g, offset). With a finite `window_seconds`,
// members must also chain in time (overlapping or within the window);
// by default time only decides the sharding flag. Groups have at least two
// members. Assigns ScanProfile::cooperation_group.
std::vector<CooperationGroup> group_cooperating_sources(
    std::vector<ScanProfile>& profiles,
    double window_seconds = std::numeric_limits<double>::infinity());

}  // namespace scanoracle

#endif  // SCANORACLE_CHARACTERIZE_H_
