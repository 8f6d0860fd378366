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
#ifndef SCANORACLE_DETECT_H_
#define SCANORACLE_DETECT_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "scanoracle/cidr_set.h"
#include "scanoracle/error.h"
#include "scanoracle/modmath.h"

namespace scanoracle {

// An ordered run of probe destinations attributed to one scan session.
// Timestamps are optional; when present they align with `addresses`.
struct ObservedSequence {
  std::string session_id;
  std::vector<Ipv4> addresses;
  std::vector<int64_t> timestamps_us;

  size_t size() const { return addresses.size(); }
  bool has_timestamps() const { return timestamps_us.size() == addresses.size(); }
  // First `count` records (all if shorter).
  ObservedSequence prefix(size_t count) const;
};

enum class BlacklistMode { kNone, kEmpty, kDefault, kAmbiguous };
const char* blacklist_mode_name(BlacklistMode mode);

// One candidate explanation of the observation: the scan targeted
// `target` minus (optionally) the default blacklist.
struct OffsetHypothesis {
  int prefix_len = 0;
  Cidr target;
  BlacklistMode blacklist = BlacklistMode::kEmpty;
  const FieldParams* field = nullptr;
  uint64_t n = 0;      // |S| under this hypothesis
  int64_t offset = 0;  // h = x + offset on the observed addresses
  // Other (prefix_len, mode) pairs that produced the same (p, offset).
  std::vector<std::pair<int, BlacklistMode>> aliases;
};

struct DetectionResult {
  ErrorCode status = ErrorCode::kNotZMap;
  std::string message;
  std::string session_id;
  std::string detector;  // det1 | det2 | brute
  std::string sampling;  // raw | sampled | raw+sampled
  std::optional<OffsetHypothesis> hypothesis;

  uint64_t p = 0;
  uint64_t g = 0;
  int64_t offset = 0;
  uint64_t multiplier = 0;  // first passing multiplier c
  uint64_t k = 0;           // c^-1 mod (p-1); g = a^(k*r)
  uint64_t r = 0;
  uint64_t iterations = 0;  // multipliers tested
  uint64_t total_iterations = 0;  // over every hypothesis tried
  uint64_t elapsed_us = 0;
  uint64_t first_state = 0;            // x_1 = h_1 - offset
  std::vector<uint64_t> steps;         // state-index gaps from x_1
  bool conflict = false;               // several prefixes, different g
  std::vector<DetectionResult> others; // further successes (exhaustive)
  uint64_t checkpoint = 0;             // brute force: next i0 to try
  uint64_t operations = 0;             // brute force: multipliers tested

  bool success() const { return status == ErrorCode::kOk; }
};

// ---------------------------------------------------------------------------
// Detectors.

// Needs at least 4 addresses; solves from the first three and verifies the
// rest. Assumes every state between observations maps into the observation.
DetectionResult det1(const ObservedSequence& seq, const FieldParams& field);

struct Det2Options {
  size_t m = 20;
  std::optional<uint64_t> k_max;  // coprime budget; full sweep if unset
  unsigned threads = 0;           // 0: default_thread_count()
  int max_retries = 3;
};

DetectionResult det2(const ObservedSequence& seq, const OffsetHypothesis& hyp,
                     const Det2Options& options = {});

// Keeps o_1, o_c and m-2 records between them at a fixed stride
// floor((c-1)/(m-1)). Throws Error(kTooShort) if c < m.
ObservedSequence sample_sequence(const ObservedSequence& seq, size_t m);

// Hypotheses for every prefix length 0..24 whose subnet holds all observed
// addresses, with and without `blacklist`, deduplicated on (p, offset).
// Throws Error(kObservationBlacklisted) if `observation` (when given) or an
// observed address meets the blacklist.
std::vector<OffsetHypothesis> compute_offsets(const ObservedSequence& seq,
                                              const CidrSet& blacklist,
                                              const CidrSet* observation = nullptr);

struct DetectOptions {
  size_t m = 20;
  bool exhaustive = false;  // evaluate every hypothesis, report all successes
  std::optional<uint64_t> k_max;
  unsigned threads = 0;
  const CidrSet* observation = nullptr;
};

// Det2 over compute_offsets() on the raw first m records and on the sampled
// sequence. The widest successful prefix wins.
DetectionResult detect_with_offsets(const ObservedSequence& seq,
                                    const CidrSet& blacklist,
                                    const DetectOptions& options = {});

struct BruteForceOptions {
  size_t m = 20;
  double alpha = 1e-8;
  Ipv4 block_base = 0;       // host value of the /20 holding the observation
  uint64_t observed_size = 0;  // |O|
  uint64_t scan_size = 0;      // |S| assumed for k_max (default p-1)
  uint64_t i0_begin = 0;
  uint64_t i0_end = 1ULL << 20;
  std::optional<uint64_t> budget;  // multiplier tests before giving up
  std::optional<std::filesystem::path> checkpoint;
  unsigned threads = 0;
};

// Tries offsets N - i0*2^12 - 1 for i0 in [i0_begin, i0_end), each with a
// k_max-limited det2. Resumes from `checkpoint` if the file exists and
// rewrites it when the budget runs out.
DetectionResult brute_force_offset(const ObservedSequence& seq,
                                   const FieldParams& field,
                                   const BruteForceOptions& options);

// ---------------------------------------------------------------------------
// Closed forms.

// (m-1) |S| / |O|: mean multipliers tested with the right offset.
double expected_iterations(double observed_size, double scan_size, size_t m);
// e (m-1) |S| / |O|: mean multipliers per offset in a k_max brute force.
double expected_operations(double observed_size, double scan_size, size_t m);
// ceil(log(alpha) / log(1 - |O| / ((m-1)|S|))).
uint64_t k_max(double observed_size, double scan_size, size_t m, double alpha);
// 1 - (1 - alpha)^(2^20).
double brute_force_false_negative(double alpha);
// 1 - (1 - 1/(m-1)!)^phi(p-1).
double theta_bound(size_t m, const FieldParams& field);

}  // namespace scanoracle

#endif  // SCANORACLE_DETECT_H_
