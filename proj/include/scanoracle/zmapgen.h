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
#ifndef SCANORACLE_ZMAPGEN_H_
#define SCANORACLE_ZMAPGEN_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "scanoracle/cidr_set.h"
#include "scanoracle/modmath.h"

namespace scanoracle {

inline constexpr int kRadixPrefixLen = 20;
inline constexpr uint64_t kRadixBlockSize = 1ULL << (32 - kRadixPrefixLen);

// Binary trie over an address set, split on address bits MSB first
// (left = 0, right = 1). Leaves are the maximal subnets fully inside the set;
// every node carries the number of member addresses below it.
class ConstraintTree {
 public:
  struct Node {
    uint64_t count = 0;
    Ipv4 base = 0;
    int prefix_len = 0;
    int32_t child[2] = {-1, -1};

    bool is_leaf() const { return child[0] < 0 && child[1] < 0; }
  };

  ConstraintTree() = default;
  explicit ConstraintTree(const CidrSet& set);

  uint64_t count() const { return nodes_.empty() ? 0 : nodes_[0].count; }
  // The index-th (0-based) member in ascending address order.
  Ipv4 lookup(uint64_t index) const;
  std::vector<Cidr> leaves() const;
  const std::vector<Node>& nodes() const { return nodes_; }

 private:
  int32_t build(const CidrSet& set, Ipv4 base, int prefix_len);

  std::vector<Node> nodes_;
};

// Every /20 block fully contained in the scan set, ascending.
class RadixTable {
 public:
  RadixTable() = default;
  explicit RadixTable(const CidrSet& set);

  size_t size() const { return blocks_.size(); }
  uint32_t operator[](size_t i) const { return blocks_[i]; }
  const std::vector<uint32_t>& blocks() const { return blocks_; }
  // Position of the block holding addr, if that block is in the table.
  std::optional<size_t> find(Ipv4 addr) const;

 private:
  std::vector<uint32_t> blocks_;  // addr >> 12
};

// Number of /20 blocks fully inside `set` that lie entirely below `limit`.
uint64_t full_blocks_below(const CidrSet& set, uint64_t limit);

// Position arithmetic of ZMap's address ordering over S without building the
// radix table: radix-covered /20 blocks first (ascending), then the
// remaining addresses ascending. Positions are 0-based.
class ScanOrdering {
 public:
  explicit ScanOrdering(CidrSet scan_set);

  const CidrSet& scan_set() const { return set_; }
  uint64_t size() const { return set_.count(); }
  uint64_t radix_blocks() const { return radix_blocks_; }
  // addr must be a member of S.
  uint64_t position_of(Ipv4 addr) const;

 private:
  CidrSet set_;
  uint64_t radix_blocks_;
};

enum class ShardScheme { kNone, kLegacy, kPizza };

struct ShardSpec {
  ShardScheme scheme = ShardScheme::kNone;
  uint32_t count = 1;  // d
  uint32_t index = 0;  // k
};

struct ScanConfig {
  const FieldParams* field = nullptr;
  uint64_t generator = 0;
  uint64_t initial_state = 0;  // s0
  CidrSet whitelist;
  CidrSet blacklist;
  CidrSet scan_set;   // S = W \ B
  CidrSet remainder;  // S minus the radix blocks
  ConstraintTree tree;  // over `remainder`
  RadixTable radix;
  ShardSpec shard;
  uint64_t n = 0;  // |S|

  uint64_t p() const { return field->p; }
};

// Deterministic (g, s0) expansion of a 64-bit seed: splitmix64 in counter
// mode, rejecting candidates until g is a primitive root.
struct GeneratorSeed {
  uint64_t generator;
  uint64_t initial_state;
};
GeneratorSeed derive_generator(uint64_t seed, const FieldParams& field);

// Throws Error(kEmptyScanSet) if W \ B is empty and kInvalidArgument for a
// malformed ShardSpec.
ScanConfig build_scan_config(const CidrSet& whitelist, const CidrSet& blacklist,
                             uint64_t seed, ShardSpec shard = {});

// Same, with an explicit (g, s0) instead of a seed.
ScanConfig build_scan_config_with(const CidrSet& whitelist,
                                  const CidrSet& blacklist, uint64_t generator,
                                  uint64_t initial_state, ShardSpec shard = {});

uint64_t next_state(uint64_t state, const ScanConfig& cfg);
uint64_t shard_initial_state(const ScanConfig& cfg);
// Number of states the configured shard visits.
uint64_t shard_length(const ScanConfig& cfg);

// x-th scanned address, x in [1, n]; ZMap looks up position x-1.
Ipv4 index_to_address(uint64_t x, const ScanConfig& cfg);
// Inverse of index_to_address; nullopt if addr is not in S.
std::optional<uint64_t> address_to_index(Ipv4 addr, const ScanConfig& cfg);

// Index ranges [lo, hi] (1-based, inclusive, ascending) whose images lie in
// `observe`.
std::vector<std::pair<uint64_t, uint64_t>> index_preimage(
    const ScanConfig& cfg, const CidrSet& observe);

struct Emission {
  uint64_t step;   // states advanced since the shard start
  uint64_t state;
  Ipv4 address;
};

// Iterator over a configured scan in emission order.
class ScanWalker {
 public:
  explicit ScanWalker(const ScanConfig& cfg,
                      const CidrSet* observe = nullptr);

  std::optional<Emission> next();

 private:
  bool wanted(uint64_t state) const;

  const ScanConfig* cfg_;
  FixedMultiplier step_;
  uint64_t state_;
  uint64_t step_index_ = 0;
  uint64_t length_;
  std::vector<std::pair<uint64_t, uint64_t>> filter_;
  bool filtered_ = false;
  uint64_t filter_lo_ = 0, filter_hi_ = 0;
};

inline constexpr uint64_t kNoLimit = ~0ULL;

std::vector<Ipv4> generate_sequence(const ScanConfig& cfg, uint64_t limit,
                                    const CidrSet* observe = nullptr);

// Dry-run files: one dotted quad per line, newline terminated.
void emit_dryrun(const ScanConfig& cfg, uint64_t limit,
                 const std::filesystem::path& path,
                 const CidrSet* observe = nullptr);
void write_dryrun(const std::vector<Ipv4>& addrs,
                  const std::filesystem::path& path);
std::vector<Ipv4> read_dryrun(const std::filesystem::path& path);

}  // namespace scanoracle

#endif  // SCANORACLE_ZMAPGEN_H_
