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
#include "scanoracle/zmapgen.h"

#include <algorithm>
#include <fstream>
#include <limits>
#include <string>

#include "scanoracle/error.h"

namespace scanoracle {
namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Splits S into its radix-covered part and the rest.
void split_radix(const CidrSet& s, CidrSet* radix_part, CidrSet* remainder) {
  std::vector<CidrSet::Range> full, rest;
  for (const auto& r : s.ranges()) {
    uint64_t lo = r.lo, hi = r.hi;
    uint64_t f = (lo + kRadixBlockSize - 1) / kRadixBlockSize * kRadixBlockSize;
    uint64_t e = (hi + 1) / kRadixBlockSize * kRadixBlockSize;  // exclusive
    if (e <= f) {
      rest.push_back(r);
      continue;
    }
    if (lo < f) rest.push_back({r.lo, static_cast<Ipv4>(f - 1)});
    full.push_back({static_cast<Ipv4>(f), static_cast<Ipv4>(e - 1)});
    if (e <= hi) rest.push_back({static_cast<Ipv4>(e), r.hi});
  }
  *radix_part = CidrSet(std::move(full));
  *remainder = CidrSet(std::move(rest));
}

void validate_shard(const ShardSpec& shard, uint64_t p) {
  if (shard.count == 0 || shard.index >= shard.count) {
    throw Error(ErrorCode::kInvalidArgument, "shard index must be below shard count");
  }
  if (shard.scheme == ShardScheme::kNone && shard.count != 1) {
    throw Error(ErrorCode::kInvalidArgument, "shard count > 1 needs a scheme");
  }
  if (shard.count > p - 1) {
    throw Error(ErrorCode::kInvalidArgument, "more shards than states");
  }
}

uint64_t pizza_slice(const ScanConfig& cfg) {
  return (cfg.p() - 2) / cfg.shard.count;
}

}  // namespace

GeneratorSeed derive_generator(uint64_t seed, const FieldParams& field) {
  uint64_t counter = 0;
  auto draw = [&] { return splitmix64(seed + 0x632be59bd9b4e019ULL * counter++); };
  uint64_t g;
  do {
    g = 2 + draw() % (field.p - 2);
  } while (!is_primitive_root(g, field));
  uint64_t s0 = 1 + draw() % (field.p - 1);
  return {g, s0};
}

ScanConfig build_scan_config_with(const CidrSet& whitelist,
                                  const CidrSet& blacklist, uint64_t generator,
                                  uint64_t initial_state, ShardSpec shard) {
  ScanConfig cfg;
  cfg.whitelist = whitelist;
  cfg.blacklist = blacklist;
  cfg.scan_set = whitelist.subtract(blacklist);
  if (cfg.scan_set.empty()) {
    throw Error(ErrorCode::kEmptyScanSet, "whitelist minus blacklist is empty");
  }
  cfg.n = cfg.scan_set.count();
  cfg.field = &select_prime(cfg.n);
  if (generator % cfg.p() == 0 || initial_state % cfg.p() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "generator and state must be nonzero mod p");
  }
  cfg.generator = generator % cfg.p();
  cfg.initial_state = initial_state % cfg.p();
  validate_shard(shard, cfg.p());
  cfg.shard = shard;
  CidrSet radix_part;
  split_radix(cfg.scan_set, &radix_part, &cfg.remainder);
  cfg.radix = RadixTable(radix_part);
  cfg.tree = ConstraintTree(cfg.remainder);
  return cfg;
}

ScanConfig build_scan_config(const CidrSet& whitelist, const CidrSet& blacklist,
                             uint64_t seed, ShardSpec shard) {
  CidrSet s = whitelist.subtract(blacklist);
  if (s.empty()) {
    throw Error(ErrorCode::kEmptyScanSet, "whitelist minus blacklist is empty");
  }
  GeneratorSeed gs = derive_generator(seed, select_prime(s.count()));
  return build_scan_config_with(whitelist, blacklist, gs.generator,
                                gs.initial_state, shard);
}

uint64_t next_state(uint64_t state, const ScanConfig& cfg) {
  uint64_t step = cfg.generator;
  if (cfg.shard.scheme == ShardScheme::kLegacy) {
    step = mod_pow(cfg.generator, cfg.shard.count, cfg.p());
  }
  return mod_mul(state, step, cfg.p());
}

uint64_t shard_initial_state(const ScanConfig& cfg) {
  uint64_t exp = 0;
  switch (cfg.shard.scheme) {
    case ShardScheme::kNone:
      break;
    case ShardScheme::kLegacy:
      exp = cfg.shard.index;
      break;
    case ShardScheme::kPizza:
      exp = uint64_t{cfg.shard.index} * pizza_slice(cfg);
      break;
  }
  return mod_mul(cfg.initial_state, mod_pow(cfg.generator, exp, cfg.p()),
                 cfg.p());
}

uint64_t shard_length(const ScanConfig& cfg) {
  uint64_t states = cfg.p() - 1;
  switch (cfg.shard.scheme) {
    case ShardScheme::kNone:
      return states;
    case ShardScheme::kLegacy:
      return (states - 1 - cfg.shard.index) / cfg.shard.count + 1;
    case ShardScheme::kPizza:
      return pizza_slice(cfg);
  }
  return states;
}

Ipv4 index_to_address(uint64_t x, const ScanConfig& cfg) {
  if (x == 0 || x > cfg.n) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "index " + std::to_string(x) + " outside [1, " +
                    std::to_string(cfg.n) + "]");
  }
  uint64_t pos = x - 1;
  uint64_t radix_span = cfg.radix.size() * kRadixBlockSize;
  if (pos < radix_span) {
    return static_cast<Ipv4>((uint64_t{cfg.radix[pos / kRadixBlockSize]}
                              << (32 - kRadixPrefixLen)) |
                             (pos % kRadixBlockSize));
  }
  return cfg.tree.lookup(pos - radix_span);
}

std::optional<uint64_t> address_to_index(Ipv4 addr, const ScanConfig& cfg) {
  if (!cfg.scan_set.contains(addr)) return std::nullopt;
  if (auto b = cfg.radix.find(addr)) {
    return *b * kRadixBlockSize + (addr % kRadixBlockSize) + 1;
  }
  return cfg.radix.size() * kRadixBlockSize + cfg.remainder.count_below(addr) + 1;
}

std::vector<std::pair<uint64_t, uint64_t>> index_preimage(
    const ScanConfig& cfg, const CidrSet& observe) {
  std::vector<std::pair<uint64_t, uint64_t>> out;
  CidrSet hit = observe.intersect(cfg.scan_set);
  // Ranges inside S map to contiguous index runs once split at the
  // radix/remainder boundary.
  CidrSet radix_hit = hit.subtract(cfg.remainder);
  CidrSet rest_hit = hit.intersect(cfg.remainder);
  for (const CidrSet* part : {&radix_hit, &rest_hit}) {
    for (const auto& r : part->ranges()) {
      uint64_t lo = *address_to_index(r.lo, cfg);
      out.emplace_back(lo, lo + (uint64_t{r.hi} - r.lo));
    }
  }
  std::sort(out.begin(), out.end());
  std::vector<std::pair<uint64_t, uint64_t>> merged;
  for (const auto& iv : out) {
    if (!merged.empty() && iv.first <= merged.back().second + 1) {
      merged.back().second = std::max(merged.back().second, iv.second);
    } else {
      merged.push_back(iv);
    }
  }
  return merged;
}

ScanWalker::ScanWalker(const ScanConfig& cfg, const CidrSet* observe)
    : cfg_(&cfg),
      step_(cfg.shard.scheme == ShardScheme::kLegacy
                ? mod_pow(cfg.generator, cfg.shard.count, cfg.p())
                : cfg.generator,
            cfg.p()),
      state_(shard_initial_state(cfg)),
      length_(shard_length(cfg)) {
  if (observe) {
    filter_ = index_preimage(cfg, *observe);
    filtered_ = true;
    if (!filter_.empty()) {
      filter_lo_ = filter_.front().first;
      filter_hi_ = filter_.back().second;
    }
  }
}

bool ScanWalker::wanted(uint64_t state) const {
  if (state > cfg_->n) return false;
  if (!filtered_) return true;
  if (state < filter_lo_ || state > filter_hi_ || filter_.empty()) return false;
  auto it = std::upper_bound(
      filter_.begin(), filter_.end(), state,
      [](uint64_t v, const std::pair<uint64_t, uint64_t>& iv) { return v < iv.first; });
  if (it == filter_.begin()) return false;
  --it;
  return state <= it->second;
}

std::optional<Emission> ScanWalker::next() {
  if (filtered_ && filter_.empty()) return std::nullopt;
  while (step_index_ < length_) {
    uint64_t s = state_;
    uint64_t i = step_index_++;
    state_ = step_(state_);
    if (wanted(s)) return Emission{i, s, index_to_address(s, *cfg_)};
  }
  return std::nullopt;
}

std::vector<Ipv4> generate_sequence(const ScanConfig& cfg, uint64_t limit,
                                    const CidrSet* observe) {
  std::vector<Ipv4> out;
  ScanWalker walker(cfg, observe);
  while (out.size() < limit) {
    auto e = walker.next();
    if (!e) break;
    out.push_back(e->address);
  }
  return out;
}

void write_dryrun(const std::vector<Ipv4>& addrs,
                  const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  for (Ipv4 a : addrs) out << format_ipv4(a) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

void emit_dryrun(const ScanConfig& cfg, uint64_t limit,
                 const std::filesystem::path& path, const CidrSet* observe) {
  write_dryrun(generate_sequence(cfg, limit, observe), path);
}

std::vector<Ipv4> read_dryrun(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::vector<Ipv4> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto a = parse_ipv4(line);
    if (!a) {
      throw Error(ErrorCode::kFormatError,
                  path.string() + ":" + std::to_string(lineno) + ": bad address");
    }
    out.push_back(*a);
  }
  return out;
}

}  // namespace scanoracle
