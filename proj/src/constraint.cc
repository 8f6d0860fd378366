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

#include "scanoracle/error.h"
#include "scanoracle/zmapgen.h"

namespace scanoracle {
namespace {

// Aligned /20 blocks lying entirely inside [lo, hi].
uint64_t blocks_in(uint64_t lo, uint64_t hi) {
  uint64_t first = (lo + kRadixBlockSize - 1) / kRadixBlockSize;
  uint64_t last = (hi + 1) / kRadixBlockSize;
  return last > first ? last - first : 0;
}

}  // namespace

ConstraintTree::ConstraintTree(const CidrSet& set) {
  if (!set.empty()) build(set, 0, 0);
}

int32_t ConstraintTree::build(const CidrSet& set, Ipv4 base, int prefix_len) {
  Cidr c{base, prefix_len};
  uint64_t count = set.count_in(c.base, c.last());
  if (count == 0) return -1;
  int32_t id = static_cast<int32_t>(nodes_.size());
  nodes_.push_back(Node{count, base, prefix_len, {-1, -1}});
  if (count == c.size()) return id;
  Ipv4 half = static_cast<Ipv4>(c.size() >> 1);
  int32_t left = build(set, base, prefix_len + 1);
  int32_t right = build(set, base + half, prefix_len + 1);
  nodes_[id].child[0] = left;
  nodes_[id].child[1] = right;
  return id;
}

Ipv4 ConstraintTree::lookup(uint64_t index) const {
  if (index >= count()) {
    throw Error(ErrorCode::kIndexOutOfRange, "constraint tree index out of range");
  }
  const Node* node = &nodes_[0];
  while (!node->is_leaf()) {
    const Node* left = node->child[0] >= 0 ? &nodes_[node->child[0]] : nullptr;
    if (left && index < left->count) {
      node = left;
    } else {
      if (left) index -= left->count;
      node = &nodes_[node->child[1]];
    }
  }
  return static_cast<Ipv4>(node->base + index);
}

std::vector<Cidr> ConstraintTree::leaves() const {
  std::vector<Cidr> out;
  if (nodes_.empty()) return out;
  std::vector<int32_t> stack{0};
  while (!stack.empty()) {
    const Node& n = nodes_[stack.back()];
    stack.pop_back();
    if (n.is_leaf()) {
      out.push_back(Cidr{n.base, n.prefix_len});
      continue;
    }
    if (n.child[1] >= 0) stack.push_back(n.child[1]);
    if (n.child[0] >= 0) stack.push_back(n.child[0]);
  }
  return out;
}

RadixTable::RadixTable(const CidrSet& set) {
  for (const auto& r : set.ranges()) {
    uint64_t first = (uint64_t{r.lo} + kRadixBlockSize - 1) / kRadixBlockSize;
    uint64_t last = (uint64_t{r.hi} + 1) / kRadixBlockSize;
    for (uint64_t b = first; b < last; ++b) {
      blocks_.push_back(static_cast<uint32_t>(b));
    }
  }
}

std::optional<size_t> RadixTable::find(Ipv4 addr) const {
  uint32_t key = addr >> (32 - kRadixPrefixLen);
  auto it = std::lower_bound(blocks_.begin(), blocks_.end(), key);
  if (it == blocks_.end() || *it != key) return std::nullopt;
  return static_cast<size_t>(it - blocks_.begin());
}

uint64_t full_blocks_below(const CidrSet& set, uint64_t limit) {
  uint64_t total = 0;
  for (const auto& r : set.ranges()) {
    if (r.lo >= limit) break;
    total += blocks_in(r.lo, std::min<uint64_t>(r.hi, limit - 1));
  }
  return total;
}

ScanOrdering::ScanOrdering(CidrSet scan_set)
    : set_(std::move(scan_set)),
      radix_blocks_(full_blocks_below(set_, 1ULL << 32)) {}

uint64_t ScanOrdering::position_of(Ipv4 addr) const {
  uint64_t block_lo = addr & ~(kRadixBlockSize - 1);
  uint64_t below = full_blocks_below(set_, block_lo);
  if (set_.covers(static_cast<Ipv4>(block_lo),
                  static_cast<Ipv4>(block_lo + kRadixBlockSize - 1))) {
    return below * kRadixBlockSize + (addr - block_lo);
  }
  return radix_blocks_ * kRadixBlockSize + set_.count_below(addr) -
         below * kRadixBlockSize;
}

}  // namespace scanoracle
