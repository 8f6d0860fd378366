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
#include <array>
#include <cmath>
#include <memory>
#include <mutex>

#include "scanoracle/error.h"
#include "scanoracle/modmath.h"

namespace scanoracle {

namespace {

uint64_t ceil_sqrt(uint64_t n) {
  uint64_t r = static_cast<uint64_t>(std::sqrt(static_cast<double>(n)));
  while (r * r < n) ++r;
  while (r > 0 && (r - 1) * (r - 1) >= n) --r;
  return r;
}

using BabyTable = std::vector<std::pair<uint64_t, uint32_t>>;

BabyTable build_baby_table(uint64_t gen, uint64_t count, uint64_t p) {
  BabyTable table;
  table.reserve(count);
  uint64_t v = 1;
  for (uint64_t j = 0; j < count; ++j) {
    table.emplace_back(v, static_cast<uint32_t>(j));
    v = mod_mul(v, gen, p);
  }
  std::sort(table.begin(), table.end());
  return table;
}

const uint32_t* find_baby(const BabyTable& table, uint64_t value) {
  auto it = std::lower_bound(
      table.begin(), table.end(), value,
      [](const std::pair<uint64_t, uint32_t>& e, uint64_t v) {
        return e.first < v;
      });
  if (it == table.end() || it->first != value) return nullptr;
  return &it->second;
}

}  // namespace

DiscreteLog::DiscreteLog(const FieldParams& field) : field_(&field) {
  const uint64_t p = field.p;
  const uint64_t order = p - 1;
  for (const PrimeFactor& pf : field.factors) {
    Subgroup sg;
    sg.prime = pf.prime;
    sg.exponent = pf.exponent;
    sg.prime_power = 1;
    for (unsigned i = 0; i < pf.exponent; ++i) sg.prime_power *= pf.prime;
    sg.gamma = mod_pow(field.root, order / pf.prime, p);
    sg.step = ceil_sqrt(pf.prime);
    sg.giant = mod_inverse(mod_pow(sg.gamma, sg.step, p), p);
    sg.baby = build_baby_table(sg.gamma, sg.step, p);
    const uint64_t cofactor = order / sg.prime_power;
    const uint64_t inv = mod_inverse(cofactor % sg.prime_power, sg.prime_power);
    sg.crt_weight = mod_mul(cofactor, inv, order);
    subgroups_.push_back(std::move(sg));
  }
}

uint64_t DiscreteLog::log_in_subgroup(const Subgroup& sg, uint64_t h) const {
  const uint64_t p = field_->p;
  uint64_t y = h;
  for (uint64_t i = 0; i <= sg.step; ++i) {
    if (const uint32_t* j = find_baby(sg.baby, y)) {
      return (i * sg.step + *j) % sg.prime;
    }
    y = mod_mul(y, sg.giant, p);
  }
  throw Error(ErrorCode::kInvalidArgument, "element outside subgroup");
}

uint64_t DiscreteLog::operator()(uint64_t b) const {
  const uint64_t p = field_->p;
  const uint64_t order = p - 1;
  if (b == 0 || b >= p) {
    throw Error(ErrorCode::kInvalidArgument, "discrete log of 0 or >= p");
  }
  const uint64_t root_inv = mod_inverse(field_->root, p);
  uint64_t result = 0;
  for (const Subgroup& sg : subgroups_) {
    // Digits of x mod q^e, least significant first.
    uint64_t x = 0;
    uint64_t qi = 1;
    uint64_t exponent = order / sg.prime;
    for (unsigned i = 0; i < sg.exponent; ++i) {
      uint64_t h = mod_mul(b, mod_pow(root_inv, x, p), p);
      h = mod_pow(h, exponent, p);
      x += log_in_subgroup(sg, h) * qi;
      qi *= sg.prime;
      exponent /= sg.prime;
    }
    result = mod_add(result, mod_mul(x % sg.prime_power, sg.crt_weight, order),
                     order);
  }
  return result;
}

const DiscreteLog& discrete_log_solver(const FieldParams& field) {
  static std::array<std::unique_ptr<DiscreteLog>, 5> solvers;
  static std::array<std::once_flag, 5> flags;
  const FieldParams* canonical = field_for_prime(field.p);
  if (canonical == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "not a ZMap prime");
  }
  const unsigned idx = canonical->index;
  std::call_once(flags[idx], [&] {
    solvers[idx] = std::make_unique<DiscreteLog>(*canonical);
  });
  return *solvers[idx];
}

uint64_t discrete_log(uint64_t b, const FieldParams& field) {
  return discrete_log_solver(field)(b);
}

uint64_t discrete_log_bsgs(uint64_t b, const FieldParams& field) {
  struct Tables {
    uint64_t step;
    uint64_t giant;
    BabyTable baby;
  };
  static std::array<std::unique_ptr<Tables>, 5> tables;
  static std::array<std::once_flag, 5> flags;
  const FieldParams* canonical = field_for_prime(field.p);
  if (canonical == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "not a ZMap prime");
  }
  const uint64_t p = canonical->p;
  if (b == 0 || b >= p) {
    throw Error(ErrorCode::kInvalidArgument, "discrete log of 0 or >= p");
  }
  const unsigned idx = canonical->index;
  std::call_once(flags[idx], [&] {
    auto t = std::make_unique<Tables>();
    t->step = ceil_sqrt(p - 1);
    t->giant = mod_inverse(mod_pow(canonical->root, t->step, p), p);
    t->baby = build_baby_table(canonical->root, t->step, p);
    tables[idx] = std::move(t);
  });
  const Tables& t = *tables[idx];
  uint64_t y = b;
  for (uint64_t i = 0; i <= t.step; ++i) {
    if (const uint32_t* j = find_baby(t.baby, y)) {
      return (i * t.step + *j) % (p - 1);
    }
    y = mod_mul(y, t.giant, p);
  }
  throw Error(ErrorCode::kInvalidArgument, "no logarithm found");
}

}  // namespace scanoracle
