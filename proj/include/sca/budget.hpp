#pragma once

#include <atomic>
#include <cstdint>
#include <string>

#include "sca/errors.hpp"

namespace sca {

// Enumeration budget. One cap, applied to each atomic enumeration: a single
// random-word cone, a single rule-table materialization, a single machine
// run. Sweeps are sequences of such enumerations; each is checked on its own.
inline constexpr std::uint64_t kDefaultBudget = std::uint64_t{1} << 24;

inline std::atomic<std::uint64_t>& budget_cell() {
  static std::atomic<std::uint64_t> cap{kDefaultBudget};
  return cap;
}

inline std::uint64_t enumeration_budget() { return budget_cell().load(std::memory_order_relaxed); }

inline void set_enumeration_budget(std::uint64_t cap) {
  budget_cell().store(cap, std::memory_order_relaxed);
}

inline void check_budget(std::uint64_t n, const char* what) {
  const std::uint64_t cap = enumeration_budget();
  if (n > cap) {
    throw BudgetExceeded(std::string(what) + ": " + std::to_string(n) +
                         " evaluations exceed budget " + std::to_string(cap));
  }
}

// a*b with saturation, for sizing checks.
inline std::uint64_t mul_sat(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > UINT64_MAX / b) return UINT64_MAX;
  return a * b;
}

// base^exp with saturation.
inline std::uint64_t pow_sat(std::uint64_t base, std::uint64_t exp) {
  std::uint64_t r = 1;
  for (std::uint64_t i = 0; i < exp; ++i) r = mul_sat(r, base);
  return r;
}

}  // namespace sca
