#pragma once

#include <cstdint>

namespace bandit {

/// Tally of arithmetic operations and comparisons, injected into the
/// algorithms whose work is part of their contract.
struct OpCounter {
  std::uint64_t adds = 0;
  std::uint64_t subs = 0;
  std::uint64_t muls = 0;
  std::uint64_t divs = 0;
  std::uint64_t comparisons = 0;

  std::uint64_t arithmetic() const { return adds + subs + muls + divs; }

  OpCounter& operator+=(const OpCounter& o) {
    adds += o.adds;
    subs += o.subs;
    muls += o.muls;
    divs += o.divs;
    comparisons += o.comparisons;
    return *this;
  }

  friend OpCounter operator+(OpCounter a, const OpCounter& b) { return a += b; }
  friend bool operator==(const OpCounter&, const OpCounter&) = default;
};

}  // namespace bandit
