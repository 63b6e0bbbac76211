#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bandit/model.hpp"
#include "bandit/op_counter.hpp"

namespace bandit {

/// Absolute tolerance for the exact-equality tests a = 1 and r = 0.
inline constexpr double kCategoryTolerance = 1e-12;

/// Category 1 is always ranked first (ratio +inf), category 3 last (-inf).
enum class Category { First = 1, Ratio = 2, Last = 3 };

struct StateStats {
  double r = 0.0;
  /// 1 - a, where a is the amplification (row sum of the rates).
  double slack = 0.0;
  Category category = Category::Ratio;
  /// Extended-real ratio: +inf for category 1, -inf for category 3.
  double rho = 0.0;

  double amplification() const { return 1.0 - slack; }
};

/// Category and ratio of a state with reward r and amplification a.
StateStats categorize(double r, double a, Hypothesis h);
/// Same from r and 1 - a; the ratio division (category 2 only) is counted.
StateStats categorize_slack(double r, double slack, Hypothesis h, OpCounter& counter);

/// rho(i) >= rho(j).
bool weakly_preferred(const StateStats& i, const StateStats& j);

/// The pairwise form: r(i) + a(i) r(j) >= r(j) + a(j) r(i) holds strictly,
/// or holds with equality and category(i) <= category(j).
bool pairwise_weakly_preferred(const StateStats& i, const StateStats& j);

/// Strict pairwise preference: r(i) + a(i) r(j) > r(j) + a(j) r(i).
bool preferable(const StateStats& i, const StateStats& j);

struct Candidate {
  std::size_t id = 0;  // global state id, used for tie-breaking
  double r = 0.0;
  double slack = 0.0;
};

struct BestState {
  std::size_t index = 0;  // position in the input span
  std::size_t id = 0;
  StateStats stats;
};

/// A candidate weakly preferable to all others; ties go to the smallest id.
/// Uses at most |U| divisions and |U| - 1 comparisons.
BestState argbest(std::span<const Candidate> candidates, Hypothesis h, OpCounter& counter);

/// Strict ranking order: larger ratio first, then smaller id.
bool ranks_before(double rho_a, std::size_t id_a, double rho_b, std::size_t id_b);

/// Checks that finalizing a weakly preferred state i preserved its ratio and
/// moved every other remaining ratio into [old ratio, ratio of i].
/// `others_before[k]` and `others_after[k]` describe the same state.
bool ratio_monotone_check(const StateStats& chosen_before, const StateStats& chosen_after,
                          std::span<const StateStats> others_before, std::span<const StateStats> others_after);

struct RankedState {
  StateId state;
  StateStats stats;
};

/// Every state of the instance under its original data, best first.
std::vector<RankedState> rank_states(const Instance& instance);

}  // namespace bandit
