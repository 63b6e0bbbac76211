#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bandit/linalg.hpp"
#include "bandit/model.hpp"
#include "bandit/op_counter.hpp"
#include "bandit/triangularizer.hpp"

namespace bandit {

/// Tolerance on the total mass of each marginal of a product-form start.
inline constexpr double kDistributionTolerance = 1e-9;

struct EvalResult {
  /// Expected utility for reward type 0.
  double value = 0.0;
  /// Expected utility per reward type (size 1 unless several were supplied).
  Vector values;
  /// Coefficients with value = sum_i z(i) r~(i), indexed by global state.
  Vector z;
  /// Work of every step whose state still has higher-labeled states in its
  /// bandit: 3m + 5 operations for such a step.
  OpCounter ops;
  /// Work outside that accounting: the closing step of each bandit, marginal
  /// sums for product-form starts, and recomputations of the running product.
  OpCounter extra_ops;
};

/// Expected utility of the priority rule keyed to `labeling`, from `start`,
/// using finalized data. `counter` receives `ops`.
EvalResult evaluate(const Instance& instance, const Labeling& labeling, const MultiState& start,
                    const FinalizedModel& finalized, OpCounter& counter);

/// Convenience: finalizes then evaluates.
EvalResult evaluate(const Instance& instance, const Labeling& labeling, const MultiState& start);

/// Same recursion started from a product-form distribution: `marginals[k]`
/// is a probability vector over the states of bandit k.
EvalResult evaluate_distribution(const Instance& instance, const Labeling& labeling,
                                 std::span<const Vector> marginals, const FinalizedModel& finalized,
                                 OpCounter& counter);

/// Values of one priority rule for several reward vectors (each indexed by
/// global state) sharing the instance's transition rates. Triangularizes an
/// extended tableau once and runs one evaluation pass. Linear utility only;
/// throws RoadblockError otherwise. `counter` receives both phases.
EvalResult evaluate_multi_reward(const Instance& instance, const Labeling& labeling, const MultiState& start,
                                 std::span<const Vector> rewards, OpCounter& counter);

/// sum_k sum_{m=1}^{|N_k|-1} (3m + 5).
std::uint64_t evaluator_operation_count(const Instance& instance);

}  // namespace bandit
