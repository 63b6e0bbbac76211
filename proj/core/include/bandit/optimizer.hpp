#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "bandit/model.hpp"
#include "bandit/op_counter.hpp"
#include "bandit/triangularizer.hpp"

namespace bandit {

struct OptimizerCounts {
  /// Row operations, including upkeep of the 1 - a column.
  OpCounter triangularizer;
  /// Ratio divisions and ranking comparisons.
  OpCounter selection;
};

struct OptimalLabeling {
  /// Total labeling. Labels 1..stop_label were chosen by the algorithm; the
  /// rest are filled in global-id order and are never acted upon.
  Labeling labeling;
  std::size_t stop_label = 0;
  /// Ratio of each algorithm-labeled state under its finalized data.
  std::vector<std::optional<double>> rho_final;
  /// Per-bandit tableaus, finalized for the labeled prefix.
  std::vector<Tableau> tableaus;
  OptimizerCounts counts;
};

/// Interleaves weak-preference selection with Triangularizer steps across
/// all bandits; stops as soon as one bandit has no unlabeled state left.
/// `counter` receives the sum of both count groups.
OptimalLabeling optimize(const Instance& instance, OpCounter& counter);

/// Optimizes each bandit on its own, then merges all states by ratio on
/// finalized data. With parallel set, the per-bandit phase runs on worker
/// threads.
OptimalLabeling optimize_two_phase(const Instance& instance, OpCounter& counter, bool parallel = false);

/// Bound on the optimizer's selection arithmetic: sum_k |N_k|^2 / 2 + |N| / 2.
double optimizer_arithmetic_bound(const Instance& instance);
/// Relaxed bound on its comparisons: sum_k |N_k|^2 / 2 + |N| K + K^2.
double optimizer_comparison_bound(const Instance& instance);

}  // namespace bandit
