#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bandit/linalg.hpp"
#include "bandit/model.hpp"
#include "bandit/op_counter.hpp"
#include "bandit/triangularizer.hpp"

namespace bandit {

/// Maximize expected type-0 reward from `start` subject to expected type-w
/// reward >= bounds[w-1], over initial randomizations of priority rules.
/// Requires linear utility (RN): every reward type shares the same rates.
struct ConstrainedProgram {
  Instance instance;
  /// W + 1 reward vectors indexed by global state; rewards[0] is the objective.
  std::vector<Vector> rewards;
  /// W lower bounds.
  std::vector<double> bounds;
  MultiState start;

  std::size_t num_constraints() const { return bounds.size(); }
};

/// Throws RoadblockError for non-RN instances and InvalidInput for shape
/// errors; also requires the instance to pass validation.
void check_program(const ConstrainedProgram& program);

struct Pricing {
  Labeling labeling;
  double value = 0.0;
};

/// Optimal priority rule for rewards r_0 + sum_w y_w r_w and its value at
/// the start. `multipliers` holds y_1..y_W.
Pricing price(const ConstrainedProgram& program, std::span<const double> multipliers, OpCounter& counter);

/// (V_0; 1; V_1; ...; V_W) for the priority rule keyed to `labeling`.
Vector column_of(const ConstrainedProgram& program, const Labeling& labeling, OpCounter& counter);

struct SolveOptions {
  /// Total simplex iterations; defaults to 10 (W + 1) |N|.
  std::optional<std::size_t> iteration_limit;
  /// Reduced costs at or below this (scaled by 1 + |y_0|) count as zero.
  double optimality_tolerance = 1e-10;
  std::size_t refactor_interval = 50;
};

struct IterationLog {
  std::string phase;          // "phase1" or "phase2"
  std::size_t objective_type = 0;
  std::vector<double> multipliers;  // y_0, then y_w for the constraints in play
  double priced_value = 0.0;
  std::string entering;
  std::string leaving;
};

struct SupportEntry {
  Labeling labeling;
  double weight = 0.0;
  Vector values;  // V_0..V_W
};

struct MixedSolution {
  std::vector<SupportEntry> support;
  double objective = 0.0;
  /// y_0, y_1..y_W.
  Vector multipliers;
  /// Expected type-w reward, w = 1..W.
  Vector achieved;
  /// Final pricing value; optimality means certificate <= y_0 (within tolerance).
  double certificate = 0.0;
  std::vector<IterationLog> log;
  OpCounter ops;
};

struct Infeasible {
  std::string phase = "phase1";
  /// 1-based index of the constraint that cannot be met.
  std::size_t constraint = 0;
  /// Largest achievable expected reward of that type given the earlier ones.
  double best_value = 0.0;
  double bound = 0.0;
  std::vector<IterationLog> log;
  OpCounter ops;
};

using SolveResult = std::variant<MixedSolution, Infeasible>;

/// Column generation on the master program over priority rules. Phase one
/// brings the constraints in one at a time; phase two maximizes type-0
/// reward. Throws IterationLimit when the limit is reached.
SolveResult solve(const ConstrainedProgram& program, const SolveOptions& options = {});

}  // namespace bandit
