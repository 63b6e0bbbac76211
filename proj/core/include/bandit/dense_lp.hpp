#pragma once

#include <vector>

#include "bandit/linalg.hpp"

namespace bandit {

enum class RowSense { Equal, AtLeast, AtMost };
enum class LpStatus { Optimal, Infeasible, Unbounded };

/// maximize c'x subject to A x (sense) b, x >= 0.
struct LpProblem {
  Matrix a;
  Vector b;
  std::vector<RowSense> sense;
  Vector c;
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  Vector x;
};

/// Two-phase full-tableau simplex with Bland's rule. Intended for small dense
/// problems where robustness matters more than speed.
LpSolution solve_dense_lp(const LpProblem& problem);

}  // namespace bandit
