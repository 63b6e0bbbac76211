#include <gtest/gtest.h>

#include "bandit/dense_lp.hpp"

namespace bandit {
namespace {

TEST(DenseLp, SmallMaximization) {
  // max 3x + 2y s.t. x + y <= 4, x + 3y <= 6, x <= 3
  LpProblem lp;
  lp.a = Matrix(3, 2);
  lp.a << 1, 1, 1, 3, 1, 0;
  lp.b = Vector(3);
  lp.b << 4, 6, 3;
  lp.sense.assign(3, RowSense::AtMost);
  lp.c = Vector(2);
  lp.c << 3, 2;
  const auto sol = solve_dense_lp(lp);
  ASSERT_EQ(sol.status, LpStatus::Optimal);
  EXPECT_NEAR(sol.objective, 11.0, 1e-12);
  EXPECT_NEAR(sol.x(0), 3.0, 1e-12);
  EXPECT_NEAR(sol.x(1), 1.0, 1e-12);
}

TEST(DenseLp, EqualityAndLowerBounds) {
  // max x0 s.t. x0 + x1 + x2 = 1, x1 >= 0.3, x2 >= 0.1
  LpProblem lp;
  lp.a = Matrix(3, 3);
  lp.a << 1, 1, 1, 0, 1, 0, 0, 0, 1;
  lp.b = Vector(3);
  lp.b << 1, 0.3, 0.1;
  lp.sense = {RowSense::Equal, RowSense::AtLeast, RowSense::AtLeast};
  lp.c = Vector(3);
  lp.c << 1, 0, 0;
  const auto sol = solve_dense_lp(lp);
  ASSERT_EQ(sol.status, LpStatus::Optimal);
  EXPECT_NEAR(sol.objective, 0.6, 1e-12);
  lp.b << 1, 0.7, 0.5;
  EXPECT_EQ(solve_dense_lp(lp).status, LpStatus::Infeasible);
}

TEST(DenseLp, Unbounded) {
  LpProblem lp;
  lp.a = Matrix(1, 2);
  lp.a << 1, -1;
  lp.b = Vector::Constant(1, 1.0);
  lp.sense = {RowSense::AtMost};
  lp.c = Vector(2);
  lp.c << 1, 0;
  EXPECT_EQ(solve_dense_lp(lp).status, LpStatus::Unbounded);
}

TEST(DenseLp, NegativeRightHandSide) {
  // max -x s.t. -x <= -2  (x >= 2)
  LpProblem lp;
  lp.a = Matrix::Constant(1, 1, -1.0);
  lp.b = Vector::Constant(1, -2.0);
  lp.sense = {RowSense::AtMost};
  lp.c = Vector::Constant(1, -1.0);
  const auto sol = solve_dense_lp(lp);
  ASSERT_EQ(sol.status, LpStatus::Optimal);
  EXPECT_NEAR(sol.x(0), 2.0, 1e-12);
}

TEST(DenseLp, DegenerateRedundantRows) {
  // Duplicate equality rows leave an artificial at zero in the basis.
  LpProblem lp;
  lp.a = Matrix(2, 2);
  lp.a << 1, 1, 1, 1;
  lp.b = Vector::Constant(2, 1.0);
  lp.sense = {RowSense::Equal, RowSense::Equal};
  lp.c = Vector(2);
  lp.c << 2, 1;
  const auto sol = solve_dense_lp(lp);
  ASSERT_EQ(sol.status, LpStatus::Optimal);
  EXPECT_NEAR(sol.objective, 2.0, 1e-12);
}

}  // namespace
}  // namespace bandit
