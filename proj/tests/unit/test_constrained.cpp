#include <gtest/gtest.h>

#include <map>

#include "bandit/constrained.hpp"
#include "bandit/errors.hpp"
#include "bandit/evaluator.hpp"
#include "bandit/oracle.hpp"
#include "generators.hpp"

namespace bandit {
namespace {

BanditChain single(double r, double q = 0.0) { return BanditChain(Vector::Constant(1, r), Matrix::Constant(1, 1, q)); }

ConstrainedProgram three_singles(double c1, double c2) {
  Vector r0(3), r1(3), r2(3);
  r0 << 1, 0, 0;
  r1 << 0, 1, 0;
  r2 << 0, 0, 1;
  Instance inst({single(1.0), single(0.0), single(0.0)}, Hypothesis::RiskNeutral);
  return ConstrainedProgram{std::move(inst), {r0, r1, r2}, {c1, c2}, {0, 0, 0}};
}

std::size_t first_played(const Instance& inst, const Labeling& l) { return inst.state(l.state_with_label(1)).bandit; }

TEST(Price, ZeroMultipliersGiveUnconstrainedOptimum) {
  const auto p = three_singles(0.3, 0.1);
  OpCounter ops;
  const std::vector<double> y{0.0, 0.0};
  const Pricing priced = price(p, y, ops);
  EXPECT_DOUBLE_EQ(priced.value, 1.0);
  EXPECT_EQ(first_played(p.instance, priced.labeling), 0u);
  EXPECT_THROW(price(p, std::vector<double>{-1.0, 0.0}, ops), InvalidInput);
}

TEST(Price, MatchesOracleOnLagrangianRewards) {
  testing::Rng rng(61);
  for (int trial = 0; trial < 40; ++trial) {
    const ConstrainedProgram p = testing::random_program(rng, 1);
    const double y = trial % 4 == 0 ? 1e3 : rng.uniform(0.0, 5.0);
    OpCounter ops;
    const Pricing priced = price(p, std::vector<double>{y}, ops);
    const Instance lagr = p.instance.with_rewards(p.rewards[0] + y * p.rewards[1]);
    const ProductModel model(lagr);
    const double f = oracle_optimal(model).values(static_cast<Eigen::Index>(model.space().index_of(p.start)));
    EXPECT_NEAR(priced.value, f, 1e-9 * (1 + std::abs(f))) << "trial " << trial;
  }
}

TEST(ColumnOf, ThreeSinglesLabelings) {
  const auto p = three_singles(0.3, 0.1);
  OpCounter ops;
  EXPECT_EQ(column_of(p, Labeling({1, 2, 3}), ops), (Vector(4) << 1, 1, 0, 0).finished());
  EXPECT_EQ(column_of(p, Labeling({3, 1, 2}), ops), (Vector(4) << 0, 1, 1, 0).finished());
  const ConstrainedProgram w0{p.instance, {p.rewards[0]}, {}, p.start};
  EXPECT_EQ(column_of(w0, Labeling({2, 1, 3}), ops), (Vector(2) << 0, 1).finished());
}

TEST(Solve, ThreeSingles) {
  const SolveResult res = solve(three_singles(0.3, 0.1));
  ASSERT_TRUE(std::holds_alternative<MixedSolution>(res));
  const auto& sol = std::get<MixedSolution>(res);
  EXPECT_NEAR(sol.objective, 0.6, 1e-9);
  std::map<std::size_t, double> by_bandit;
  const auto p = three_singles(0.3, 0.1);
  for (const auto& e : sol.support) by_bandit[first_played(p.instance, e.labeling)] += e.weight;
  EXPECT_NEAR(by_bandit[0], 0.6, 1e-9);
  EXPECT_NEAR(by_bandit[1], 0.3, 1e-9);
  EXPECT_NEAR(by_bandit[2], 0.1, 1e-9);
  EXPECT_LE(sol.support.size(), 3u);
  EXPECT_LE(sol.certificate, sol.multipliers(0) + 1e-8);
  EXPECT_FALSE(sol.log.empty());
}

TEST(Solve, ThreeSinglesInfeasible) {
  const SolveResult res = solve(three_singles(0.7, 0.5));
  ASSERT_TRUE(std::holds_alternative<Infeasible>(res));
  const auto& inf = std::get<Infeasible>(res);
  EXPECT_EQ(inf.constraint, 2u);
  EXPECT_NEAR(inf.best_value, 0.3, 1e-12);
  EXPECT_EQ(inf.bound, 0.5);
  EXPECT_EQ(inf.phase, "phase1");
}

TEST(Solve, NoConstraints) {
  testing::Rng rng(62);
  for (int trial = 0; trial < 30; ++trial) {
    const ConstrainedProgram p = testing::random_program(rng, 0);
    const auto& sol = std::get<MixedSolution>(solve(p));
    ASSERT_EQ(sol.support.size(), 1u);
    EXPECT_DOUBLE_EQ(sol.support[0].weight, 1.0);
    const ProductModel model(p.instance);
    const double f = oracle_optimal(model).values(static_cast<Eigen::Index>(model.space().index_of(p.start)));
    EXPECT_NEAR(sol.objective, f, 1e-9 * (1 + std::abs(f)));
  }
}

TEST(Solve, AgreesWithOracleAndCertifies) {
  testing::Rng rng(63);
  int feasible = 0, infeasible = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t w_count = 1 + trial % 2;
    const ConstrainedProgram p = testing::random_program(rng, w_count);
    const SolveResult res = solve(p);
    const OracleProgramResult oracle = oracle_constrained(p);
    ASSERT_EQ(std::holds_alternative<MixedSolution>(res), oracle.feasible) << "trial " << trial;
    if (!oracle.feasible) {
      ++infeasible;
      continue;
    }
    ++feasible;
    const auto& sol = std::get<MixedSolution>(res);
    EXPECT_NEAR(sol.objective, oracle.objective, 1e-8) << "trial " << trial;
    EXPECT_LE(sol.support.size(), w_count + 1);
    double total = 0.0;
    for (const auto& e : sol.support) {
      EXPECT_GT(e.weight, 0.0);
      total += e.weight;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    for (std::size_t w = 0; w < w_count; ++w) EXPECT_GE(sol.achieved(static_cast<Eigen::Index>(w)), p.bounds[w] - 1e-8);
    for (Eigen::Index w = 1; w < sol.multipliers.size(); ++w) EXPECT_GE(sol.multipliers(w), -1e-9);
    // Sampled dual feasibility.
    for (int sample = 0; sample < 200; ++sample) {
      OpCounter ops;
      const Vector col = column_of(p, testing::random_labeling(rng, p.instance.num_states()), ops);
      double reduced = col(0) - sol.multipliers(0);
      for (std::size_t w = 1; w <= w_count; ++w)
        reduced += sol.multipliers(static_cast<Eigen::Index>(w)) * col(static_cast<Eigen::Index>(w + 1));
      EXPECT_LE(reduced, 1e-8);
    }
    EXPECT_LE(sol.certificate - sol.multipliers(0), 1e-8);
  }
  EXPECT_GT(feasible, 10);
  EXPECT_GT(infeasible, 3);
}

TEST(Solve, FeasibilityMatchesAllPolicies) {
  testing::Rng rng(64);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const ConstrainedProgram p = testing::random_program(rng, 1 + trial % 2, 5);
    std::size_t space = 1;
    for (const auto& c : p.instance.chains()) space *= c.size();
    if (std::pow(static_cast<double>(p.instance.num_bandits()), static_cast<double>(space)) > 4096) continue;
    const OracleProgramResult all = oracle_all_policies(p, 4096);
    EXPECT_EQ(std::holds_alternative<MixedSolution>(solve(p)), all.feasible) << "trial " << trial;
    ++checked;
  }
  EXPECT_GT(checked, 20);
}

TEST(Solve, RejectsNonLinearUtility) {
  const Instance inst({single(-1.0, 0.5)}, Hypothesis::RiskAverse);
  const ConstrainedProgram p{inst, {inst.rewards(), inst.rewards()}, {0.0}, {0}};
  EXPECT_THROW(solve(p), RoadblockError);
}

TEST(Solve, RejectsMalformedProgram) {
  auto p = three_singles(0.3, 0.1);
  p.bounds.pop_back();
  EXPECT_THROW(solve(p), InvalidInput);
  p = three_singles(0.3, 0.1);
  p.start = {0, 0};
  EXPECT_THROW(solve(p), InvalidInput);
}

TEST(Solve, IterationLimit) {
  SolveOptions options;
  options.iteration_limit = 1;
  EXPECT_THROW(solve(three_singles(0.3, 0.1), options), IterationLimit);
}

}  // namespace
}  // namespace bandit
