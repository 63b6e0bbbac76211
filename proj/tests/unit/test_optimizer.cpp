#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "bandit/evaluator.hpp"
#include "bandit/optimizer.hpp"
#include "bandit/oracle.hpp"
#include "generators.hpp"

namespace bandit {
namespace {

double tol(double v) { return 1e-9 * (1.0 + std::abs(v)); }

Vector values_on_space(const Instance& inst, const Labeling& lab, const ProductModel& model) {
  OpCounter ops;
  const FinalizedModel fm = finalize(inst, lab, ops);
  Vector v(static_cast<Eigen::Index>(model.size()));
  for (std::size_t s = 0; s < model.size(); ++s)
    v(static_cast<Eigen::Index>(s)) = evaluate(inst, lab, model.space().at(s), fm, ops).value;
  return v;
}

TEST(Optimize, SingleState) {
  const Instance inst({BanditChain(Vector::Ones(1), Matrix::Constant(1, 1, 0.5))}, Hypothesis::RiskNeutral);
  OpCounter ops;
  const auto best = optimize(inst, ops);
  EXPECT_EQ(best.labeling, Labeling::identity(1));
  EXPECT_EQ(best.stop_label, 1u);
}

TEST(Optimize, DiscountedPicksLargestReward) {
  testing::Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const double c = rng.uniform(0.5, 0.95);
    std::vector<BanditChain> chains;
    for (std::size_t k = 0, n = rng.between(1, 3); k < n; ++k) {
      RawBandit raw = testing::random_raw(rng, rng.between(1, 4));
      for (Eigen::Index i = 0; i < raw.p.rows(); ++i) {
        raw.p.row(i) = testing::random_row(rng, static_cast<std::size_t>(raw.p.cols()), 1.0).transpose();
      }
      chains.push_back(build_chain(raw, LinearUtility{c}));
    }
    const Instance inst(std::move(chains), Hypothesis::RiskNeutral);
    const Vector r = inst.rewards();
    OpCounter ops;
    const auto best = optimize(inst, ops);
    Eigen::Index top = 0;
    r.maxCoeff(&top);
    EXPECT_EQ(r(static_cast<Eigen::Index>(best.labeling.state_with_label(1))), r(top));
  }
}

TEST(Optimize, MatchesOracleEverywhere) {
  testing::Rng rng(42);
  for (int trial = 0; trial < 90; ++trial) {
    const Instance inst = testing::random_instance(rng, testing::kAllHypotheses[trial % 3], 3, 3);
    OpCounter ops;
    const auto best = optimize(inst, ops);
    const ProductModel model(inst);
    const OracleOptimum opt = oracle_optimal(model);
    const Vector v = values_on_space(inst, best.labeling, model);
    for (Eigen::Index s = 0; s < v.size(); ++s) EXPECT_NEAR(v(s), opt.values(s), tol(opt.values(s))) << "trial " << trial;
  }
}

TEST(Optimize, FinalizedRatiosNonincreasing) {
  testing::Rng rng(43);
  for (int trial = 0; trial < 300; ++trial) {
    const Instance inst = testing::random_instance(rng, testing::kAllHypotheses[trial % 3], 4, 5);
    OpCounter ops;
    const auto best = optimize(inst, ops);
    for (std::size_t l = 2; l <= best.stop_label; ++l) {
      const double prev = *best.rho_final[best.labeling.state_with_label(l - 1)];
      const double cur = *best.rho_final[best.labeling.state_with_label(l)];
      if (std::isinf(prev) || std::isinf(cur)) {
        EXPECT_GE(prev, cur);
      } else {
        EXPECT_GE(prev, cur - 1e-9 * std::max({1.0, std::abs(prev), std::abs(cur)})) << "trial " << trial;
      }
    }
  }
}

TEST(Optimize, StopsWhenFirstBanditIsExhausted) {
  testing::Rng rng(44);
  for (int trial = 0; trial < 300; ++trial) {
    const Instance inst = testing::random_instance(rng, testing::kAllHypotheses[trial % 3], 4, 4);
    OpCounter ops;
    const auto best = optimize(inst, ops);
    std::vector<std::size_t> labeled(inst.num_bandits(), 0);
    std::size_t exhausted_at = 0;
    for (std::size_t l = 1; l <= inst.num_states() && exhausted_at == 0; ++l) {
      const std::size_t k = inst.state(best.labeling.state_with_label(l)).bandit;
      if (++labeled[k] == inst.chain(k).size()) exhausted_at = l;
    }
    EXPECT_EQ(best.stop_label, exhausted_at);
    for (std::size_t l = best.stop_label + 1; l <= inst.num_states(); ++l)
      EXPECT_FALSE(best.rho_final[best.labeling.state_with_label(l)].has_value());
  }
}

TEST(Optimize, CountBounds) {
  testing::Rng rng(45);
  for (int trial = 0; trial < 300; ++trial) {
    const Instance inst = testing::random_instance(rng, testing::kAllHypotheses[trial % 3], 5, 6);
    OpCounter total;
    const auto best = optimize(inst, total);
    EXPECT_LE(static_cast<double>(best.counts.selection.arithmetic()), optimizer_arithmetic_bound(inst));
    EXPECT_LE(static_cast<double>(best.counts.selection.comparisons), optimizer_comparison_bound(inst));
    EXPECT_EQ(total, best.counts.triangularizer + best.counts.selection);
  }
}

TEST(TwoPhase, SameValuesAsInterleaved) {
  testing::Rng rng(46);
  for (int trial = 0; trial < 90; ++trial) {
    const Instance inst = testing::random_instance(rng, testing::kAllHypotheses[trial % 3], 3, 3);
    OpCounter ops;
    const auto one = optimize(inst, ops);
    const auto two = optimize_two_phase(inst, ops);
    const ProductModel model(inst);
    const Vector a = values_on_space(inst, one.labeling, model);
    const Vector b = values_on_space(inst, two.labeling, model);
    for (Eigen::Index s = 0; s < a.size(); ++s) EXPECT_NEAR(a(s), b(s), tol(a(s))) << "trial " << trial;
  }
}

TEST(TwoPhase, SingleBanditSameLabeling) {
  testing::Rng rng(47);
  for (int trial = 0; trial < 60; ++trial) {
    const Instance inst = testing::random_instance(rng, testing::kAllHypotheses[trial % 3], 1, 6);
    OpCounter ops;
    EXPECT_EQ(optimize(inst, ops).labeling, optimize_two_phase(inst, ops).labeling);
  }
}

TEST(TwoPhase, IdenticalBanditsInterleave) {
  Matrix q(2, 2);
  q << 0.2, 0.5, 0.1, 0.3;
  Vector r(2);
  r << 1.0, 0.4;
  const Instance inst({BanditChain(r, q), BanditChain(r, q)}, Hypothesis::RiskNeutral);
  OpCounter ops;
  const auto best = optimize_two_phase(inst, ops);
  // Equal ratios tie-break on global id, alternating between the two copies.
  std::vector<std::size_t> bandits;
  for (std::size_t l = 1; l <= 4; ++l) bandits.push_back(inst.state(best.labeling.state_with_label(l)).bandit);
  EXPECT_EQ(bandits, (std::vector<std::size_t>{0, 1, 0, 1}));
  const ProductModel model(inst);
  const OracleOptimum opt = oracle_optimal(model);
  const Vector v = values_on_space(inst, best.labeling, model);
  for (Eigen::Index s = 0; s < v.size(); ++s) EXPECT_NEAR(v(s), opt.values(s), tol(v(s)));
}

TEST(TwoPhase, ParallelMatchesSequential) {
  testing::Rng rng(48);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance inst = testing::random_instance(rng, testing::kAllHypotheses[trial % 3], 8, 6);
    OpCounter a, b;
    const auto seq = optimize_two_phase(inst, a, false);
    const auto par = optimize_two_phase(inst, b, true);
    EXPECT_EQ(seq.labeling, par.labeling);
    EXPECT_EQ(a, b);
  }
}

TEST(Optimize, ValidatedInstancesRunCleanly) {
  testing::Rng rng(49);
  for (int trial = 0; trial < 150; ++trial) {
    const Instance inst = testing::random_instance(rng, testing::kAllHypotheses[trial % 3], 4, 5);
    OpCounter ops;
    EXPECT_NO_THROW({
      const auto best = optimize(inst, ops);
      const auto fm = finalize(inst, best.labeling, ops);
      evaluate(inst, best.labeling, testing::random_start(rng, inst), fm, ops);
    });
  }
}

}  // namespace
}  // namespace bandit
