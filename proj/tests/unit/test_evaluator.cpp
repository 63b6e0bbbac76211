#include <gtest/gtest.h>

#include "bandit/errors.hpp"
#include "bandit/evaluator.hpp"
#include "bandit/oracle.hpp"
#include "generators.hpp"

namespace bandit {
namespace {

Instance two_state() {
  Matrix q(2, 2);
  q << 0.0, 0.5, 0.5, 0.0;
  Vector r(2);
  r << 1.0, 0.0;
  return Instance({BanditChain(r, q)}, Hypothesis::RiskNeutral);
}

BanditChain single(double r, double q = 0.0) { return BanditChain(Vector::Constant(1, r), Matrix::Constant(1, 1, q)); }

Instance three_singles() { return Instance({single(1.0), single(0.0), single(0.0)}, Hypothesis::RiskNeutral); }

TEST(Evaluate, TwoStateChain) {
  const Instance inst = two_state();
  const Labeling lab = Labeling::identity(2);
  OpCounter tri, ops;
  const FinalizedModel fm = finalize(inst, lab, tri);
  const EvalResult res = evaluate(inst, lab, {0}, fm, ops);
  EXPECT_NEAR(res.value, 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(res.z(0), 1.0, 1e-15);
  EXPECT_NEAR(res.z(1), 0.5, 1e-15);
  EXPECT_EQ(res.ops.arithmetic(), 8u);
  EXPECT_EQ(ops, res.ops);
  EXPECT_EQ(evaluator_operation_count(inst), 8u);
  EXPECT_NEAR(evaluate(inst, lab, {1}).value, 2.0 / 3.0, 1e-15);
}

TEST(Evaluate, ZeroAmplificationTerminates) {
  const Instance inst({single(1.0), single(5.0)}, Hypothesis::RiskNeutral);
  EXPECT_DOUBLE_EQ(evaluate(inst, Labeling({1, 2}), {0, 0}).value, 1.0);
  EXPECT_DOUBLE_EQ(evaluate(inst, Labeling({2, 1}), {0, 0}).value, 5.0);
}

TEST(Evaluate, RejectsForeignFinalizedData) {
  const Instance inst = two_state();
  OpCounter ops;
  const FinalizedModel fm = finalize(inst, Labeling({2, 1}), ops);
  EXPECT_THROW(evaluate(inst, Labeling::identity(2), {0}, fm, ops), LabelingMismatch);
  EXPECT_THROW(evaluate(inst, Labeling::identity(2), {2}), InvalidInput);
}

TEST(EvaluateDistribution, UnitMassAndUniform) {
  const Instance inst = two_state();
  const Labeling lab = Labeling::identity(2);
  OpCounter ops;
  const FinalizedModel fm = finalize(inst, lab, ops);
  Vector unit(2);
  unit << 0.0, 1.0;
  std::vector<Vector> m{unit};
  EXPECT_NEAR(evaluate_distribution(inst, lab, m, fm, ops).value, 2.0 / 3.0, 1e-15);
  m[0] = Vector::Constant(2, 0.5);
  EXPECT_NEAR(evaluate_distribution(inst, lab, m, fm, ops).value, 1.0, 1e-15);
  m[0] << 0.5, 0.4;
  EXPECT_THROW(evaluate_distribution(inst, lab, m, fm, ops), InvalidInput);
}

TEST(EvaluateDistribution, UniformIsAverageOfOracleValues) {
  testing::Rng rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    const Instance inst = testing::random_instance(rng, testing::kAllHypotheses[trial % 3], 3, 3);
    const Labeling lab = testing::random_labeling(rng, inst.num_states());
    const ProductModel model(inst);
    const Vector v = oracle_values(model, model.priority_policy(lab));
    std::vector<Vector> marginals;
    for (std::size_t k = 0; k < inst.num_bandits(); ++k) {
      Vector p(static_cast<Eigen::Index>(inst.chain(k).size()));
      for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = rng.uniform(0.0, 1.0);
      marginals.push_back(p / p.sum());
    }
    double expected = 0.0;
    for (std::size_t s = 0; s < model.size(); ++s) {
      const MultiState ms = model.space().at(s);
      double w = 1.0;
      for (std::size_t k = 0; k < ms.size(); ++k) w *= marginals[k](static_cast<Eigen::Index>(ms[k]));
      expected += w * v(static_cast<Eigen::Index>(s));
    }
    OpCounter ops;
    const FinalizedModel fm = finalize(inst, lab, ops);
    EXPECT_NEAR(evaluate_distribution(inst, lab, marginals, fm, ops).value, expected, 1e-9 * (1 + std::abs(expected)));
  }
}

TEST(Evaluate, MatchesOracleAndCountFormula) {
  testing::Rng rng(22);
  for (int trial = 0; trial < 300; ++trial) {
    const Hypothesis h = testing::kAllHypotheses[trial % 3];
    const Instance inst = testing::random_instance(rng, h, 4, 4);
    std::size_t product = 1;
    for (const auto& c : inst.chains()) product *= c.size();
    if (product > 200) continue;
    const Labeling lab = testing::random_labeling(rng, inst.num_states());
    const MultiState s = testing::random_start(rng, inst);
    OpCounter tri, ops;
    const FinalizedModel fm = finalize(inst, lab, tri);
    const EvalResult res = evaluate(inst, lab, s, fm, ops);
    const ProductModel model(inst);
    const double oracle = oracle_evaluate(model, model.priority_policy(lab), s);
    EXPECT_LE(std::abs(res.value - oracle), 1e-9 * (1.0 + std::abs(oracle))) << "trial " << trial;
    EXPECT_EQ(res.ops.arithmetic(), evaluator_operation_count(inst));
    EXPECT_EQ(res.ops.comparisons, 0u);
    // value = sum_i z(i) r~(i)
    double dot = 0.0;
    for (std::size_t k = 0; k < inst.num_bandits(); ++k)
      dot += res.z.segment(static_cast<Eigen::Index>(inst.offset(k)), static_cast<Eigen::Index>(inst.chain(k).size()))
                 .dot(fm.bandits[k].rewards());
    EXPECT_NEAR(dot, res.value, 1e-12 * (1.0 + std::abs(res.value)));
  }
}

TEST(Evaluate, ConservationUnderUnitRewards) {
  testing::Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<BanditChain> chains;
    const std::size_t k = rng.between(1, 3);
    for (std::size_t b = 0; b < k; ++b) {
      const std::size_t n = rng.between(1, 4);
      Matrix q(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i)
        q.row(static_cast<Eigen::Index>(i)) = testing::random_row(rng, n, rng.uniform(0.0, 0.95)).transpose();
      chains.emplace_back(Vector::Ones(static_cast<Eigen::Index>(n)), q);
    }
    const Instance inst(std::move(chains), Hypothesis::RiskNeutral);
    const Labeling lab = testing::random_labeling(rng, inst.num_states());
    const MultiState s = testing::random_start(rng, inst);
    const EvalResult res = evaluate(inst, lab, s);
    EXPECT_GE(res.z.minCoeff(), 0.0);
    for (std::size_t b = 0; b < inst.num_bandits(); ++b)
      EXPECT_LE(res.z(static_cast<Eigen::Index>(inst.global_id(b, s[b]))), 1.0 + 1e-12);
  }
}

TEST(Evaluate, SamePriorityRuleSameValue) {
  // Bandit 0 has one state with label 1: bandit 1's labels never matter.
  Matrix q(2, 2);
  q << 0.1, 0.4, 0.3, 0.2;
  Vector r(2);
  r << 0.5, 1.5;
  const Instance inst({single(1.0), BanditChain(r, q)}, Hypothesis::RiskNeutral);
  const ProductModel model(inst);
  const Labeling a({1, 2, 3}), b({1, 3, 2});
  EXPECT_EQ(model.priority_policy(a), model.priority_policy(b));
  for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(evaluate(inst, a, {0, j}).value, evaluate(inst, b, {0, j}).value, 1e-15);
}

TEST(EvaluateMultiReward, ThreeSinglesColumns) {
  const Instance inst = three_singles();
  Vector r0(3), r1(3), r2(3);
  r0 << 1, 0, 0;
  r1 << 0, 1, 0;
  r2 << 0, 0, 1;
  const std::vector<Vector> rewards{r0, r1, r2};
  OpCounter ops;
  const EvalResult first = evaluate_multi_reward(inst, Labeling({1, 2, 3}), {0, 0, 0}, rewards, ops);
  EXPECT_EQ(first.values, (Vector(3) << 1, 0, 0).finished());
  const EvalResult fifth = evaluate_multi_reward(inst, Labeling({3, 1, 2}), {0, 0, 0}, rewards, ops);
  EXPECT_EQ(fifth.values, (Vector(3) << 0, 1, 0).finished());
}

TEST(EvaluateMultiReward, LinearInRewards) {
  testing::Rng rng(24);
  for (int trial = 0; trial < 50; ++trial) {
    const Instance inst = testing::random_instance(rng, Hypothesis::RiskNeutral, 3, 4);
    const Labeling lab = testing::random_labeling(rng, inst.num_states());
    const MultiState s = testing::random_start(rng, inst);
    const Vector r = testing::random_rewards(rng, inst.num_states());
    const std::vector<Vector> rewards{r, 2.0 * r};
    OpCounter ops;
    const EvalResult multi = evaluate_multi_reward(inst, lab, s, rewards, ops);
    const double single_value = evaluate(inst.with_rewards(r), lab, s).value;
    EXPECT_NEAR(multi.values(0), single_value, 1e-12 * (1 + std::abs(single_value)));
    EXPECT_NEAR(multi.values(1), 2.0 * multi.values(0), 1e-12 * (1 + std::abs(single_value)));
  }
}

TEST(EvaluateMultiReward, RejectsExponentialUtility) {
  const Instance inst({single(-1.0, 0.5)}, Hypothesis::RiskAverse);
  const std::vector<Vector> rewards{inst.rewards()};
  OpCounter ops;
  EXPECT_THROW(evaluate_multi_reward(inst, Labeling::identity(1), {0}, rewards, ops), RoadblockError);
}

}  // namespace
}  // namespace bandit
