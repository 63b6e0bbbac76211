#include <benchmark/benchmark.h>

#include "bandit/constrained.hpp"
#include "bandit/evaluator.hpp"
#include "bandit/optimizer.hpp"
#include "bandit/triangularizer.hpp"
#include "generators.hpp"

namespace {

using namespace bandit;

Instance make_instance(std::size_t bandits, std::size_t states, std::uint64_t seed) {
  testing::Rng rng(seed);
  std::vector<BanditChain> chains;
  for (std::size_t k = 0; k < bandits; ++k) chains.push_back(testing::random_rn_chain(rng, states));
  return Instance(std::move(chains), Hypothesis::RiskNeutral);
}

void BM_Triangularize(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  testing::Rng rng(7);
  const BanditChain chain = testing::random_rn_chain(rng, n);
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = i + 1;
  for (auto _ : state) {
    OpCounter ops;
    benchmark::DoNotOptimize(triangularize(chain, labels, ops));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Triangularize)->RangeMultiplier(2)->Range(4, 128)->Complexity(benchmark::oNCubed);

void BM_Evaluate(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const Instance inst = make_instance(k, 16, 11);
  const Labeling lab = Labeling::from_order([&] {
    std::vector<std::size_t> order(inst.num_states());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    return order;
  }());
  OpCounter tri;
  const FinalizedModel fm = finalize(inst, lab, tri);
  const MultiState start(k, 0);
  for (auto _ : state) {
    OpCounter ops;
    benchmark::DoNotOptimize(evaluate(inst, lab, start, fm, ops).value);
  }
}
BENCHMARK(BM_Evaluate)->RangeMultiplier(2)->Range(2, 64);

void BM_Optimize(benchmark::State& state) {
  const Instance inst = make_instance(static_cast<std::size_t>(state.range(0)), 16, 13);
  for (auto _ : state) {
    OpCounter ops;
    benchmark::DoNotOptimize(optimize(inst, ops).stop_label);
  }
}
BENCHMARK(BM_Optimize)->RangeMultiplier(2)->Range(2, 32);

void BM_OptimizeTwoPhase(benchmark::State& state) {
  const Instance inst = make_instance(static_cast<std::size_t>(state.range(0)), 16, 13);
  for (auto _ : state) {
    OpCounter ops;
    benchmark::DoNotOptimize(optimize_two_phase(inst, ops, state.range(1) != 0).stop_label);
  }
}
BENCHMARK(BM_OptimizeTwoPhase)->ArgsProduct({{8, 32}, {0, 1}});

void BM_Solve(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const Instance inst = make_instance(k, 6, 17);
  testing::Rng rng(19);
  std::vector<Vector> rewards{inst.rewards(), testing::random_rewards(rng, inst.num_states())};
  const MultiState start(k, 0);
  // Bound at the midpoint of V_1 under the unconstrained and the V_1-maximizing labelings.
  OpCounter ops;
  const ConstrainedProgram probe{inst, rewards, {0.0}, start};
  const double lo = column_of(probe, price(probe, std::vector<double>{0.0}, ops).labeling, ops)(2);
  const double hi = column_of(probe, price(probe, std::vector<double>{1e6}, ops).labeling, ops)(2);
  const ConstrainedProgram program{inst, rewards, {0.5 * (lo + hi)}, start};
  for (auto _ : state) benchmark::DoNotOptimize(solve(program).index());
}
BENCHMARK(BM_Solve)->DenseRange(2, 8, 2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
