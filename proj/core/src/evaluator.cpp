#include "bandit/evaluator.hpp"

#include <cmath>
#include <string>

#include "bandit/errors.hpp"

namespace bandit {

namespace {

constexpr double kTinyMass = 1e-300;
constexpr std::size_t kDriftCheckInterval = 4096;
constexpr double kDriftTolerance = 1e-10;

void check_finalized(const Instance& instance, const Labeling& labeling, const FinalizedModel& finalized) {
  if (!(finalized.labeling == labeling))
    throw LabelingMismatch("finalized data was computed for a different labeling");
  if (finalized.bandits.size() != instance.num_bandits())
    throw LabelingMismatch("finalized data covers a different number of bandits");
  for (std::size_t k = 0; k < instance.num_bandits(); ++k)
    if (finalized.bandits[k].size() != instance.chain(k).size())
      throw LabelingMismatch("finalized data of bandit " + std::to_string(k) + " has the wrong size");
}

double product_except(const std::vector<double>& mass, std::size_t skip, OpCounter& extra) {
  double out = 1.0;
  bool first = true;
  for (std::size_t p = 0; p < mass.size(); ++p) {
    if (p == skip) continue;
    if (first) {
      out = mass[p];
      first = false;
    } else {
      out *= mass[p];
      ++extra.muls;
    }
  }
  return out;
}

// y[k] holds the initial flow of bandit k; mass[k] its sum and w the product.
EvalResult run(const Instance& instance, const FinalizedModel& finalized, std::vector<Vector> y,
               std::vector<double> mass, double w, OpCounter extra) {
  const Labeling& labeling = finalized.labeling;
  const std::size_t K = instance.num_bandits();
  const auto types = finalized.bandits.front().r_tilde.cols();

  // Position of each local state in its bandit's label order.
  std::vector<std::vector<std::size_t>> order(K);
  std::vector<std::vector<std::size_t>> position(K);
  for (std::size_t k = 0; k < K; ++k) {
    order[k] = local_order(instance, labeling, k);
    position[k].resize(order[k].size());
    for (std::size_t pos = 0; pos < order[k].size(); ++pos) position[k][order[k][pos]] = pos;
  }

  EvalResult result;
  result.values = Vector::Zero(types);
  result.z = Vector::Zero(static_cast<Eigen::Index>(instance.num_states()));
  result.extra_ops = extra;

  const std::size_t total = instance.num_states();
  for (std::size_t n = 1; n <= total; ++n) {
    const StateId s = instance.state(labeling.state_with_label(n));
    const std::size_t k = s.bandit;
    const std::size_t i = s.local;
    const auto ii = static_cast<Eigen::Index>(i);
    const std::size_t pos = position[k][i];
    const std::size_t later = order[k].size() - 1 - pos;  // m
    OpCounter& ops = later >= 1 ? result.ops : result.extra_ops;
    const FinalizedBandit& fb = finalized.bandits[k];
    Vector& yk = y[k];

    // Contribution of state i: r~(i) y^k(i) prod_{p != k} mass[p].
    // A bandit whose flow has drained takes the product route instead of the
    // division; the step is still charged as the division it replaces.
    double others;
    ++ops.divs;
    if (mass[k] > kTinyMass) {
      others = w / mass[k];
    } else {
      others = product_except(mass, k, result.extra_ops);
    }
    const double z = yk(ii) * others;
    ++ops.muls;
    result.z(static_cast<Eigen::Index>(s.global)) = z;
    for (Eigen::Index t = 0; t < types; ++t) {
      result.values(t) += fb.r_tilde(ii, t) * z;
      ++ops.muls;
      ++ops.adds;
    }

    // Push the flow through state i to higher-labeled states.
    const double yi = yk(ii);
    double new_mass = 0.0;
    for (std::size_t q = pos + 1; q < order[k].size(); ++q) {
      const auto jj = static_cast<Eigen::Index>(order[k][q]);
      yk(jj) += yi * fb.q_tilde(ii, jj);
      ++ops.muls;
      ++ops.adds;
    }
    yk(ii) = 0.0;
    for (std::size_t q = pos + 1; q < order[k].size(); ++q) {
      const auto jj = static_cast<Eigen::Index>(order[k][q]);
      if (q == pos + 1) {
        new_mass = yk(jj);
      } else {
        new_mass += yk(jj);
        ++ops.adds;
      }
    }

    if (later == 0) {
      mass[k] = 0.0;
      w = 0.0;
    } else if (mass[k] > kTinyMass) {
      w *= new_mass / mass[k];
      ++ops.divs;
      ++ops.muls;
      mass[k] = new_mass;
    } else {
      ++ops.divs;
      ++ops.muls;
      mass[k] = new_mass;
      w = product_except(mass, K, result.extra_ops);
    }

    if (n % kDriftCheckInterval == 0) {
      const double exact = product_except(mass, K, result.extra_ops);
      if (std::abs(w - exact) > kDriftTolerance * std::abs(exact)) w = exact;
    }
  }
  result.value = result.values(0);
  return result;
}

std::vector<Vector> unit_flows(const Instance& instance, const MultiState& start) {
  if (start.size() != instance.num_bandits())
    throw InvalidInput("start multi-state must name one state per bandit");
  std::vector<Vector> y;
  y.reserve(start.size());
  for (std::size_t k = 0; k < start.size(); ++k) {
    const std::size_t n = instance.chain(k).size();
    if (start[k] >= n) throw InvalidInput("start state of bandit " + std::to_string(k) + " out of range");
    Vector v = Vector::Zero(static_cast<Eigen::Index>(n));
    v(static_cast<Eigen::Index>(start[k])) = 1.0;
    y.push_back(std::move(v));
  }
  return y;
}

}  // namespace

EvalResult evaluate(const Instance& instance, const Labeling& labeling, const MultiState& start,
                    const FinalizedModel& finalized, OpCounter& counter) {
  check_finalized(instance, labeling, finalized);
  auto y = unit_flows(instance, start);
  EvalResult result = run(instance, finalized, std::move(y), std::vector<double>(instance.num_bandits(), 1.0), 1.0, {});
  counter += result.ops;
  return result;
}

EvalResult evaluate(const Instance& instance, const Labeling& labeling, const MultiState& start) {
  OpCounter scratch;
  const FinalizedModel finalized = finalize(instance, labeling, scratch);
  return evaluate(instance, labeling, start, finalized, scratch);
}

EvalResult evaluate_distribution(const Instance& instance, const Labeling& labeling,
                                 std::span<const Vector> marginals, const FinalizedModel& finalized,
                                 OpCounter& counter) {
  check_finalized(instance, labeling, finalized);
  if (marginals.size() != instance.num_bandits())
    throw InvalidInput("one marginal distribution per bandit is required");
  std::vector<Vector> y;
  std::vector<double> mass;
  OpCounter extra;
  double w = 1.0;
  for (std::size_t k = 0; k < marginals.size(); ++k) {
    const Vector& m = marginals[k];
    if (static_cast<std::size_t>(m.size()) != instance.chain(k).size())
      throw InvalidInput("marginal of bandit " + std::to_string(k) + " has the wrong length");
    if (!m.allFinite() || (m.array() < 0.0).any())
      throw InvalidInput("marginal of bandit " + std::to_string(k) + " must be nonnegative");
    double sum = m(0);
    for (Eigen::Index j = 1; j < m.size(); ++j) {
      sum += m(j);
      ++extra.adds;
    }
    if (std::abs(sum - 1.0) > kDistributionTolerance)
      throw InvalidInput("marginal of bandit " + std::to_string(k) + " does not sum to 1");
    if (k == 0) {
      w = sum;
    } else {
      w *= sum;
      ++extra.muls;
    }
    y.push_back(m);
    mass.push_back(sum);
  }
  EvalResult result = run(instance, finalized, std::move(y), std::move(mass), w, extra);
  counter += result.ops;
  return result;
}

EvalResult evaluate_multi_reward(const Instance& instance, const Labeling& labeling, const MultiState& start,
                                 std::span<const Vector> rewards, OpCounter& counter) {
  if (instance.hypothesis() != Hypothesis::RiskNeutral) {
    throw RoadblockError(
        "several reward types need reward-independent transition rates; exponential utility folds payoffs "
        "into the rates, so only linear utility (RN) is supported");
  }
  const FinalizedModel finalized = finalize_multi(instance, labeling, rewards, counter);
  auto y = unit_flows(instance, start);
  EvalResult result = run(instance, finalized, std::move(y), std::vector<double>(instance.num_bandits(), 1.0), 1.0, {});
  counter += result.ops;
  return result;
}

std::uint64_t evaluator_operation_count(const Instance& instance) {
  std::uint64_t total = 0;
  for (const auto& chain : instance.chains())
    for (std::uint64_t m = 1; m + 1 <= chain.size(); ++m) total += 3 * m + 5;
  return total;
}

}  // namespace bandit
