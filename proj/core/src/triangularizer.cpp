#include "bandit/triangularizer.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "bandit/errors.hpp"
#include "bandit/parallel.hpp"

namespace bandit {

Labeling::Labeling(std::vector<std::size_t> labels) : labels_(std::move(labels)) {
  const std::size_t n = labels_.size();
  order_.assign(n, n);
  for (std::size_t g = 0; g < n; ++g) {
    const std::size_t l = labels_[g];
    if (l < 1 || l > n) throw InvalidInput("label " + std::to_string(l) + " outside 1.." + std::to_string(n));
    if (order_[l - 1] != n) throw InvalidInput("label " + std::to_string(l) + " assigned twice");
    order_[l - 1] = g;
  }
}

Labeling Labeling::from_order(std::span<const std::size_t> order) {
  std::vector<std::size_t> labels(order.size(), 0);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    if (order[pos] >= order.size()) throw InvalidInput("state id out of range in label order");
    labels[order[pos]] = pos + 1;
  }
  return Labeling(std::move(labels));
}

Labeling Labeling::identity(std::size_t n) {
  std::vector<std::size_t> labels(n);
  std::iota(labels.begin(), labels.end(), std::size_t{1});
  return Labeling(std::move(labels));
}

std::vector<std::size_t> local_order(const Instance& instance, const Labeling& labeling, std::size_t k) {
  const std::size_t base = instance.offset(k);
  const std::size_t n = instance.chain(k).size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return labeling.label(base + a) < labeling.label(base + b);
  });
  return order;
}

Tableau::Tableau(const BanditChain& chain, OpCounter& counter, bool track_slack)
    : Tableau(chain.rates(), Matrix(chain.rewards()), counter, track_slack) {}

Tableau::Tableau(const Matrix& rates, Matrix rewards, OpCounter& counter, bool track_slack)
    : rhs_(std::move(rewards)), track_slack_(track_slack) {
  const auto n = rates.rows();
  if (rates.cols() != n || rhs_.rows() != n || rhs_.cols() < 1)
    throw InvalidInput("tableau shape mismatch");
  a_.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) a_(i, j) = (i == j) ? 0.0 : 0.0 - rates(i, j);
    a_(i, i) = 1.0 - rates(i, i);
    ++counter.subs;
  }
  if (track_slack_) {
    const Vector a = row_sums(rates);
    slack_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      slack_(i) = 1.0 - a(i);
      ++counter.subs;
    }
  }
  finalized_.assign(static_cast<std::size_t>(n), false);
  remaining_.resize(static_cast<std::size_t>(n));
  std::iota(remaining_.begin(), remaining_.end(), std::size_t{0});
}

double Tableau::reward(std::size_t i, std::size_t type) const {
  return rhs_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(type));
}

double Tableau::rate(std::size_t i, std::size_t j) const {
  const auto ii = static_cast<Eigen::Index>(i);
  const auto jj = static_cast<Eigen::Index>(j);
  return i == j ? 1.0 - a_(ii, ii) : 0.0 - a_(ii, jj);
}

double Tableau::slack(std::size_t i) const {
  if (!track_slack_) throw Error("tableau does not track 1 - a(i)");
  return slack_(static_cast<Eigen::Index>(i));
}

void Tableau::finalize_state(std::size_t i, OpCounter& counter) {
  if (i >= size()) throw InvalidInput("state index out of range");
  if (finalized_[i]) throw Error("state " + std::to_string(i) + " is already finalized");

  const auto pi = static_cast<Eigen::Index>(i);
  const double pivot = a_(pi, pi);
  if (!(pivot > kPivotTolerance)) {
    throw HypothesisViolation("bandit " + std::to_string(bandit_) + " state " + std::to_string(i) +
                                  ": 1 - q(i,i) = " + std::to_string(pivot) + " is not positive",
                              bandit_, i);
  }
  const Eigen::Index types = rhs_.cols();

  // Scale row i; entries in already-finalized columns are zero and untouched.
  for (std::size_t p : remaining_) {
    if (p == i) continue;
    a_(pi, static_cast<Eigen::Index>(p)) /= pivot;
    ++counter.divs;
  }
  for (Eigen::Index c = 0; c < types; ++c) {
    rhs_(pi, c) /= pivot;
    ++counter.divs;
  }
  if (track_slack_) {
    slack_(pi) /= pivot;
    ++counter.divs;
  }
  a_(pi, pi) = 1.0;

  // Eliminate column i from the other remaining rows.
  for (std::size_t j : remaining_) {
    if (j == i) continue;
    const auto pj = static_cast<Eigen::Index>(j);
    const double factor = 0.0 - a_(pj, pi);  // current q(j,i)
    for (std::size_t p : remaining_) {
      if (p == i) continue;
      const auto pp = static_cast<Eigen::Index>(p);
      a_(pj, pp) += factor * a_(pi, pp);
      ++counter.muls;
      ++counter.adds;
    }
    for (Eigen::Index c = 0; c < types; ++c) {
      rhs_(pj, c) += factor * rhs_(pi, c);
      ++counter.muls;
      ++counter.adds;
    }
    if (track_slack_) {
      slack_(pj) += factor * slack_(pi);
      ++counter.muls;
      ++counter.adds;
    }
    a_(pj, pi) = 0.0;
  }

  finalized_[i] = true;
  remaining_.erase(std::find(remaining_.begin(), remaining_.end(), i));
}

FinalizedBandit Tableau::finalized() const {
  if (!complete()) throw Error("tableau is not fully finalized");
  const auto n = a_.rows();
  FinalizedBandit out{Matrix::Zero(n, n), rhs_};
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) out.q_tilde(i, j) = 0.0 - a_(i, j);
  return out;
}

Tableau triangularize(const BanditChain& chain, std::span<const std::size_t> labels, OpCounter& counter) {
  if (labels.size() != chain.size()) throw InvalidInput("one label per state is required");
  std::vector<std::size_t> order(chain.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });
  for (std::size_t k = 1; k < order.size(); ++k)
    if (labels[order[k]] == labels[order[k - 1]]) throw InvalidInput("labels must be distinct");

  Tableau tableau(chain, counter);
  for (std::size_t i : order) tableau.finalize_state(i, counter);
  return tableau;
}

FinalizedBandit finalized_data(const Tableau& tableau) { return tableau.finalized(); }

namespace {

void check_labeling(const Instance& instance, const Labeling& labeling) {
  if (labeling.size() != instance.num_states())
    throw InvalidInput("labeling covers " + std::to_string(labeling.size()) + " states, instance has " +
                       std::to_string(instance.num_states()));
}

}  // namespace

FinalizedModel finalize(const Instance& instance, const Labeling& labeling, OpCounter& counter, bool parallel) {
  check_labeling(instance, labeling);
  const std::size_t K = instance.num_bandits();
  std::vector<FinalizedBandit> bandits(K);
  std::vector<OpCounter> counters(K);
  parallel_for(
      K,
      [&](std::size_t k) {
        Tableau tableau(instance.chain(k), counters[k]);
        tableau.set_bandit_index(k);
        for (std::size_t i : local_order(instance, labeling, k)) tableau.finalize_state(i, counters[k]);
        bandits[k] = tableau.finalized();
      },
      parallel);
  for (const auto& c : counters) counter += c;
  return FinalizedModel{labeling, std::move(bandits)};
}

FinalizedModel finalize_multi(const Instance& instance, const Labeling& labeling, std::span<const Vector> rewards,
                              OpCounter& counter) {
  check_labeling(instance, labeling);
  if (rewards.empty()) throw InvalidInput("at least one reward vector is required");
  for (const auto& r : rewards)
    if (static_cast<std::size_t>(r.size()) != instance.num_states())
      throw InvalidInput("each reward vector needs one entry per state");

  std::vector<FinalizedBandit> bandits;
  bandits.reserve(instance.num_bandits());
  for (std::size_t k = 0; k < instance.num_bandits(); ++k) {
    const auto n = static_cast<Eigen::Index>(instance.chain(k).size());
    const auto base = static_cast<Eigen::Index>(instance.offset(k));
    Matrix rhs(n, static_cast<Eigen::Index>(rewards.size()));
    for (std::size_t t = 0; t < rewards.size(); ++t) rhs.col(static_cast<Eigen::Index>(t)) = rewards[t].segment(base, n);
    Tableau tableau(instance.chain(k).rates(), std::move(rhs), counter);
    tableau.set_bandit_index(k);
    for (std::size_t i : local_order(instance, labeling, k)) tableau.finalize_state(i, counter);
    bandits.push_back(tableau.finalized());
  }
  return FinalizedModel{labeling, std::move(bandits)};
}

bool hypothesis_preserved(const BanditChain& before, const FinalizedBandit& after, Hypothesis hypothesis) {
  if (after.size() != before.size()) return false;
  if ((after.q_tilde.array() < 0.0).any()) return false;
  if (!is_transient(after.q_tilde)) return false;
  const Vector r = after.rewards();
  switch (hypothesis) {
    case Hypothesis::RiskNeutral:
      return (row_sums(after.q_tilde).array() <= 1.0 + 1e-9).all();
    case Hypothesis::RiskAverse:
      return (r.array() <= 0.0).all();
    case Hypothesis::RiskSeeking:
      return (r.array() >= 0.0).all();
  }
  return false;
}

std::uint64_t triangularizer_operation_count(std::size_t n) {
  std::uint64_t total = n;
  for (std::uint64_t m = 1; m <= n; ++m) total += 2 * m * m - m;
  return total;
}

}  // namespace bandit
