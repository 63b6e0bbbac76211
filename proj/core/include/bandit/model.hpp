#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bandit/linalg.hpp"

namespace bandit {

/// Strict-positivity threshold for the solution of (I - q) x = e.
inline constexpr double kTransienceTolerance = 1e-9;
/// Slack allowed on row sums when checking substochasticity.
inline constexpr double kRowSumTolerance = 1e-12;
/// Upper bound on the size of an enumerated multi-state space.
inline constexpr std::size_t kDefaultMultiStateCap = 1'000'000;

enum class Hypothesis {
  RiskNeutral,   // q substochastic
  RiskAverse,    // rewards nonpositive
  RiskSeeking,   // rewards nonnegative
};

std::string_view to_string(Hypothesis h);
/// Accepts "RN", "RA", "RS".
std::optional<Hypothesis> parse_hypothesis(std::string_view s);

struct StateId {
  std::size_t bandit = 0;
  std::size_t local = 0;
  std::size_t global = 0;

  friend bool operator==(const StateId&, const StateId&) = default;
};

/// Probabilistic description of one chain. Row i of p holds the transition
/// probabilities out of state i; the termination probability is implied.
struct RawBandit {
  Matrix p;
  Vector x0;  // payoff on termination
  Matrix x;   // payoff on transition i -> j

  std::size_t size() const { return static_cast<std::size_t>(p.rows()); }
  double termination_probability(std::size_t i) const;
};

struct LinearUtility {
  std::optional<double> discount;
};
struct RiskAverseUtility {
  double lambda = 1.0;
};
struct RiskSeekingUtility {
  double lambda = 1.0;
};
using UtilitySpec = std::variant<LinearUtility, RiskAverseUtility, RiskSeekingUtility>;

/// Hypothesis implied by a utility: linear -> RN, exponential -> RA / RS.
Hypothesis natural_hypothesis(const UtilitySpec& u);

/// Rewards r and nonnegative transition rates q of one chain.
class BanditChain {
 public:
  BanditChain(Vector rewards, Matrix rates);

  std::size_t size() const { return static_cast<std::size_t>(r_.size()); }
  const Vector& rewards() const { return r_; }
  const Matrix& rates() const { return q_; }
  /// a(i) = sum_j q(i,j).
  const Vector& amplification() const { return a_; }

 private:
  Vector r_;
  Matrix q_;
  Vector a_;
};

/// Row sums of q, accumulated left to right.
Vector row_sums(const Matrix& q);

/// Maps raw probabilities and payoffs to (r, q) for the given utility.
BanditChain build_chain(const RawBandit& raw, const UtilitySpec& utility);

/// True iff (I - q) x = e has a solution with every entry above tol. A
/// singular system is reported as non-transient.
bool is_transient(const Matrix& q, double tol = kTransienceTolerance);

/// K disjoint chains sharing one declared hypothesis. Global state ids are
/// assigned in chain order, then local order.
class Instance {
 public:
  Instance(std::vector<BanditChain> chains, Hypothesis hypothesis);

  Hypothesis hypothesis() const { return hypothesis_; }
  std::size_t num_bandits() const { return chains_.size(); }
  std::size_t num_states() const { return total_states_; }
  const BanditChain& chain(std::size_t k) const { return chains_.at(k); }
  std::span<const BanditChain> chains() const { return chains_; }

  std::size_t offset(std::size_t k) const { return offsets_.at(k); }
  std::size_t global_id(std::size_t bandit, std::size_t local) const;
  StateId state(std::size_t global) const;

  /// Global reward vector, concatenated over chains.
  Vector rewards() const;
  /// Same transition rates, different rewards (one entry per global state).
  Instance with_rewards(const Vector& global_rewards) const;

 private:
  std::vector<BanditChain> chains_;
  Hypothesis hypothesis_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> owner_;
  std::size_t total_states_ = 0;
};

enum class Condition {
  NonnegativeRates,
  Transient,
  Substochastic,
  NonpositiveRewards,
  NonnegativeRewards,
};

std::string_view to_string(Condition c);

struct ChainConditions {
  bool nonnegative_rates = false;
  bool transient = false;
  bool substochastic = false;
  bool nonpositive_rewards = false;
  bool nonnegative_rewards = false;

  bool holds(Condition c) const;
};

struct Violation {
  Condition condition;
  std::size_t bandit = 0;
  std::optional<std::size_t> local_state;
  std::string detail;
};

struct ValidationReport {
  Hypothesis declared = Hypothesis::RiskNeutral;
  std::vector<ChainConditions> chains;
  std::optional<Violation> violation;

  bool ok() const { return !violation.has_value(); }
};

/// Conditions the declared hypothesis requires, in reporting order.
std::vector<Condition> required_conditions(Hypothesis h);

ChainConditions check_chain(const BanditChain& chain, double transience_tol = kTransienceTolerance);
ValidationReport validate(const Instance& instance, double transience_tol = kTransienceTolerance);
/// Throws HypothesisViolation describing the first failed condition.
void require_valid(const Instance& instance);

/// One local state per bandit.
using MultiState = std::vector<std::size_t>;

/// Lexicographic enumeration of all multi-states (last bandit varies fastest).
class MultiStateSpace {
 public:
  explicit MultiStateSpace(const Instance& instance, std::size_t cap = kDefaultMultiStateCap);

  std::size_t size() const { return size_; }
  std::size_t num_bandits() const { return radix_.size(); }
  MultiState at(std::size_t index) const;
  std::size_t index_of(const MultiState& s) const;
  /// Index distance between multi-states differing by one in bandit k.
  std::size_t stride(std::size_t k) const { return stride_.at(k); }
  std::size_t radix(std::size_t k) const { return radix_.at(k); }

 private:
  std::vector<std::size_t> radix_;
  std::vector<std::size_t> stride_;
  std::size_t size_ = 0;
};

}  // namespace bandit
