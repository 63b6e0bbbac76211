#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bandit/linalg.hpp"
#include "bandit/model.hpp"
#include "bandit/op_counter.hpp"

namespace bandit {

/// Smallest admissible pivot 1 - q(i,i).
inline constexpr double kPivotTolerance = 1e-12;

/// Bijection from global state ids onto 1..|N|. Termination implicitly
/// carries label |N| + 1 and is never stored.
class Labeling {
 public:
  /// labels[g] is the label of global state g.
  explicit Labeling(std::vector<std::size_t> labels);
  /// order[0] receives label 1, order[1] label 2, and so on.
  static Labeling from_order(std::span<const std::size_t> order);
  static Labeling identity(std::size_t n);

  std::size_t size() const { return labels_.size(); }
  std::size_t label(std::size_t global) const { return labels_.at(global); }
  std::size_t state_with_label(std::size_t label) const { return order_.at(label - 1); }
  std::span<const std::size_t> labels() const { return labels_; }
  /// Global ids sorted by label.
  std::span<const std::size_t> order() const { return order_; }

  friend bool operator==(const Labeling& a, const Labeling& b) { return a.labels_ == b.labels_; }

 private:
  std::vector<std::size_t> labels_;
  std::vector<std::size_t> order_;
};

/// Local states of bandit k sorted by label.
std::vector<std::size_t> local_order(const Instance& instance, const Labeling& labeling, std::size_t k);

/// Rewards and rates of one bandit after every state has been finalized.
/// r_tilde has one column per reward type.
struct FinalizedBandit {
  Matrix q_tilde;
  Matrix r_tilde;

  std::size_t size() const { return static_cast<std::size_t>(q_tilde.rows()); }
  Vector rewards(std::size_t type = 0) const { return r_tilde.col(static_cast<Eigen::Index>(type)); }
};

/// Working array [(I - q), r] for one bandit, mutated by elementary row
/// operations. Optionally carries an extra column holding the row sums of
/// (I - q), i.e. 1 - a(j) under current data; its arithmetic is counted.
class Tableau {
 public:
  Tableau(const BanditChain& chain, OpCounter& counter, bool track_slack = false);
  /// Extended tableau with one right-hand column per reward type.
  Tableau(const Matrix& rates, Matrix rewards, OpCounter& counter, bool track_slack = false);

  std::size_t size() const { return static_cast<std::size_t>(a_.rows()); }
  std::size_t reward_types() const { return static_cast<std::size_t>(rhs_.cols()); }
  bool is_finalized(std::size_t i) const { return finalized_.at(i); }
  bool complete() const { return remaining_.empty(); }
  /// Local ids not yet finalized, ascending.
  const std::vector<std::size_t>& remaining() const { return remaining_; }

  /// Current reward r(i) of the given type.
  double reward(std::size_t i, std::size_t type = 0) const;
  /// Current rate q(i,j).
  double rate(std::size_t i, std::size_t j) const;
  /// Current 1 - a(i); requires slack tracking.
  double slack(std::size_t i) const;
  bool tracks_slack() const { return track_slack_; }

  /// One pass of the pivot step for state i: scale row i by 1/[1 - q(i,i)],
  /// then add q(j,i) times row i to every other remaining row j, clearing
  /// column i. Throws HypothesisViolation when the pivot is not positive.
  void finalize_state(std::size_t i, OpCounter& counter);

  /// Reads (r~, q~) off a complete tableau.
  FinalizedBandit finalized() const;

  void set_bandit_index(std::size_t k) { bandit_ = k; }

 private:
  Matrix a_;    // I - q
  Matrix rhs_;  // rewards, one column per type
  Vector slack_;
  bool track_slack_ = false;
  std::vector<bool> finalized_;
  std::vector<std::size_t> remaining_;
  std::size_t bandit_ = 0;
};

/// Finalizes a single chain. labels holds one label per local state; states
/// are processed in increasing label order.
Tableau triangularize(const BanditChain& chain, std::span<const std::size_t> labels, OpCounter& counter);
FinalizedBandit finalized_data(const Tableau& tableau);

/// Finalized data for every bandit of an instance under one labeling.
struct FinalizedModel {
  Labeling labeling;
  std::vector<FinalizedBandit> bandits;
};

/// Runs the Triangularizer on every bandit. With parallel set, bandits are
/// processed on worker threads; per-bandit counters are summed afterwards.
FinalizedModel finalize(const Instance& instance, const Labeling& labeling, OpCounter& counter,
                        bool parallel = false);
/// Same row operations applied once to an extended tableau carrying several
/// reward vectors (each indexed by global state).
FinalizedModel finalize_multi(const Instance& instance, const Labeling& labeling,
                              std::span<const Vector> rewards, OpCounter& counter);

/// Checks on finalized data the conditions the hypothesis requires of the
/// original chain.
bool hypothesis_preserved(const BanditChain& before, const FinalizedBandit& after, Hypothesis hypothesis);

/// Exact count for a full run on n states: n + sum_{m=1..n} (2m^2 - m).
std::uint64_t triangularizer_operation_count(std::size_t n);

}  // namespace bandit
