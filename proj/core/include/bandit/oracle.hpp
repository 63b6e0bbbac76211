#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "bandit/constrained.hpp"
#include "bandit/linalg.hpp"
#include "bandit/model.hpp"
#include "bandit/triangularizer.hpp"

namespace bandit {

inline constexpr std::size_t kOracleStateCap = 2000;

/// Bandit played at each multi-state, indexed like MultiStateSpace.
using Policy = std::vector<std::size_t>;

/// Explicit product-space model of an instance.
class ProductModel {
 public:
  explicit ProductModel(const Instance& instance, std::size_t cap = kOracleStateCap);
  ProductModel(Instance&&, std::size_t = kOracleStateCap) = delete;

  const Instance& instance() const { return *instance_; }
  const MultiStateSpace& space() const { return space_; }
  std::size_t size() const { return space_.size(); }

  /// Q^pi: row s holds q(s_k, j) at the multi-state with s_k replaced by j.
  Matrix transition_matrix(const Policy& policy) const;
  /// R^pi(s) = r(s_k) for k = policy(s), with r indexed by global state.
  Vector reward_vector(const Policy& policy, const Vector& global_rewards) const;
  Vector reward_vector(const Policy& policy) const;

  /// h(s, k, v): reward of playing k at s plus the rate-weighted continuation.
  double local_utility(std::size_t s, std::size_t k, const Vector& v) const;

  Policy priority_policy(const Labeling& labeling) const;

 private:
  const Instance* instance_;
  MultiStateSpace space_;
  Vector rewards_;
};

/// V^pi on the whole product space, by a dense LU solve of (I - Q^pi) V = R^pi.
Vector oracle_values(const ProductModel& model, const Policy& policy);
/// V^pi for several reward vectors sharing one factorization (one column each).
Matrix oracle_values(const ProductModel& model, const Policy& policy, std::span<const Vector> rewards);
double oracle_evaluate(const ProductModel& model, const Policy& policy, const MultiState& s);
double oracle_evaluate(const Instance& instance, const Policy& policy, const MultiState& s);

/// True iff Q^pi passes the transience test.
bool policy_transient(const ProductModel& model, const Policy& policy);

enum class OracleMethod { ValueIteration, PolicyIteration };

struct OracleOptimum {
  /// Largest expected utility over stationary nonrandomized policies.
  Vector values;
  Policy policy;
  std::size_t iterations = 0;
};

/// Optimal values on the product space. Value iteration runs to a relative
/// sup-norm change of 1e-12; the greedy policy is then evaluated exactly and
/// polished by policy improvement.
OracleOptimum oracle_optimal(const ProductModel& model, OracleMethod method = OracleMethod::ValueIteration);

/// Instance whose chains carry finalized data.
Instance finalized_instance(const Instance& instance, const FinalizedModel& finalized);

struct OracleProgramResult {
  bool feasible = false;
  double objective = 0.0;
  /// Labelings (or one representative per distinct policy) with positive weight.
  std::vector<std::pair<Labeling, double>> support;
  std::size_t columns = 0;
};

/// Master program solved exactly over every labeling's column (|N| <= max_states).
OracleProgramResult oracle_constrained(const ConstrainedProgram& program, std::size_t max_states = 6);

/// The same program over every stationary nonrandomized policy (|K|^|S| <= max_policies).
OracleProgramResult oracle_all_policies(const ConstrainedProgram& program, std::size_t max_policies = 1u << 16);

}  // namespace bandit
