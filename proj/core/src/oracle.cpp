#include "bandit/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <Eigen/LU>

#include "bandit/dense_lp.hpp"
#include "bandit/errors.hpp"

namespace bandit {

namespace {

constexpr double kResidualTolerance = 1e-10;
constexpr double kValueIterationTolerance = 1e-12;
constexpr std::size_t kValueIterationCap = 1'000'000;
constexpr double kImprovementTolerance = 1e-12;
constexpr double kWeightEps = 1e-12;

double sup_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

ProductModel::ProductModel(const Instance& instance, std::size_t cap)
    : instance_(&instance), space_(instance, cap), rewards_(instance.rewards()) {}

Matrix ProductModel::transition_matrix(const Policy& policy) const {
  const auto n = static_cast<Eigen::Index>(size());
  if (policy.size() != size()) throw InvalidInput("policy must name one bandit per multi-state");
  Matrix q = Matrix::Zero(n, n);
  for (std::size_t s = 0; s < size(); ++s) {
    const std::size_t k = policy[s];
    const MultiState state = space_.at(s);
    const Matrix& rates = instance_->chain(k).rates();
    const std::size_t i = state[k];
    const std::size_t base = s - i * space_.stride(k);
    for (std::size_t j = 0; j < instance_->chain(k).size(); ++j) {
      const double rate = rates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (rate != 0.0) q(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(base + j * space_.stride(k))) = rate;
    }
  }
  return q;
}

Vector ProductModel::reward_vector(const Policy& policy, const Vector& global_rewards) const {
  if (policy.size() != size()) throw InvalidInput("policy must name one bandit per multi-state");
  Vector r(static_cast<Eigen::Index>(size()));
  for (std::size_t s = 0; s < size(); ++s) {
    const std::size_t k = policy[s];
    const MultiState state = space_.at(s);
    r(static_cast<Eigen::Index>(s)) = global_rewards(static_cast<Eigen::Index>(instance_->global_id(k, state[k])));
  }
  return r;
}

Vector ProductModel::reward_vector(const Policy& policy) const { return reward_vector(policy, rewards_); }

double ProductModel::local_utility(std::size_t s, std::size_t k, const Vector& v) const {
  const MultiState state = space_.at(s);
  const std::size_t i = state[k];
  const Matrix& rates = instance_->chain(k).rates();
  const std::size_t base = s - i * space_.stride(k);
  double total = rewards_(static_cast<Eigen::Index>(instance_->global_id(k, i)));
  for (std::size_t j = 0; j < instance_->chain(k).size(); ++j)
    total += rates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
             v(static_cast<Eigen::Index>(base + j * space_.stride(k)));
  return total;
}

Policy ProductModel::priority_policy(const Labeling& labeling) const {
  if (labeling.size() != instance_->num_states()) throw InvalidInput("labeling size does not match the instance");
  Policy policy(size());
  for (std::size_t s = 0; s < size(); ++s) {
    const MultiState state = space_.at(s);
    std::size_t best = 0;
    std::size_t best_label = labeling.size() + 1;
    for (std::size_t k = 0; k < state.size(); ++k) {
      const std::size_t l = labeling.label(instance_->global_id(k, state[k]));
      if (l < best_label) {
        best_label = l;
        best = k;
      }
    }
    policy[s] = best;
  }
  return policy;
}

Matrix oracle_values(const ProductModel& model, const Policy& policy, std::span<const Vector> rewards) {
  const auto n = static_cast<Eigen::Index>(model.size());
  const Matrix system = Matrix::Identity(n, n) - model.transition_matrix(policy);
  Matrix rhs(n, static_cast<Eigen::Index>(rewards.size()));
  for (std::size_t w = 0; w < rewards.size(); ++w)
    rhs.col(static_cast<Eigen::Index>(w)) = model.reward_vector(policy, rewards[w]);
  Eigen::PartialPivLU<Matrix> lu(system);
  const Matrix v = lu.solve(rhs);
  for (Eigen::Index w = 0; w < v.cols(); ++w) {
    const Vector col = v.col(w);
    const double residual = sup_norm(system * col - rhs.col(w));
    if (!col.allFinite() || residual > kResidualTolerance * (1.0 + sup_norm(col)))
      throw Error("policy evaluation failed: I - Q is singular or ill-conditioned (Q not transient?)");
  }
  return v;
}

Vector oracle_values(const ProductModel& model, const Policy& policy) {
  const Vector r = model.instance().rewards();
  return oracle_values(model, policy, std::span<const Vector>(&r, 1)).col(0);
}

double oracle_evaluate(const ProductModel& model, const Policy& policy, const MultiState& s) {
  return oracle_values(model, policy)(static_cast<Eigen::Index>(model.space().index_of(s)));
}

double oracle_evaluate(const Instance& instance, const Policy& policy, const MultiState& s) {
  return oracle_evaluate(ProductModel(instance), policy, s);
}

bool policy_transient(const ProductModel& model, const Policy& policy) {
  return is_transient(model.transition_matrix(policy));
}

namespace {

Policy greedy(const ProductModel& model, const Vector& v, const Policy* incumbent) {
  Policy policy(model.size());
  const std::size_t bandits = model.instance().num_bandits();
  for (std::size_t s = 0; s < model.size(); ++s) {
    std::size_t best = incumbent ? (*incumbent)[s] : 0;
    double best_value = model.local_utility(s, best, v);
    for (std::size_t k = 0; k < bandits; ++k) {
      const double h = model.local_utility(s, k, v);
      if (h > best_value + kImprovementTolerance * (1.0 + std::abs(best_value))) {
        best_value = h;
        best = k;
      }
    }
    policy[s] = best;
  }
  return policy;
}

// Policy improvement until no state gains; returns the number of rounds.
std::size_t improve(const ProductModel& model, Policy& policy, Vector& values) {
  std::size_t rounds = 0;
  for (;;) {
    values = oracle_values(model, policy);
    Policy next = greedy(model, values, &policy);
    ++rounds;
    if (next == policy) return rounds;
    policy = std::move(next);
  }
}

}  // namespace

OracleOptimum oracle_optimal(const ProductModel& model, OracleMethod method) {
  OracleOptimum result;
  if (method == OracleMethod::PolicyIteration) {
    result.policy.assign(model.size(), 0);
    result.iterations = improve(model, result.policy, result.values);
    return result;
  }
  const std::size_t bandits = model.instance().num_bandits();
  Vector v = Vector::Zero(static_cast<Eigen::Index>(model.size()));
  Vector next(v.size());
  std::size_t it = 0;
  for (;; ++it) {
    if (it >= kValueIterationCap) throw IterationLimit("value iteration did not converge");
    for (std::size_t s = 0; s < model.size(); ++s) {
      double best = model.local_utility(s, 0, v);
      for (std::size_t k = 1; k < bandits; ++k) best = std::max(best, model.local_utility(s, k, v));
      next(static_cast<Eigen::Index>(s)) = best;
    }
    const double change = sup_norm(next - v);
    v.swap(next);
    if (change <= kValueIterationTolerance * std::max(1.0, sup_norm(v))) break;
  }
  result.policy = greedy(model, v, nullptr);
  result.iterations = it + 1 + improve(model, result.policy, result.values);
  return result;
}

Instance finalized_instance(const Instance& instance, const FinalizedModel& finalized) {
  if (finalized.bandits.size() != instance.num_bandits())
    throw LabelingMismatch("finalized data covers a different number of bandits");
  std::vector<BanditChain> chains;
  chains.reserve(instance.num_bandits());
  for (const auto& b : finalized.bandits) chains.emplace_back(b.rewards(0), b.q_tilde);
  return Instance(std::move(chains), instance.hypothesis());
}

namespace {

OracleProgramResult solve_columns(const ConstrainedProgram& program, const ProductModel& model,
                                  const std::vector<Policy>& policies, const std::vector<Labeling>& representatives) {
  const std::size_t w_count = program.num_constraints();
  const auto rows = static_cast<Eigen::Index>(w_count + 1);
  const auto cols = static_cast<Eigen::Index>(policies.size());
  const auto start = static_cast<Eigen::Index>(model.space().index_of(program.start));
  LpProblem lp;
  lp.a = Matrix::Zero(rows, cols);
  lp.b = Vector::Zero(rows);
  lp.c = Vector::Zero(cols);
  lp.sense.assign(static_cast<std::size_t>(rows), RowSense::AtLeast);
  lp.sense[0] = RowSense::Equal;
  lp.b(0) = 1.0;
  for (std::size_t w = 1; w <= w_count; ++w) lp.b(static_cast<Eigen::Index>(w)) = program.bounds[w - 1];
  for (Eigen::Index j = 0; j < cols; ++j) {
    const Matrix v = oracle_values(model, policies[static_cast<std::size_t>(j)], program.rewards);
    lp.c(j) = v(start, 0);
    lp.a(0, j) = 1.0;
    for (Eigen::Index w = 1; w < rows; ++w) lp.a(w, j) = v(start, w);
  }
  const LpSolution sol = solve_dense_lp(lp);
  OracleProgramResult result;
  result.columns = policies.size();
  if (sol.status != LpStatus::Optimal) return result;
  result.feasible = true;
  result.objective = sol.objective;
  if (!representatives.empty())
    for (Eigen::Index j = 0; j < cols; ++j)
      if (sol.x(j) > kWeightEps) result.support.emplace_back(representatives[static_cast<std::size_t>(j)], sol.x(j));
  return result;
}

}  // namespace

OracleProgramResult oracle_constrained(const ConstrainedProgram& program, std::size_t max_states) {
  check_program(program);
  const std::size_t n = program.instance.num_states();
  if (n > max_states)
    throw CapExceeded("labeling enumeration needs at most " + std::to_string(max_states) + " states, got " +
                      std::to_string(n));
  const ProductModel model(program.instance);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::map<Policy, std::size_t> seen;
  std::vector<Policy> policies;
  std::vector<Labeling> representatives;
  do {
    Labeling labeling = Labeling::from_order(order);
    Policy policy = model.priority_policy(labeling);
    if (seen.emplace(policy, policies.size()).second) {
      policies.push_back(std::move(policy));
      representatives.push_back(std::move(labeling));
    }
  } while (std::next_permutation(order.begin(), order.end()));
  return solve_columns(program, model, policies, representatives);
}

OracleProgramResult oracle_all_policies(const ConstrainedProgram& program, std::size_t max_policies) {
  check_program(program);
  const ProductModel model(program.instance);
  const std::size_t k = program.instance.num_bandits();
  double count = std::pow(static_cast<double>(k), static_cast<double>(model.size()));
  if (count > static_cast<double>(max_policies))
    throw CapExceeded("policy enumeration would visit " + std::to_string(count) + " policies");
  std::vector<Policy> policies;
  Policy policy(model.size(), 0);
  for (;;) {
    policies.push_back(policy);
    std::size_t s = 0;
    while (s < policy.size() && ++policy[s] == k) policy[s++] = 0;
    if (s == policy.size()) break;
  }
  return solve_columns(program, model, policies, {});
}

}  // namespace bandit
