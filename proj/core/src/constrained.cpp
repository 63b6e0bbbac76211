#include "bandit/constrained.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/LU>

#include "bandit/errors.hpp"
#include "bandit/evaluator.hpp"
#include "bandit/optimizer.hpp"

namespace bandit {

namespace {

constexpr double kPivotEps = 1e-12;
constexpr double kFeasibilityTolerance = 1e-9;
constexpr double kSupportEps = 1e-12;

Pricing price_rewards(const ConstrainedProgram& program, const Vector& rewards, OpCounter& counter) {
  const Instance priced = program.instance.with_rewards(rewards);
  OptimalLabeling best = optimize(priced, counter);
  FinalizedModel finalized = finalize(priced, best.labeling, counter);
  EvalResult eval = evaluate(priced, best.labeling, program.start, finalized, counter);
  counter += eval.extra_ops;
  return Pricing{std::move(best.labeling), eval.value};
}

std::string describe_labeling(const Labeling& labeling) {
  std::ostringstream out;
  out << "rule[";
  for (std::size_t g = 0; g < labeling.size(); ++g) out << (g ? "," : "") << labeling.label(g);
  out << "]";
  return out.str();
}

// A column of the master program: either a priority rule (values V_0..V_W)
// or the surplus variable of constraint w (1-based).
struct Column {
  std::optional<Labeling> labeling;
  Vector values;
  std::size_t surplus = 0;
  std::size_t index = 0;  // stable id for Bland's rule

  bool is_rule() const { return labeling.has_value(); }
  std::string name() const {
    return is_rule() ? describe_labeling(*labeling) : "surplus_" + std::to_string(surplus);
  }
};

class Master {
 public:
  Master(const ConstrainedProgram& program, const SolveOptions& options, std::vector<IterationLog>& log,
         OpCounter& ops, std::size_t limit)
      : program_(program), options_(options), log_(log), ops_(ops), limit_(limit) {}

  // Rows: convexity, then the active constraints 1..active.
  Vector coefficients(const Column& c, std::size_t active) const {
    Vector a = Vector::Zero(static_cast<Eigen::Index>(active + 1));
    if (c.is_rule()) {
      a(0) = 1.0;
      for (std::size_t w = 1; w <= active; ++w) a(static_cast<Eigen::Index>(w)) = c.values(static_cast<Eigen::Index>(w));
    } else {
      a(static_cast<Eigen::Index>(c.surplus)) = -1.0;
    }
    return a;
  }

  double cost(const Column& c, std::size_t type) const {
    return c.is_rule() ? c.values(static_cast<Eigen::Index>(type)) : 0.0;
  }

  void start(std::vector<Column> basis, std::size_t active) {
    basis_ = std::move(basis);
    active_ = active;
    refactor();
  }

  // Adds constraint `w` = active + 1 with its surplus basic.
  void bring_in_constraint() {
    ++active_;
    Column s;
    s.surplus = active_;
    s.index = active_ - 1;
    basis_.push_back(std::move(s));
    refactor();
  }

  // Column generation on objective `type`. Returns the final objective.
  // With a target, stops as soon as the objective reaches it.
  double run(std::size_t type, const std::string& phase, std::optional<double> target) {
    const auto m = static_cast<Eigen::Index>(active_ + 1);
    for (;;) {
      Vector x = solution();
      double objective = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) objective += cost(basis_[static_cast<std::size_t>(i)], type) * x(i);
      if (target && objective >= *target) return objective;

      Eigen::RowVectorXd cb(m);
      for (Eigen::Index i = 0; i < m; ++i) cb(i) = cost(basis_[static_cast<std::size_t>(i)], type);
      const Eigen::RowVectorXd pi = cb * inverse_;
      const double y0 = pi(0);
      std::vector<double> y(active_);
      for (std::size_t w = 1; w <= active_; ++w) y[w - 1] = -pi(static_cast<Eigen::Index>(w));
      const double tol = options_.optimality_tolerance * (1.0 + std::abs(y0));

      IterationLog entry;
      entry.phase = phase;
      entry.objective_type = type;
      entry.multipliers.push_back(y0);
      entry.multipliers.insert(entry.multipliers.end(), y.begin(), y.end());

      // Most positive surplus reduced cost is -y_w.
      std::size_t best_surplus = 0;
      double best_surplus_rc = tol;
      for (std::size_t w = 1; w <= active_; ++w)
        if (-y[w - 1] > best_surplus_rc && !surplus_basic(w)) {
          best_surplus_rc = -y[w - 1];
          best_surplus = w;
        }

      Column entering;
      if (best_surplus != 0) {
        entering.surplus = best_surplus;
        entering.index = best_surplus - 1;
        entry.priced_value = std::nan("");
      } else {
        Vector rewards = program_.rewards[type];
        for (std::size_t w = 1; w <= active_; ++w) rewards += std::max(0.0, y[w - 1]) * program_.rewards[w];
        Pricing priced = price_rewards(program_, rewards, ops_);
        entry.priced_value = priced.value;
        last_certificate_ = priced.value;
        last_multipliers_ = entry.multipliers;
        if (priced.value - y0 <= tol) {
          log_.push_back(std::move(entry));
          return objective;
        }
        const bool duplicate = std::any_of(basis_.begin(), basis_.end(), [&](const Column& c) {
          return c.is_rule() && *c.labeling == priced.labeling;
        });
        if (duplicate) {
          log_.push_back(std::move(entry));
          return objective;
        }
        entering = rule_column_for(priced.labeling);
      }

      if (++iterations_ > limit_) throw IterationLimit("simplex iteration limit reached");

      const Vector d = inverse_ * coefficients(entering, active_);
      std::optional<double> min_ratio;
      for (Eigen::Index i = 0; i < m; ++i)
        if (d(i) > kPivotEps) {
          const double ratio = std::max(0.0, x(i)) / d(i);
          if (!min_ratio || ratio < *min_ratio) min_ratio = ratio;
        }
      std::optional<Eigen::Index> leave;
      if (min_ratio) {
        const double slack = 1e-12 * (1.0 + *min_ratio);
        for (Eigen::Index i = 0; i < m; ++i) {
          if (d(i) <= kPivotEps || std::max(0.0, x(i)) / d(i) > *min_ratio + slack) continue;
          if (!leave || basis_[static_cast<std::size_t>(i)].index < basis_[static_cast<std::size_t>(*leave)].index)
            leave = i;
        }
      }
      if (!leave) throw Error("master program unbounded; entering column has no positive entry");

      entry.entering = entering.name();
      entry.leaving = basis_[static_cast<std::size_t>(*leave)].name();
      log_.push_back(std::move(entry));
      pivot(*leave, d, std::move(entering));
    }
  }

  Vector solution() const { return inverse_ * rhs(); }
  const std::vector<Column>& basis() const { return basis_; }
  double certificate() const { return last_certificate_; }
  const std::vector<double>& multipliers() const { return last_multipliers_; }

 private:
  Column rule_column_for(const Labeling& labeling) {
    Column c;
    Vector col = column_of(program_, labeling, ops_);
    // col = (V_0; 1; V_1..V_W)
    c.values.resize(static_cast<Eigen::Index>(program_.num_constraints() + 1));
    c.values(0) = col(0);
    for (std::size_t w = 1; w <= program_.num_constraints(); ++w)
      c.values(static_cast<Eigen::Index>(w)) = col(static_cast<Eigen::Index>(w + 1));
    c.labeling = labeling;
    c.index = program_.num_constraints() + next_rule_++;
    return c;
  }

  bool surplus_basic(std::size_t w) const {
    return std::any_of(basis_.begin(), basis_.end(), [&](const Column& c) { return !c.is_rule() && c.surplus == w; });
  }

  Vector rhs() const {
    Vector b(static_cast<Eigen::Index>(active_ + 1));
    b(0) = 1.0;
    for (std::size_t w = 1; w <= active_; ++w) b(static_cast<Eigen::Index>(w)) = program_.bounds[w - 1];
    return b;
  }

  void refactor() {
    const auto m = static_cast<Eigen::Index>(active_ + 1);
    Matrix b(m, m);
    for (Eigen::Index j = 0; j < m; ++j) b.col(j) = coefficients(basis_[static_cast<std::size_t>(j)], active_);
    Eigen::FullPivLU<Matrix> lu(b);
    if (!lu.isInvertible()) throw Error("master basis became singular");
    inverse_ = lu.inverse();
    since_refactor_ = 0;
  }

  // Product-form update of the basis inverse.
  void pivot(Eigen::Index r, const Vector& d, Column entering) {
    basis_[static_cast<std::size_t>(r)] = std::move(entering);
    if (++since_refactor_ >= options_.refactor_interval) {
      refactor();
      return;
    }
    const Eigen::RowVectorXd pivot_row = inverse_.row(r) / d(r);
    for (Eigen::Index i = 0; i < inverse_.rows(); ++i) {
      if (i == r) continue;
      inverse_.row(i) -= d(i) * pivot_row;
    }
    inverse_.row(r) = pivot_row;
  }

  const ConstrainedProgram& program_;
  const SolveOptions& options_;
  std::vector<IterationLog>& log_;
  OpCounter& ops_;
  std::size_t limit_;
  std::size_t iterations_ = 0;
  std::size_t next_rule_ = 0;
  std::size_t active_ = 0;
  std::vector<Column> basis_;
  Matrix inverse_;
  std::size_t since_refactor_ = 0;
  double last_certificate_ = 0.0;
  std::vector<double> last_multipliers_;

 public:
  Column initial_rule(std::size_t type) {
    Pricing p = price_rewards(program_, program_.rewards[type], ops_);
    return rule_column_for(p.labeling);
  }
};

}  // namespace

void check_program(const ConstrainedProgram& program) {
  const Instance& inst = program.instance;
  if (inst.hypothesis() != Hypothesis::RiskNeutral)
    throw RoadblockError("constrained problems require linear utility (hypothesis RN)");
  if (program.rewards.size() != program.bounds.size() + 1)
    throw InvalidInput("expected " + std::to_string(program.bounds.size() + 1) + " reward vectors for " +
                       std::to_string(program.bounds.size()) + " bounds");
  for (std::size_t w = 0; w < program.rewards.size(); ++w) {
    if (static_cast<std::size_t>(program.rewards[w].size()) != inst.num_states())
      throw InvalidInput("reward vector " + std::to_string(w) + " must have one entry per state");
    if (!program.rewards[w].allFinite()) throw InvalidInput("reward vector " + std::to_string(w) + " is not finite");
  }
  for (std::size_t w = 0; w < program.bounds.size(); ++w)
    if (!std::isfinite(program.bounds[w])) throw InvalidInput("bound " + std::to_string(w + 1) + " is not finite");
  if (program.start.size() != inst.num_bandits()) throw InvalidInput("start multi-state must name one state per bandit");
  for (std::size_t k = 0; k < inst.num_bandits(); ++k)
    if (program.start[k] >= inst.chain(k).size())
      throw InvalidInput("start state of bandit " + std::to_string(k) + " out of range");
  require_valid(inst);
}

Pricing price(const ConstrainedProgram& program, std::span<const double> multipliers, OpCounter& counter) {
  if (multipliers.size() != program.num_constraints())
    throw InvalidInput("one multiplier per constraint is required");
  Vector rewards = program.rewards.at(0);
  for (std::size_t w = 0; w < multipliers.size(); ++w) {
    if (multipliers[w] < 0.0) throw InvalidInput("multipliers must be nonnegative");
    rewards += multipliers[w] * program.rewards[w + 1];
  }
  return price_rewards(program, rewards, counter);
}

Vector column_of(const ConstrainedProgram& program, const Labeling& labeling, OpCounter& counter) {
  const EvalResult eval = evaluate_multi_reward(program.instance, labeling, program.start, program.rewards, counter);
  counter += eval.extra_ops;
  const auto types = eval.values.size();
  Vector column(types + 1);
  column(0) = eval.values(0);
  column(1) = 1.0;
  column.tail(types - 1) = eval.values.tail(types - 1);
  return column;
}

SolveResult solve(const ConstrainedProgram& program, const SolveOptions& options) {
  check_program(program);
  const std::size_t w_count = program.num_constraints();
  const std::size_t limit = options.iteration_limit.value_or(10 * (w_count + 1) * program.instance.num_states());

  std::vector<IterationLog> log;
  OpCounter ops;
  Master master(program, options, log, ops, limit);

  for (std::size_t n = 1; n <= w_count; ++n) {
    if (n == 1) master.start({master.initial_rule(1)}, 0);
    const double bound = program.bounds[n - 1];
    const double best = master.run(n, "phase1", bound);
    if (best < bound - kFeasibilityTolerance * (1.0 + std::abs(bound))) {
      Infeasible result;
      result.constraint = n;
      result.best_value = best;
      result.bound = bound;
      result.log = std::move(log);
      result.ops = ops;
      return result;
    }
    master.bring_in_constraint();
  }
  if (w_count == 0) master.start({master.initial_rule(0)}, 0);
  const double objective = master.run(0, "phase2", std::nullopt);

  MixedSolution solution;
  solution.objective = objective;
  const Vector x = master.solution();
  solution.achieved = Vector::Zero(static_cast<Eigen::Index>(w_count));
  double total = 0.0;
  for (std::size_t i = 0; i < master.basis().size(); ++i) {
    const auto& c = master.basis()[i];
    if (!c.is_rule()) continue;
    const double weight = x(static_cast<Eigen::Index>(i));
    if (weight <= kSupportEps) continue;
    total += weight;
    solution.support.push_back(SupportEntry{*c.labeling, weight, c.values});
  }
  for (auto& entry : solution.support) {
    entry.weight /= total;
    for (std::size_t w = 1; w <= w_count; ++w)
      solution.achieved(static_cast<Eigen::Index>(w - 1)) += entry.weight * entry.values(static_cast<Eigen::Index>(w));
  }
  solution.objective = 0.0;
  for (const auto& entry : solution.support) solution.objective += entry.weight * entry.values(0);
  const auto& y = master.multipliers();
  solution.multipliers = Eigen::Map<const Vector>(y.data(), static_cast<Eigen::Index>(y.size()));
  solution.certificate = master.certificate();
  solution.log = std::move(log);
  solution.ops = ops;
  return solution;
}

}  // namespace bandit
