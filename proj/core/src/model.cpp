#include "bandit/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "bandit/errors.hpp"

namespace bandit {

namespace {

std::string describe_state(std::size_t bandit, std::size_t local) {
  std::ostringstream os;
  os << "bandit " << bandit << " state " << local;
  return os.str();
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace

std::string_view to_string(Hypothesis h) {
  switch (h) {
    case Hypothesis::RiskNeutral:
      return "RN";
    case Hypothesis::RiskAverse:
      return "RA";
    case Hypothesis::RiskSeeking:
      return "RS";
  }
  return "?";
}

std::optional<Hypothesis> parse_hypothesis(std::string_view s) {
  if (s == "RN") return Hypothesis::RiskNeutral;
  if (s == "RA") return Hypothesis::RiskAverse;
  if (s == "RS") return Hypothesis::RiskSeeking;
  return std::nullopt;
}

double RawBandit::termination_probability(std::size_t i) const {
  const double rest = 1.0 - p.row(static_cast<Eigen::Index>(i)).sum();
  return rest < 0.0 ? 0.0 : rest;
}

Hypothesis natural_hypothesis(const UtilitySpec& u) {
  if (std::holds_alternative<RiskAverseUtility>(u)) return Hypothesis::RiskAverse;
  if (std::holds_alternative<RiskSeekingUtility>(u)) return Hypothesis::RiskSeeking;
  return Hypothesis::RiskNeutral;
}

Vector row_sums(const Matrix& q) {
  Vector a(q.rows());
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < q.cols(); ++j) s += q(i, j);
    a(i) = s;
  }
  return a;
}

BanditChain::BanditChain(Vector rewards, Matrix rates)
    : r_(std::move(rewards)), q_(std::move(rates)) {
  if (q_.rows() != q_.cols()) throw InvalidInput("transition-rate matrix must be square");
  if (q_.rows() != r_.size()) throw InvalidInput("reward vector length must match the number of states");
  if (r_.size() == 0) throw InvalidInput("a chain needs at least one state");
  if (!r_.allFinite() || !all_finite(q_)) throw InvalidInput("chain data must be finite");
  a_ = row_sums(q_);
}

BanditChain build_chain(const RawBandit& raw, const UtilitySpec& utility) {
  const auto n = raw.p.rows();
  if (n == 0) throw InvalidInput("a chain needs at least one state");
  if (raw.p.cols() != n) throw InvalidInput("p must be square");
  if (raw.x.rows() != n || raw.x.cols() != n) throw InvalidInput("x must have the same shape as p");
  if (raw.x0.size() != n) throw InvalidInput("x0 must have one entry per state");
  if (!all_finite(raw.p) || !all_finite(raw.x) || !raw.x0.allFinite())
    throw InvalidInput("raw data must be finite");
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (raw.p(i, j) < 0.0) {
        throw InvalidInput("negative transition probability at row " + std::to_string(i) +
                           ", column " + std::to_string(j));
      }
      sum += raw.p(i, j);
    }
    if (sum > 1.0 + kRowSumTolerance)
      throw InvalidInput("transition probabilities of row " + std::to_string(i) + " sum above 1");
  }

  Vector r(n);
  Matrix q(n, n);
  if (const auto* lin = std::get_if<LinearUtility>(&utility)) {
    double c = 1.0;
    if (lin->discount) {
      c = *lin->discount;
      if (!(c > 0.0 && c <= 1.0)) throw InvalidInput("discount factor must lie in (0, 1]");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      double ri = raw.termination_probability(static_cast<std::size_t>(i)) * raw.x0(i);
      for (Eigen::Index j = 0; j < n; ++j) {
        ri += raw.p(i, j) * raw.x(i, j);
        q(i, j) = c * raw.p(i, j);
      }
      r(i) = ri;
    }
  } else {
    const bool averse = std::holds_alternative<RiskAverseUtility>(utility);
    const double lambda = averse ? std::get<RiskAverseUtility>(utility).lambda
                                 : std::get<RiskSeekingUtility>(utility).lambda;
    if (!(lambda > 0.0) || !std::isfinite(lambda))
      throw InvalidInput("risk coefficient lambda must be positive");
    const double sign = averse ? -1.0 : 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p0 = raw.termination_probability(static_cast<std::size_t>(i));
      r(i) = sign * p0 * std::exp(sign * lambda * raw.x0(i));
      for (Eigen::Index j = 0; j < n; ++j) q(i, j) = raw.p(i, j) * std::exp(sign * lambda * raw.x(i, j));
    }
  }
  return BanditChain(std::move(r), std::move(q));
}

bool is_transient(const Matrix& q, double tol) {
  const auto n = q.rows();
  if (n == 0) return true;
  const Matrix system = Matrix::Identity(n, n) - q;
  Eigen::FullPivLU<Matrix> lu(system);
  if (!lu.isInvertible()) return false;
  const Vector x = lu.solve(Vector::Ones(n));
  if (!x.allFinite()) return false;
  const double residual = (system * x - Vector::Ones(n)).lpNorm<Eigen::Infinity>();
  if (residual > 1e-8 * (1.0 + x.lpNorm<Eigen::Infinity>())) return false;
  return (x.array() > tol).all();
}

Instance::Instance(std::vector<BanditChain> chains, Hypothesis hypothesis)
    : chains_(std::move(chains)), hypothesis_(hypothesis) {
  if (chains_.empty()) throw InvalidInput("an instance needs at least one bandit");
  offsets_.reserve(chains_.size());
  for (std::size_t k = 0; k < chains_.size(); ++k) {
    offsets_.push_back(total_states_);
    total_states_ += chains_[k].size();
    owner_.insert(owner_.end(), chains_[k].size(), k);
  }
}

std::size_t Instance::global_id(std::size_t bandit, std::size_t local) const {
  if (bandit >= chains_.size() || local >= chains_[bandit].size())
    throw InvalidInput("state " + describe_state(bandit, local) + " does not exist");
  return offsets_[bandit] + local;
}

StateId Instance::state(std::size_t global) const {
  if (global >= total_states_) throw InvalidInput("global state id " + std::to_string(global) + " out of range");
  const std::size_t k = owner_[global];
  return StateId{k, global - offsets_[k], global};
}

Vector Instance::rewards() const {
  Vector r(static_cast<Eigen::Index>(total_states_));
  for (std::size_t k = 0; k < chains_.size(); ++k)
    r.segment(static_cast<Eigen::Index>(offsets_[k]), chains_[k].rewards().size()) = chains_[k].rewards();
  return r;
}

Instance Instance::with_rewards(const Vector& global_rewards) const {
  if (static_cast<std::size_t>(global_rewards.size()) != total_states_)
    throw InvalidInput("reward vector must have one entry per state");
  std::vector<BanditChain> chains;
  chains.reserve(chains_.size());
  for (std::size_t k = 0; k < chains_.size(); ++k) {
    const auto n = static_cast<Eigen::Index>(chains_[k].size());
    chains.emplace_back(global_rewards.segment(static_cast<Eigen::Index>(offsets_[k]), n),
                        chains_[k].rates());
  }
  return Instance(std::move(chains), hypothesis_);
}

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::NonnegativeRates:
      return "nonnegative_rates";
    case Condition::Transient:
      return "transient";
    case Condition::Substochastic:
      return "substochastic";
    case Condition::NonpositiveRewards:
      return "nonpositive_rewards";
    case Condition::NonnegativeRewards:
      return "nonnegative_rewards";
  }
  return "?";
}

bool ChainConditions::holds(Condition c) const {
  switch (c) {
    case Condition::NonnegativeRates:
      return nonnegative_rates;
    case Condition::Transient:
      return transient;
    case Condition::Substochastic:
      return substochastic;
    case Condition::NonpositiveRewards:
      return nonpositive_rewards;
    case Condition::NonnegativeRewards:
      return nonnegative_rewards;
  }
  return false;
}

std::vector<Condition> required_conditions(Hypothesis h) {
  std::vector<Condition> out{Condition::NonnegativeRates, Condition::Transient};
  switch (h) {
    case Hypothesis::RiskNeutral:
      out.push_back(Condition::Substochastic);
      break;
    case Hypothesis::RiskAverse:
      out.push_back(Condition::NonpositiveRewards);
      break;
    case Hypothesis::RiskSeeking:
      out.push_back(Condition::NonnegativeRewards);
      break;
  }
  return out;
}

ChainConditions check_chain(const BanditChain& chain, double transience_tol) {
  ChainConditions c;
  const Matrix& q = chain.rates();
  const Vector& r = chain.rewards();
  c.nonnegative_rates = (q.array() >= 0.0).all();
  c.transient = c.nonnegative_rates && is_transient(q, transience_tol);
  c.substochastic = c.nonnegative_rates && (chain.amplification().array() <= 1.0 + kRowSumTolerance).all();
  c.nonpositive_rewards = (r.array() <= 0.0).all();
  c.nonnegative_rewards = (r.array() >= 0.0).all();
  return c;
}

namespace {

// First offending row/state for a per-state condition; nullopt for chain-level ones.
std::optional<std::size_t> offending_state(const BanditChain& chain, Condition c) {
  const Matrix& q = chain.rates();
  const Vector& r = chain.rewards();
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    bool bad = false;
    switch (c) {
      case Condition::NonnegativeRates:
        bad = (q.row(i).array() < 0.0).any();
        break;
      case Condition::Substochastic:
        bad = chain.amplification()(i) > 1.0 + kRowSumTolerance;
        break;
      case Condition::NonpositiveRewards:
        bad = r(i) > 0.0;
        break;
      case Condition::NonnegativeRewards:
        bad = r(i) < 0.0;
        break;
      case Condition::Transient:
        return std::nullopt;
    }
    if (bad) return static_cast<std::size_t>(i);
  }
  return std::nullopt;
}

}  // namespace

ValidationReport validate(const Instance& instance, double transience_tol) {
  ValidationReport report;
  report.declared = instance.hypothesis();
  const auto required = required_conditions(instance.hypothesis());
  for (std::size_t k = 0; k < instance.num_bandits(); ++k) {
    const auto& chain = instance.chain(k);
    report.chains.push_back(check_chain(chain, transience_tol));
    if (report.violation) continue;
    for (Condition c : required) {
      if (report.chains.back().holds(c)) continue;
      Violation v{c, k, offending_state(chain, c), {}};
      std::ostringstream os;
      os << "bandit " << k;
      if (v.local_state) os << " state " << *v.local_state;
      os << " violates " << to_string(c);
      v.detail = os.str();
      report.violation = std::move(v);
      break;
    }
  }
  return report;
}

void require_valid(const Instance& instance) {
  const auto report = validate(instance);
  if (report.ok()) return;
  const auto& v = *report.violation;
  throw HypothesisViolation(v.detail, v.bandit, v.local_state);
}

MultiStateSpace::MultiStateSpace(const Instance& instance, std::size_t cap) {
  radix_.reserve(instance.num_bandits());
  size_ = 1;
  for (const auto& chain : instance.chains()) {
    radix_.push_back(chain.size());
    if (size_ > cap / chain.size())
      throw CapExceeded("multi-state space exceeds the cap of " + std::to_string(cap));
    size_ *= chain.size();
  }
  if (size_ > cap) throw CapExceeded("multi-state space exceeds the cap of " + std::to_string(cap));
  stride_.assign(radix_.size(), 1);
  for (std::size_t k = radix_.size(); k-- > 1;) stride_[k - 1] = stride_[k] * radix_[k];
}

MultiState MultiStateSpace::at(std::size_t index) const {
  if (index >= size_) throw InvalidInput("multi-state index out of range");
  MultiState s(radix_.size());
  for (std::size_t k = 0; k < radix_.size(); ++k) {
    s[k] = index / stride_[k];
    index %= stride_[k];
  }
  return s;
}

std::size_t MultiStateSpace::index_of(const MultiState& s) const {
  if (s.size() != radix_.size()) throw InvalidInput("multi-state must name one state per bandit");
  std::size_t index = 0;
  for (std::size_t k = 0; k < radix_.size(); ++k) {
    if (s[k] >= radix_[k]) throw InvalidInput("multi-state names a missing state of bandit " + std::to_string(k));
    index += s[k] * stride_[k];
  }
  return index;
}

}  // namespace bandit
