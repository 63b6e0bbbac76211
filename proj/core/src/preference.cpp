#include "bandit/preference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bandit/errors.hpp"

namespace bandit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRatioTolerance = 1e-9;

bool is_zero(double x) { return std::abs(x) <= kCategoryTolerance; }

bool approx_equal(double a, double b) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= kRatioTolerance * std::max({1.0, std::abs(a), std::abs(b)});
}

bool approx_ge(double a, double b) {
  if (a >= b) return true;
  if (std::isinf(a) || std::isinf(b)) return false;
  return a >= b - kRatioTolerance * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

StateStats categorize_slack(double r, double slack, Hypothesis h, OpCounter& counter) {
  StateStats s{r, slack, Category::Ratio, 0.0};
  switch (h) {
    case Hypothesis::RiskNeutral:
      if (slack < -kCategoryTolerance) throw InvalidInput("amplification above 1 is outside the RN domain");
      if (is_zero(slack)) {
        s.category = r >= 0.0 ? Category::First : Category::Last;
      } else {
        s.rho = r / slack;
        ++counter.divs;
      }
      break;
    case Hypothesis::RiskAverse:
      if (r > kCategoryTolerance) throw InvalidInput("positive reward is outside the RA domain");
      if (is_zero(r)) {
        s.category = slack >= -kCategoryTolerance ? Category::First : Category::Last;
      } else {
        s.rho = (0.0 - slack) / r;
        ++counter.divs;
      }
      break;
    case Hypothesis::RiskSeeking:
      if (r < -kCategoryTolerance) throw InvalidInput("negative reward is outside the RS domain");
      if (is_zero(r)) {
        s.category = slack <= kCategoryTolerance ? Category::First : Category::Last;
      } else {
        s.rho = (0.0 - slack) / r;
        ++counter.divs;
      }
      break;
  }
  if (s.category == Category::First) s.rho = kInf;
  if (s.category == Category::Last) s.rho = -kInf;
  return s;
}

StateStats categorize(double r, double a, Hypothesis h) {
  OpCounter scratch;
  return categorize_slack(r, 1.0 - a, h, scratch);
}

bool weakly_preferred(const StateStats& i, const StateStats& j) { return i.rho >= j.rho; }

namespace {

// r(i)(1 - a(j)) - r(j)(1 - a(i)), i.e. lhs - rhs of the pairwise inequality,
// with a tolerance scaled to the magnitude of the terms.
int pairwise_sign(const StateStats& i, const StateStats& j) {
  const double left = i.r * j.slack;
  const double right = j.r * i.slack;
  const double diff = left - right;
  const double scale = std::abs(left) + std::abs(right);
  if (std::abs(diff) <= 1e-12 * scale || diff == 0.0) return 0;
  return diff > 0.0 ? 1 : -1;
}

}  // namespace

bool pairwise_weakly_preferred(const StateStats& i, const StateStats& j) {
  const int sign = pairwise_sign(i, j);
  if (sign > 0) return true;
  if (sign < 0) return false;
  return static_cast<int>(i.category) <= static_cast<int>(j.category);
}

bool preferable(const StateStats& i, const StateStats& j) { return pairwise_sign(i, j) > 0; }

bool ranks_before(double rho_a, std::size_t id_a, double rho_b, std::size_t id_b) {
  if (rho_a != rho_b) return rho_a > rho_b;
  return id_a < id_b;
}

BestState argbest(std::span<const Candidate> candidates, Hypothesis h, OpCounter& counter) {
  if (candidates.empty()) throw InvalidInput("argbest needs at least one candidate");
  BestState best;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const auto& c = candidates[k];
    const StateStats stats = categorize_slack(c.r, c.slack, h, counter);
    if (k == 0) {
      best = BestState{0, c.id, stats};
      continue;
    }
    ++counter.comparisons;
    if (ranks_before(stats.rho, c.id, best.stats.rho, best.id)) best = BestState{k, c.id, stats};
  }
  return best;
}

bool ratio_monotone_check(const StateStats& chosen_before, const StateStats& chosen_after,
                          std::span<const StateStats> others_before, std::span<const StateStats> others_after) {
  if (others_before.size() != others_after.size()) return false;
  if (!approx_equal(chosen_before.rho, chosen_after.rho)) return false;
  for (std::size_t k = 0; k < others_before.size(); ++k) {
    const double updated = others_after[k].rho;
    if (!approx_ge(chosen_before.rho, updated)) return false;
    if (!approx_ge(updated, others_before[k].rho)) return false;
  }
  return true;
}

std::vector<RankedState> rank_states(const Instance& instance) {
  std::vector<RankedState> out;
  out.reserve(instance.num_states());
  for (std::size_t g = 0; g < instance.num_states(); ++g) {
    const StateId id = instance.state(g);
    const auto& chain = instance.chain(id.bandit);
    const auto i = static_cast<Eigen::Index>(id.local);
    OpCounter scratch;
    out.push_back({id, categorize_slack(chain.rewards()(i), 1.0 - chain.amplification()(i), instance.hypothesis(), scratch)});
  }
  std::stable_sort(out.begin(), out.end(), [](const RankedState& a, const RankedState& b) {
    return ranks_before(a.stats.rho, a.state.global, b.stats.rho, b.state.global);
  });
  return out;
}

}  // namespace bandit
