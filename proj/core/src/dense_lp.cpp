#include "bandit/dense_lp.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <limits>

#include "bandit/errors.hpp"

namespace bandit {

namespace {

constexpr double kEps = 1e-11;
constexpr double kFeasibility = 1e-9;

class TableauLp {
 public:
  TableauLp(Matrix t, std::vector<std::size_t> basis) : t_(std::move(t)), basis_(std::move(basis)) {}

  // Maximizes objective row `cost` over columns [0, usable). Returns false if unbounded.
  bool run(const Vector& cost, std::size_t usable) {
    const auto rows = t_.rows();
    const auto rhs = t_.cols() - 1;
    for (int guard = 0; guard < 100000; ++guard) {
      // Reduced costs c_j - c_B B^-1 a_j, read from the current tableau.
      std::optional<Eigen::Index> entering;
      for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(usable); ++j) {
        double rc = cost(j);
        for (Eigen::Index r = 0; r < rows; ++r) rc -= cost(static_cast<Eigen::Index>(basis_[r])) * t_(r, j);
        if (rc > kEps) {
          entering = j;
          break;
        }
      }
      if (!entering) return true;
      std::optional<Eigen::Index> leaving;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index r = 0; r < rows; ++r) {
        const double d = t_(r, *entering);
        if (d <= kEps) continue;
        const double ratio = std::max(0.0, t_(r, rhs)) / d;
        if (ratio < best - 1e-14 || (std::abs(ratio - best) <= 1e-14 && leaving && basis_[r] < basis_[*leaving])) {
          best = ratio;
          leaving = r;
        }
      }
      if (!leaving) return false;
      pivot(*leaving, *entering);
    }
    throw IterationLimit("dense simplex did not terminate");
  }

  void pivot(Eigen::Index r, Eigen::Index j) {
    t_.row(r) /= t_(r, j);
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, j);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[static_cast<std::size_t>(r)] = static_cast<std::size_t>(j);
  }

  Matrix& table() { return t_; }
  std::vector<std::size_t>& basis() { return basis_; }

 private:
  Matrix t_;
  std::vector<std::size_t> basis_;
};

}  // namespace

LpSolution solve_dense_lp(const LpProblem& p) {
  const auto m = p.a.rows();
  const auto n = p.a.cols();
  if (p.b.size() != m || static_cast<Eigen::Index>(p.sense.size()) != m || p.c.size() != n)
    throw InvalidInput("LP dimensions do not agree");

  Eigen::Index slacks = 0;
  for (auto s : p.sense)
    if (s != RowSense::Equal) ++slacks;
  // Columns: structural | slack | artificial | rhs.
  const Eigen::Index total = n + slacks + m;
  Matrix t = Matrix::Zero(m, total + 1);
  std::vector<std::size_t> basis(static_cast<std::size_t>(m));
  Eigen::Index slack_col = n;
  for (Eigen::Index r = 0; r < m; ++r) {
    t.row(r).head(n) = p.a.row(r);
    if (p.sense[static_cast<std::size_t>(r)] == RowSense::AtLeast) t(r, slack_col++) = -1.0;
    if (p.sense[static_cast<std::size_t>(r)] == RowSense::AtMost) t(r, slack_col++) = 1.0;
    t(r, total) = p.b(r);
    if (t(r, total) < 0.0) t.row(r) *= -1.0;
    t(r, n + slacks + r) = 1.0;
    basis[static_cast<std::size_t>(r)] = static_cast<std::size_t>(n + slacks + r);
  }

  TableauLp lp(std::move(t), std::move(basis));
  Vector phase1 = Vector::Zero(total);
  phase1.tail(m).setConstant(-1.0);
  lp.run(phase1, static_cast<std::size_t>(total));

  double infeasibility = 0.0;
  for (Eigen::Index r = 0; r < m; ++r)
    if (lp.basis()[r] >= static_cast<std::size_t>(n + slacks)) infeasibility += lp.table()(r, total);
  LpSolution out;
  if (infeasibility > kFeasibility) {
    out.status = LpStatus::Infeasible;
    return out;
  }
  // Drive zero-level artificials out of the basis where possible.
  for (Eigen::Index r = 0; r < m; ++r) {
    if (lp.basis()[r] < static_cast<std::size_t>(n + slacks)) continue;
    for (Eigen::Index j = 0; j < n + slacks; ++j) {
      if (std::abs(lp.table()(r, j)) > 1e-9) {
        lp.pivot(r, j);
        break;
      }
    }
  }

  Vector phase2 = Vector::Zero(total);
  phase2.head(n) = p.c;
  if (!lp.run(phase2, static_cast<std::size_t>(n + slacks))) {
    out.status = LpStatus::Unbounded;
    return out;
  }
  out.status = LpStatus::Optimal;
  out.x = Vector::Zero(n);
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto b = static_cast<Eigen::Index>(lp.basis()[r]);
    if (b < n) out.x(b) = lp.table()(r, total);
  }
  out.objective = p.c.dot(out.x);
  return out;
}

}  // namespace bandit
