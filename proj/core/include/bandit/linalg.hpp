#pragma once

#include <Eigen/Dense>

namespace bandit {

/// Dense row-major storage used for every transition-rate matrix and tableau.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace bandit
