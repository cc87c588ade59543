#pragma once

#include <Eigen/Dense>

namespace risknet {

/// Node-major dense matrices: one row per metagraph node.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

}  // namespace risknet
