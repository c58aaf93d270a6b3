#pragma once

#include <Eigen/Core>

namespace sid {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace sid
