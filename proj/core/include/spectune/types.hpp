#pragma once

#include <Eigen/Core>

namespace spectune {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

} // namespace spectune
