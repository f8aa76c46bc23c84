#pragma once

#include <Eigen/Dense>

namespace pstab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

}  // namespace pstab
