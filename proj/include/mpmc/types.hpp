#pragma once

#include <Eigen/Dense>

namespace mpmc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// A point of the cotangent bundle: position on the level set and a momentum
/// in the cotangent space at that position.
struct PhasePoint {
    Vec x;
    Vec p;
};

}  // namespace mpmc
