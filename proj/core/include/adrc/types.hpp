#pragma once

#include <Eigen/Dense>

namespace adrc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Spectral norm (largest singular value).
double spectral_norm(const Mat& m);

/// Largest entry magnitude.
double max_abs(const Mat& m);

}  // namespace adrc
