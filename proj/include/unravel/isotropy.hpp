#pragma once

#include <Eigen/Dense>

#include "unravel/mixture.hpp"

namespace unravel {

struct MomentEstimate {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // divisor m, not m-1
  Eigen::Index count = 0;
};

// Sample mean and covariance of a points matrix (rows = points, m >= 1).
MomentEstimate estimate_moments(const Eigen::MatrixXd& points);

struct Whitening {
  Eigen::MatrixXd points;     // transformed copy of the input, exact mean zero
  AffineMap map;              // y = linear * x + offset
  Eigen::VectorXd spectrum;   // covariance eigenvalues before flooring, ascending
  int floored = 0;            // directions clamped at eps_floor
};

// Empirical whitening: y = C^{-1/2} (x - mean) with the symmetric inverse
// square root of the sample covariance C.  Eigenvalues below eps_floor are
// clamped to eps_floor, so a rank-deficient direction is scaled by
// eps_floor^{-1/2} instead of blowing up.  Pass eps_floor < 0 for the default
// 1e-8 * (largest eigenvalue).
//
// Requires m >= n + 1 rows; throws "degenerate cell" when every eigenvalue
// sits below the floor (e.g. all points coincide).
Whitening whiten(const Eigen::MatrixXd& points, double eps_floor = -1.0);

}  // namespace unravel
