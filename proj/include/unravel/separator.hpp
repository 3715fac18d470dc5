#pragma once

#include <Eigen/Dense>

#include "unravel/reweighting.hpp"

namespace unravel {

enum class SeparatorMethod { MeanShift, Spectral };

struct TopEigenvector {
  Eigen::VectorXd v;       // unit, largest-magnitude entry positive
  double value = 0.0;      // largest eigenvalue
  bool degenerate = false; // top eigenvalue tied within 1e-10 (relative)
};

TopEigenvector top_eigenvector(const Eigen::MatrixXd& m);

struct DirectionChoice {
  Eigen::VectorXd h;  // unit separating direction
  SeparatorMethod method = SeparatorMethod::Spectral;
  double mean_shift_norm = 0.0;  // ||u||
  double threshold = 0.0;        // sqrt(wmin) / (32 alpha)
  bool degenerate = false;       // spectral branch with a tied top eigenvalue
};

// Branch rule on reweighted moments: take the mean-shift direction u/||u||
// when ||u|| exceeds sqrt(wmin)/(32 alpha), otherwise the top principal
// component of M.  Throws when both u and M vanish.
DirectionChoice choose_direction(const ReweightedMoments& moments, double wmin);

}  // namespace unravel
