#include "unravel/separator.hpp"

#include <cmath>
#include <stdexcept>

#include "unravel/linalg.hpp"

namespace unravel {

TopEigenvector top_eigenvector(const Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  if (m.cols() != n || n < 1) throw std::invalid_argument("top_eigenvector: matrix must be square");
  if (asymmetry(m) > 1e-9) throw std::invalid_argument("top_eigenvector: matrix must be symmetric");
  const SymEig eig = sym_eig(m);
  TopEigenvector out;
  out.value = eig.values[n - 1];
  out.v = eig.vectors.col(n - 1);
  if (n > 1) {
    const double scale = std::max(1.0, std::abs(out.value));
    out.degenerate = (eig.values[n - 1] - eig.values[n - 2]) <= 1e-10 * scale;
  }
  return out;
}

DirectionChoice choose_direction(const ReweightedMoments& moments, double wmin) {
  if (!(wmin > 0.0 && wmin <= 1.0)) throw std::invalid_argument("choose_direction: wmin must be in (0,1]");
  if (!(moments.alpha > 0.0)) throw std::invalid_argument("choose_direction: moments carry no alpha");

  DirectionChoice out;
  out.mean_shift_norm = moments.u.norm();
  out.threshold = std::sqrt(wmin) / (32.0 * moments.alpha);
  if (out.mean_shift_norm > out.threshold) {
    out.method = SeparatorMethod::MeanShift;
    out.h = moments.u / out.mean_shift_norm;
    return out;
  }
  if (!(moments.M.cwiseAbs().maxCoeff() > 0.0)) {
    if (out.mean_shift_norm == 0.0)
      throw std::runtime_error("choose_direction: reweighted moments vanish (u = 0 and M = 0)");
    // tiny u, zero M: fall back to the mean-shift direction
    out.method = SeparatorMethod::MeanShift;
    out.h = moments.u / out.mean_shift_norm;
    return out;
  }
  const TopEigenvector top = top_eigenvector(moments.M);
  out.method = SeparatorMethod::Spectral;
  out.h = top.v;
  out.degenerate = top.degenerate;
  return out;
}

}  // namespace unravel
