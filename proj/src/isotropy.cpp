#include "unravel/isotropy.hpp"

#include <sstream>
#include <stdexcept>

#include "unravel/linalg.hpp"

namespace unravel {

MomentEstimate estimate_moments(const Eigen::MatrixXd& points) {
  const Eigen::Index m = points.rows();
  if (m < 1) throw std::invalid_argument("estimate_moments: need at least one point");
  MomentEstimate est;
  est.count = m;
  est.mean = points.colwise().mean().transpose();
  const Eigen::MatrixXd centered = points.rowwise() - est.mean.transpose();
  est.covariance = (centered.transpose() * centered) / static_cast<double>(m);
  est.covariance = ((est.covariance + est.covariance.transpose()) / 2.0).eval();
  return est;
}

Whitening whiten(const Eigen::MatrixXd& points, double eps_floor) {
  const Eigen::Index m = points.rows(), n = points.cols();
  if (m < n + 1) {
    std::ostringstream os;
    os << "whiten: need at least n+1 = " << (n + 1) << " points, got " << m;
    throw std::invalid_argument(os.str());
  }
  const MomentEstimate est = estimate_moments(points);
  const SymEig eig = sym_eig(est.covariance);

  Whitening out;
  out.spectrum = eig.values;
  const double lambda_max = eig.values.maxCoeff();
  const double floor = eps_floor >= 0.0 ? eps_floor : 1e-8 * lambda_max;
  if (!(lambda_max > floor) || !(lambda_max > 0.0))
    throw std::runtime_error("whiten: degenerate cell (all covariance eigenvalues at or below the floor)");

  Eigen::VectorXd inv_sqrt(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double lam = eig.values[i];
    if (lam < floor) {
      lam = floor;
      ++out.floored;
    }
    inv_sqrt[i] = 1.0 / std::sqrt(lam);
  }
  const Eigen::MatrixXd w = eig.vectors * inv_sqrt.asDiagonal() * eig.vectors.transpose();
  out.map = AffineMap{w, -w * est.mean};
  out.points = out.map.apply_rows(points);
  return out;
}

}  // namespace unravel
