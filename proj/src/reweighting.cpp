#include "unravel/reweighting.hpp"

#include <cmath>
#include <stdexcept>

#include "unravel/linalg.hpp"

namespace unravel {

ReweightedMoments sample_reweighted_moments(const Eigen::MatrixXd& points, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("sample_reweighted_moments: alpha must be positive");
  const Eigen::Index m = points.rows(), n = points.cols();
  if (m < 1) throw std::invalid_argument("sample_reweighted_moments: need at least one point");

  ReweightedMoments out;
  out.alpha = alpha;
  out.count = m;
  const Eigen::VectorXd w = (-points.rowwise().squaredNorm() / (2.0 * alpha)).array().exp();
  out.u = (points.transpose() * w) / static_cast<double>(m);
  const Eigen::MatrixXd weighted = points.array().colwise() * w.array();
  out.M = (weighted.transpose() * points) / static_cast<double>(m);
  out.M = ((out.M + out.M.transpose()) / 2.0).eval();
  (void)n;
  return out;
}

ComponentReweighting reweight_gaussian(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                       double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("reweight_gaussian: alpha must be positive");
  if (sigma.rows() != sigma.cols() || sigma.rows() != mu.size())
    throw std::invalid_argument("reweight_gaussian: dimension mismatch");
  const SymEig eig = sym_eig(sigma);
  if (!(eig.values.minCoeff() > 0.0))
    throw std::invalid_argument("reweight_gaussian: sigma must be positive definite");

  const Eigen::Index n = mu.size();
  Eigen::VectorXd wdiag(n);
  double half_log_det_w = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    wdiag[j] = alpha / (alpha + eig.values[j]);
    half_log_det_w += 0.5 * std::log(wdiag[j]);
  }
  const Eigen::MatrixXd qw = eig.vectors * wdiag.asDiagonal() * eig.vectors.transpose();

  ComponentReweighting out;
  out.mean_y = qw * mu;
  out.cov_y = eig.vectors * (wdiag.array() * eig.values.array()).matrix().asDiagonal() *
              eig.vectors.transpose();
  out.cov_y = ((out.cov_y + out.cov_y.transpose()) / 2.0).eval();
  out.rho = std::exp(half_log_det_w - mu.dot(qw * mu) / (2.0 * alpha));
  return out;
}

ReweightedMoments exact_mixture_moments(const GaussianMixture& mix, double alpha) {
  mix.validate();
  ReweightedMoments out;
  out.alpha = alpha;
  out.count = 0;
  out.u = Eigen::VectorXd::Zero(mix.n);
  out.M = Eigen::MatrixXd::Zero(mix.n, mix.n);
  for (int i = 0; i < mix.k; ++i) {
    const ComponentReweighting cr = reweight_gaussian(mix.means[i], mix.covariances[i], alpha);
    const double wr = mix.weights[i] * cr.rho;
    out.u += wr * cr.mean_y;
    out.M += wr * (cr.cov_y + cr.mean_y * cr.mean_y.transpose());
  }
  out.M = ((out.M + out.M.transpose()) / 2.0).eval();
  return out;
}

Eigen::VectorXd component_rhos(const GaussianMixture& mix, double alpha) {
  Eigen::VectorXd rhos(mix.k);
  for (int i = 0; i < mix.k; ++i)
    rhos[i] = reweight_gaussian(mix.means[i], mix.covariances[i], alpha).rho;
  return rhos;
}

Eigen::MatrixXd exact_gamma(const GaussianMixture& mix, const Eigen::MatrixXd& intermean_basis,
                            double alpha) {
  mix.validate();
  if (!(alpha > 0.0)) throw std::invalid_argument("exact_gamma: alpha must be positive");
  if (intermean_basis.rows() != mix.n)
    throw std::invalid_argument("exact_gamma: basis row count != n");
  const Eigen::Index r = intermean_basis.cols();  // k-1
  if ((intermean_basis.transpose() * intermean_basis - Eigen::MatrixXd::Identity(r, r))
          .cwiseAbs()
          .maxCoeff() > 1e-8)
    throw std::invalid_argument("exact_gamma: basis columns are not orthonormal");

  const Eigen::MatrixXd frame = complete_basis(intermean_basis);  // [F | F_perp]
  const Eigen::Index q = mix.n - r;

  Eigen::MatrixXd top = Eigen::MatrixXd::Zero(r, r);
  Eigen::MatrixXd bottom = Eigen::MatrixXd::Zero(q, q);
  for (int i = 0; i < mix.k; ++i) {
    const double rho = reweight_gaussian(mix.means[i], mix.covariances[i], alpha).rho;
    const double w = mix.weights[i];
    const Eigen::MatrixXd rotated = frame.transpose() * (w * mix.covariances[i]) * frame;
    const Eigen::VectorXd mi = intermean_basis.transpose() * mix.means[i];
    top += rho * (w * mi * mi.transpose() + rotated.topLeftCorner(r, r));
    const Eigen::MatrixXd di = rotated.bottomRightCorner(q, q);
    bottom += rho * di - (rho / (w * alpha)) * (di * di);
  }

  Eigen::MatrixXd gamma_rot = Eigen::MatrixXd::Zero(mix.n, mix.n);
  gamma_rot.topLeftCorner(r, r) = top;
  gamma_rot.bottomRightCorner(q, q) = bottom;
  Eigen::MatrixXd gamma = frame * gamma_rot * frame.transpose();
  return ((gamma + gamma.transpose()) / 2.0).eval();
}

}  // namespace unravel
