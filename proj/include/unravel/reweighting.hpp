#pragma once

#include <Eigen/Dense>

#include "unravel/mixture.hpp"

namespace unravel {

// First and second moments of points under the weight exp(-||x||^2 / (2 alpha)).
struct ReweightedMoments {
  Eigen::VectorXd u;  // (1/m) sum_j w_j x_j
  Eigen::MatrixXd M;  // (1/m) sum_j w_j x_j x_j^T
  double alpha = 0.0;
  Eigen::Index count = 0;
};

// Closed form for a single Gaussian N(mu, Sigma) under the same weight.
// With Sigma = Q Lambda Q^T and W = diag(alpha / (alpha + lambda_j)):
//   E[f(x) e^{-||x||^2/(2 alpha)}] = rho * E[f(y)],  y ~ N(mean_y, cov_y)
//   rho    = det(W)^{1/2} * exp(-mu^T Q W Q^T mu / (2 alpha))
//   mean_y = Q W Q^T mu,   cov_y = Q W Lambda Q^T
struct ComponentReweighting {
  double rho = 0.0;  // in (0, 1]
  Eigen::VectorXd mean_y;
  Eigen::MatrixXd cov_y;
};

// Monte Carlo estimate from a points matrix (rows = points).  alpha > 0.
ReweightedMoments sample_reweighted_moments(const Eigen::MatrixXd& points, double alpha);

ComponentReweighting reweight_gaussian(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                       double alpha);

// Population (m -> infinity) value of sample_reweighted_moments for a mixture:
//   u = sum_i w_i rho_i mean_y_i
//   M = sum_i w_i rho_i (cov_y_i + mean_y_i mean_y_i^T)
ReweightedMoments exact_mixture_moments(const GaussianMixture& mix, double alpha);

// Block-diagonal reference matrix for the reweighted second moment of an
// isotropic mixture.  In the frame [F | F_perp] where F is an orthonormal
// basis of the intermean span (n x (k-1)):
//   top block    sum_i rho_i (w_i m_i m_i^T + A_i)
//   bottom block sum_i rho_i D_i - (rho_i / (w_i alpha)) D_i^2
// with m_i, A_i, D_i the intermean mean coordinates and the diagonal blocks of
// w_i Sigma_i.  Returned rotated back to the original coordinates.
Eigen::MatrixXd exact_gamma(const GaussianMixture& mix, const Eigen::MatrixXd& intermean_basis,
                            double alpha);

// All component rho values at the given alpha.
Eigen::VectorXd component_rhos(const GaussianMixture& mix, double alpha);

}  // namespace unravel
