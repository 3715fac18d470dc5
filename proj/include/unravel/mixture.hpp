#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "unravel/rng.hpp"

namespace unravel {

// Invertible affine change of variables x -> linear * x + offset.
struct AffineMap {
  Eigen::MatrixXd linear;
  Eigen::VectorXd offset;

  static AffineMap identity(int n) {
    return {Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Zero(n)};
  }

  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const { return linear * x + offset; }

  // applies the map to every row of a points matrix (rows = points)
  Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& points) const {
    return (points * linear.transpose()).rowwise() + offset.transpose();
  }

  // this ∘ inner:  x -> this(inner(x))
  AffineMap compose(const AffineMap& inner) const {
    return {linear * inner.linear, linear * inner.offset + offset};
  }

  bool invertible() const;
  double condition_number() const;  // ratio of extreme singular values
};

struct GaussianMixture {
  int k = 0;  // number of components
  int n = 0;  // ambient dimension
  std::vector<double> weights;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covariances;

  // Throws std::invalid_argument naming the offending field when the mixture
  // is malformed: weights must be positive and sum to 1 within 1e-12, each
  // covariance symmetric within 1e-12 with smallest eigenvalue > 1e-12*trace.
  void validate() const;

  double min_weight() const;
  Eigen::VectorXd mean() const;  // sum_i w_i mu_i
  // Second moment about the origin: sum_i w_i (Sigma_i + mu_i mu_i^T).
  Eigen::MatrixXd second_moment() const;
  // Covariance about the mixture mean.
  Eigen::MatrixXd total_covariance() const;
  // Averaged intra-component covariance sum_i w_i Sigma_i.
  Eigen::MatrixXd sigma_bar() const;
  // ||mean()|| <= tol and ||second_moment() - I|| <= tol (max-abs entry)
  bool is_isotropic(double tol = 1e-8) const;
};

// m points with the component index (0-based, < k) that generated each one.
struct LabeledSample {
  Eigen::MatrixXd points;   // m x n, one row per point
  std::vector<int> labels;  // size m, values in [0, k)
};

// --- sampling -------------------------------------------------------------

// Component indices drawn by inverse-CDF walk over the weights.
std::vector<int> draw_labels(const GaussianMixture& mix, Eigen::Index m, Rng& rng);

// Deterministic point assembly: row j of the result is
// means[labels[j]] + factors[labels[j]] * z_j where z_j is row j of z.
// `factors` defaults (in sample()) to the Cholesky factor of each covariance.
Eigen::MatrixXd materialize(const std::vector<Eigen::VectorXd>& means,
                            const std::vector<Eigen::MatrixXd>& factors,
                            const std::vector<int>& labels, const Eigen::MatrixXd& z);

std::vector<Eigen::MatrixXd> cholesky_factors(const GaussianMixture& mix);

// Draw m labeled points.  Identical (mix, m, seed) produce bit-identical
// output: labels are drawn first, then one n-vector of standard normals per
// point, then points are assembled via materialize().
LabeledSample sample(const GaussianMixture& mix, Eigen::Index m, std::uint64_t seed);

// --- transforms -------------------------------------------------------------

// Pushforward under x -> Ax + b: means -> A mu + b, covariances -> A Sigma A^T.
// Throws if the linear part is singular.
GaussianMixture apply_affine(const GaussianMixture& mix, const AffineMap& map);

// The affine map that puts the mixture in isotropic position (mean zero,
// second moment identity), using the symmetric whitening T^{-1/2} of the
// total covariance T.  Throws naming the deficient eigenvalue when T is
// numerically rank-deficient.
AffineMap isotropic_params(const GaussianMixture& mix);

// Convenience: apply_affine(mix, isotropic_params(mix)).
GaussianMixture isotropize(const GaussianMixture& mix);

// Renormalized sub-mixture on the given component indices.
GaussianMixture submixture(const GaussianMixture& mix, const std::vector<int>& components);

// --- instance constructors --------------------------------------------------

// Two "parallel pancake" components in raw position: means +-d along e1
// (shifted so the mixture mean is zero when w1 != 1/2), covariance
// diag(sigma_thin^2, 1, ..., 1) each.
GaussianMixture parallel_pancakes(int n, double d, double sigma_thin, double w1);

// Random k-component mixture in isotropic position whose overlap (the
// eigenvalue statistic computed by the fisher module) lands within 20% of
// target_overlap; the intra-component variance inside the intermean subspace
// is rescaled by bisection to hit the target.  Throws if the target is not
// reached after 100 bisection steps.  Deterministic in (k, n, target, seed).
GaussianMixture random_separable_mixture(int k, int n, double target_overlap, std::uint64_t seed);

// Random mixture in isotropic position whose components are orthogonal copies
// of one another (mirror pair for k=2, 3-fold rotation orbit for k=3,
// tetrahedral orbit for k=4), so every component reweighting factor rho_i is
// exactly equal.  Used to exercise the balanced-rho regime.
GaussianMixture balanced_symmetric_mixture(int k, int n, double target_overlap, std::uint64_t seed);

// Random SPD matrix with unit-scale spectrum (G G^T / n + ridge I).
Eigen::MatrixXd random_spd(int n, Rng& rng, double ridge = 0.05);

// Random n x n orthogonal matrix (QR of a Gaussian matrix, sign-fixed).
Eigen::MatrixXd random_orthogonal(int n, Rng& rng);

// Random invertible affine map with the requested condition number: random
// rotations around a diagonal of singular values in [1/sqrt(c), sqrt(c)],
// plus a bounded random offset.
AffineMap random_affine(int n, double condition, Rng& rng);

}  // namespace unravel
