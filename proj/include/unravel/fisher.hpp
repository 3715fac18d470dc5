#pragma once

#include <Eigen/Dense>

#include "unravel/mixture.hpp"

namespace unravel {

struct SubspaceBasis {
  Eigen::MatrixXd columns;  // n x r, orthonormal within 1e-10

  int dim() const { return static_cast<int>(columns.cols()); }
  void validate() const;  // throws if columns are not orthonormal
};

struct OverlapReport {
  double phi = 0.0;                        // overlap of the isotropic mixture
  SubspaceBasis fisher_basis;              // n x (k-1)
  Eigen::VectorXd sigma_bar_eigenvalues;   // descending; phi = entry n-k+1
};

// Projected intra-component variance ratio for a unit direction p:
//   J(p) = p^T SigmaBar p / p^T (sum_i w_i (Sigma_i + mu_i mu_i^T)) p
// Defined for any mixture; equals p^T SigmaBar p when the mixture is isotropic.
double fisher_discriminant(const GaussianMixture& mix, const Eigen::VectorXd& p);

// For an isotropic mixture (within 1e-8) whose means span k-1 dimensions:
// the subspace minimizing the projected intra-component variance is spanned by
// the k-1 smallest eigenvectors of SigmaBar = sum_i w_i Sigma_i, and the
// overlap phi is the (k-1)-th smallest eigenvalue.
OverlapReport fisher_subspace(const GaussianMixture& mix);

// Overlap of an arbitrary mixture: isotropize, then fisher_subspace.
double overlap(const GaussianMixture& mix);

// For a 2-component mixture and a unit direction p satisfying
//   |p^T (mu_1 - mu_2)| > t (sqrt(p^T w_1 Sigma_1 p) + sqrt(p^T w_2 Sigma_2 p))
// returns the overlap upper bound 1 / (1 + w_1 w_2 t^2); throws when the
// separation hypothesis fails.
double overlap_bound_from_separation(const GaussianMixture& mix, const Eigen::VectorXd& p,
                                     double t);

// Smallest singular value of F^T V for two equal-dimension orthonormal bases;
// 1 means identical subspaces, 0 means some direction of V is orthogonal to F.
double subspace_affinity(const SubspaceBasis& v, const SubspaceBasis& f);

struct StewartReport {
  bool applicable = false;  // eigengap positive and ||E|| <= gap / 5
  double eigengap = 0.0;    // lambda_r(gamma) - lambda_{r+1}(gamma)
  double bound = 0.0;       // 4 ||E_21|| / eigengap
  double actual = 0.0;      // ||V^T P_2||: top-r invariant subspace of `perturbed`
                            // against the trailing eigenvectors of `gamma`
};

// Quantitative eigenvector-perturbation check: with gamma symmetric and
// E = perturbed - gamma expressed in gamma's eigenbasis, if the eigengap d at
// position r satisfies ||E|| <= d/5 then ||V^T P_2|| <= 4 ||E_21|| / d.
StewartReport stewart_bound(const Eigen::MatrixXd& gamma, const Eigen::MatrixXd& perturbed, int r);

}  // namespace unravel
