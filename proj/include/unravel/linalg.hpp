#pragma once

#include <Eigen/Dense>

namespace unravel {

// Symmetric eigendecomposition with a deterministic sign convention:
// eigenvalues ascending, each eigenvector flipped so its largest-magnitude
// entry is positive.  Keeps outputs reproducible across runs and makes
// direction comparisons in tests meaningful.
struct SymEig {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns match values
};

SymEig sym_eig(const Eigen::MatrixXd& m);

// Flip each column so its largest-magnitude entry is positive.
void fix_column_signs(Eigen::MatrixXd& m);

// Orthonormal basis (n x r) for the column span of a, via column-pivoted QR.
// Columns with relative norm below tol are dropped.
Eigen::MatrixXd column_space_basis(const Eigen::MatrixXd& a, double tol = 1e-10);

// Extend an orthonormal n x r basis to a full orthonormal n x n matrix
// [basis | complement].
Eigen::MatrixXd complete_basis(const Eigen::MatrixXd& basis);

// || a - a^T ||_inf, used by symmetry checks
double asymmetry(const Eigen::MatrixXd& a);

}  // namespace unravel
