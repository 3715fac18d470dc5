#include "unravel/linalg.hpp"

#include <stdexcept>

namespace unravel {

void fix_column_signs(Eigen::MatrixXd& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    Eigen::Index imax = 0;
    m.col(j).cwiseAbs().maxCoeff(&imax);
    if (m(imax, j) < 0.0) m.col(j) = -m.col(j);
  }
}

SymEig sym_eig(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) throw std::runtime_error("sym_eig: eigendecomposition failed");
  SymEig out{es.eigenvalues(), es.eigenvectors()};
  fix_column_signs(out.vectors);
  return out;
}

Eigen::MatrixXd column_space_basis(const Eigen::MatrixXd& a, double tol) {
  if (a.cols() == 0) return Eigen::MatrixXd(a.rows(), 0);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(tol);
  const Eigen::Index r = qr.rank();
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), r);
  fix_column_signs(q);
  return q;
}

Eigen::MatrixXd complete_basis(const Eigen::MatrixXd& basis) {
  const Eigen::Index n = basis.rows(), r = basis.cols();
  if (r > n) throw std::invalid_argument("complete_basis: more columns than rows");
  Eigen::MatrixXd full = Eigen::MatrixXd::Identity(n, n);
  // project identity columns away from the basis, then orthonormalize
  Eigen::MatrixXd residual = full - basis * basis.transpose();
  Eigen::MatrixXd comp = column_space_basis(residual, 1e-10);
  if (comp.cols() != n - r) throw std::runtime_error("complete_basis: completion rank mismatch");
  Eigen::MatrixXd out(n, n);
  out.leftCols(r) = basis;
  out.rightCols(n - r) = comp;
  return out;
}

double asymmetry(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
  return (a - a.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace unravel
