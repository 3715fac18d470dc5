#include "unravel/fisher.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "unravel/linalg.hpp"

namespace unravel {

void SubspaceBasis::validate() const {
  const Eigen::Index r = columns.cols();
  const Eigen::MatrixXd gram = columns.transpose() * columns;
  if ((gram - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("SubspaceBasis: columns are not orthonormal within 1e-10");
}

double fisher_discriminant(const GaussianMixture& mix, const Eigen::VectorXd& p) {
  mix.validate();
  if (p.size() != mix.n) throw std::invalid_argument("fisher_discriminant: direction length != n");
  if (std::abs(p.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("fisher_discriminant: direction must be unit within 1e-10");
  const double numer = p.dot(mix.sigma_bar() * p);
  const double denom = p.dot(mix.second_moment() * p);
  if (!(denom > 0.0)) throw std::runtime_error("fisher_discriminant: zero projected second moment");
  return numer / denom;
}

OverlapReport fisher_subspace(const GaussianMixture& mix) {
  mix.validate();
  if (mix.k < 2) throw std::invalid_argument("fisher_subspace: need k >= 2");
  if (!mix.is_isotropic(1e-8))
    throw std::invalid_argument("fisher_subspace: mixture is not isotropic within 1e-8");

  Eigen::MatrixXd mean_cols(mix.n, mix.k);
  for (int i = 0; i < mix.k; ++i) mean_cols.col(i) = mix.means[i];
  const Eigen::MatrixXd span = column_space_basis(mean_cols, 1e-8);
  if (span.cols() != mix.k - 1) {
    std::ostringstream os;
    os << "fisher_subspace: means span " << span.cols() << " dimensions, expected k-1 = "
       << (mix.k - 1);
    throw std::invalid_argument(os.str());
  }

  const SymEig eig = sym_eig(mix.sigma_bar());  // ascending
  OverlapReport report;
  report.fisher_basis.columns = eig.vectors.leftCols(mix.k - 1);
  report.phi = eig.values[mix.k - 2];  // (k-1)-th smallest
  report.sigma_bar_eigenvalues = eig.values.reverse();
  return report;
}

double overlap(const GaussianMixture& mix) { return fisher_subspace(isotropize(mix)).phi; }

double overlap_bound_from_separation(const GaussianMixture& mix, const Eigen::VectorXd& p,
                                     double t) {
  mix.validate();
  if (mix.k != 2) throw std::invalid_argument("overlap_bound_from_separation: need exactly 2 components");
  if (std::abs(p.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("overlap_bound_from_separation: direction must be unit");
  if (!(t > 0.0)) throw std::invalid_argument("overlap_bound_from_separation: t must be positive");
  const double w1 = mix.weights[0], w2 = mix.weights[1];
  const double sep = std::abs(p.dot(mix.means[0] - mix.means[1]));
  const double spread = std::sqrt(w1 * p.dot(mix.covariances[0] * p)) +
                        std::sqrt(w2 * p.dot(mix.covariances[1] * p));
  if (!(sep > t * spread)) {
    std::ostringstream os;
    os << "overlap_bound_from_separation: separation hypothesis fails (" << sep
       << " <= " << t * spread << ")";
    throw std::invalid_argument(os.str());
  }
  return 1.0 / (1.0 + w1 * w2 * t * t);
}

double subspace_affinity(const SubspaceBasis& v, const SubspaceBasis& f) {
  if (v.columns.rows() != f.columns.rows() || v.columns.cols() != f.columns.cols())
    throw std::invalid_argument("subspace_affinity: bases must have equal shapes");
  v.validate();
  f.validate();
  if (v.columns.cols() == 0) return 1.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(f.columns.transpose() * v.columns);
  return svd.singularValues().minCoeff();
}

StewartReport stewart_bound(const Eigen::MatrixXd& gamma, const Eigen::MatrixXd& perturbed,
                            int r) {
  const Eigen::Index n = gamma.rows();
  if (gamma.cols() != n || perturbed.rows() != n || perturbed.cols() != n)
    throw std::invalid_argument("stewart_bound: matrices must be square and equal-sized");
  if (r < 1 || r >= n) throw std::invalid_argument("stewart_bound: need 1 <= r < n");
  if (asymmetry(gamma) > 1e-9 || asymmetry(perturbed) > 1e-9)
    throw std::invalid_argument("stewart_bound: matrices must be symmetric");

  const SymEig ge = sym_eig(gamma);  // ascending
  // descending blocks: U1 = top r eigenvectors, U2 = the rest
  const Eigen::MatrixXd u1 = ge.vectors.rightCols(r).rowwise().reverse();
  const Eigen::MatrixXd u2 = ge.vectors.leftCols(n - r).rowwise().reverse();

  StewartReport rep;
  rep.eigengap = ge.values[n - r] - ge.values[n - r - 1];

  const Eigen::MatrixXd e = perturbed - gamma;
  const Eigen::MatrixXd e21 = u2.transpose() * e * u1;
  const double e_norm = e.operatorNorm();
  rep.applicable = rep.eigengap > 0.0 && e_norm <= rep.eigengap / 5.0;
  if (rep.eigengap > 0.0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(e21);
    rep.bound = 4.0 * (svd.singularValues().size() ? svd.singularValues().maxCoeff() : 0.0) /
                rep.eigengap;
  }

  const SymEig pe = sym_eig(perturbed);
  const Eigen::MatrixXd v = pe.vectors.rightCols(r);  // top-r invariant subspace
  Eigen::JacobiSVD<Eigen::MatrixXd> cross(v.transpose() * u2);
  rep.actual = cross.singularValues().size() ? cross.singularValues().maxCoeff() : 0.0;
  return rep;
}

}  // namespace unravel
