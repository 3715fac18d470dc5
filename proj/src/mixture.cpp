#include "unravel/mixture.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "unravel/fisher.hpp"
#include "unravel/linalg.hpp"

namespace unravel {

bool AffineMap::invertible() const {
  if (linear.rows() != linear.cols()) return false;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(linear);
  return lu.isInvertible();
}

double AffineMap::condition_number() const {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(linear);
  const double smin = svd.singularValues().minCoeff();
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return svd.singularValues().maxCoeff() / smin;
}

void GaussianMixture::validate() const {
  if (k < 1) throw std::invalid_argument("mixture: k must be >= 1");
  if (n < 1) throw std::invalid_argument("mixture: n must be >= 1");
  if (static_cast<int>(weights.size()) != k) throw std::invalid_argument("mixture: weights size != k");
  if (static_cast<int>(means.size()) != k) throw std::invalid_argument("mixture: means size != k");
  if (static_cast<int>(covariances.size()) != k)
    throw std::invalid_argument("mixture: covariances size != k");

  double wsum = 0.0;
  for (int i = 0; i < k; ++i) {
    if (!(weights[i] > 0.0)) {
      std::ostringstream os;
      os << "weights[" << i << "]: must be positive, got " << weights[i];
      throw std::invalid_argument(os.str());
    }
    wsum += weights[i];
  }
  if (std::abs(wsum - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "weights: sum to " << wsum << ", expected 1 within 1e-12";
    throw std::invalid_argument(os.str());
  }

  for (int i = 0; i < k; ++i) {
    if (means[i].size() != n) {
      std::ostringstream os;
      os << "means[" << i << "]: length " << means[i].size() << ", expected " << n;
      throw std::invalid_argument(os.str());
    }
    const Eigen::MatrixXd& s = covariances[i];
    if (s.rows() != n || s.cols() != n) {
      std::ostringstream os;
      os << "covariances[" << i << "]: shape " << s.rows() << "x" << s.cols() << ", expected " << n
         << "x" << n;
      throw std::invalid_argument(os.str());
    }
    for (int r = 0; r < n; ++r)
      for (int c = r + 1; c < n; ++c)
        if (std::abs(s(r, c) - s(c, r)) > 1e-12) {
          std::ostringstream os;
          os << "covariances[" << i << "]: not symmetric at (" << r << "," << c << ")";
          throw std::invalid_argument(os.str());
        }
    const SymEig eig = sym_eig(s);
    if (!(eig.values.minCoeff() > 1e-12 * s.trace())) {
      std::ostringstream os;
      os << "covariances[" << i << "]: not positive definite (smallest eigenvalue "
         << eig.values.minCoeff() << ")";
      throw std::invalid_argument(os.str());
    }
  }
}

double GaussianMixture::min_weight() const {
  double w = 1.0;
  for (double wi : weights) w = std::min(w, wi);
  return w;
}

Eigen::VectorXd GaussianMixture::mean() const {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < k; ++i) m += weights[i] * means[i];
  return m;
}

Eigen::MatrixXd GaussianMixture::second_moment() const {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < k; ++i)
    t += weights[i] * (covariances[i] + means[i] * means[i].transpose());
  return t;
}

Eigen::MatrixXd GaussianMixture::total_covariance() const {
  const Eigen::VectorXd m = mean();
  return second_moment() - m * m.transpose();
}

Eigen::MatrixXd GaussianMixture::sigma_bar() const {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < k; ++i) s += weights[i] * covariances[i];
  return s;
}

bool GaussianMixture::is_isotropic(double tol) const {
  if (mean().cwiseAbs().maxCoeff() > tol) return false;
  const Eigen::MatrixXd t = second_moment() - Eigen::MatrixXd::Identity(n, n);
  return t.cwiseAbs().maxCoeff() <= tol;
}

std::vector<int> draw_labels(const GaussianMixture& mix, Eigen::Index m, Rng& rng) {
  std::vector<int> labels(static_cast<std::size_t>(m));
  for (Eigen::Index j = 0; j < m; ++j) {
    const double u = rng.uniform();
    double acc = 0.0;
    int pick = mix.k - 1;
    for (int i = 0; i < mix.k; ++i) {
      acc += mix.weights[i];
      if (u < acc) {
        pick = i;
        break;
      }
    }
    labels[static_cast<std::size_t>(j)] = pick;
  }
  return labels;
}

Eigen::MatrixXd materialize(const std::vector<Eigen::VectorXd>& means,
                            const std::vector<Eigen::MatrixXd>& factors,
                            const std::vector<int>& labels, const Eigen::MatrixXd& z) {
  const Eigen::Index m = z.rows();
  if (static_cast<Eigen::Index>(labels.size()) != m)
    throw std::invalid_argument("materialize: labels/z length mismatch");
  Eigen::MatrixXd points(m, z.cols());
  for (Eigen::Index j = 0; j < m; ++j) {
    const int l = labels[static_cast<std::size_t>(j)];
    points.row(j) = (means[l] + factors[l] * z.row(j).transpose()).transpose();
  }
  return points;
}

std::vector<Eigen::MatrixXd> cholesky_factors(const GaussianMixture& mix) {
  std::vector<Eigen::MatrixXd> factors;
  factors.reserve(mix.covariances.size());
  for (const auto& s : mix.covariances) {
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("cholesky_factors: covariance not positive definite");
    factors.push_back(llt.matrixL());
  }
  return factors;
}

LabeledSample sample(const GaussianMixture& mix, Eigen::Index m, std::uint64_t seed) {
  mix.validate();
  if (m < 1) throw std::invalid_argument("sample: m must be >= 1");
  Rng rng(seed);
  LabeledSample out;
  out.labels = draw_labels(mix, m, rng);
  const Eigen::MatrixXd z = rng.normal_matrix(m, mix.n);
  out.points = materialize(mix.means, cholesky_factors(mix), out.labels, z);
  return out;
}

GaussianMixture apply_affine(const GaussianMixture& mix, const AffineMap& map) {
  if (map.linear.rows() != mix.n || map.linear.cols() != mix.n)
    throw std::invalid_argument("apply_affine: map dimension mismatch");
  if (!map.invertible()) throw std::invalid_argument("apply_affine: singular linear part");
  GaussianMixture out = mix;
  for (int i = 0; i < mix.k; ++i) {
    out.means[i] = map(mix.means[i]);
    out.covariances[i] = map.linear * mix.covariances[i] * map.linear.transpose();
    // round back to exact symmetry so downstream checks see clean inputs
    out.covariances[i] = ((out.covariances[i] + out.covariances[i].transpose()) / 2.0).eval();
  }
  return out;
}

AffineMap isotropic_params(const GaussianMixture& mix) {
  mix.validate();
  const Eigen::MatrixXd t = mix.total_covariance();
  const SymEig eig = sym_eig(t);
  const double floor = 1e-12 * std::max(t.trace(), 1e-300);
  for (int i = 0; i < mix.n; ++i) {
    if (!(eig.values[i] > floor)) {
      std::ostringstream os;
      os << "isotropic_params: total covariance rank-deficient (eigenvalue " << i << " = "
         << eig.values[i] << ")";
      throw std::runtime_error(os.str());
    }
  }
  const Eigen::MatrixXd w =
      eig.vectors * eig.values.cwiseInverse().cwiseSqrt().asDiagonal() * eig.vectors.transpose();
  return {w, -w * mix.mean()};
}

GaussianMixture isotropize(const GaussianMixture& mix) {
  return apply_affine(mix, isotropic_params(mix));
}

GaussianMixture submixture(const GaussianMixture& mix, const std::vector<int>& components) {
  if (components.empty()) throw std::invalid_argument("submixture: empty component list");
  GaussianMixture out;
  out.n = mix.n;
  out.k = static_cast<int>(components.size());
  double wsum = 0.0;
  for (int c : components) {
    if (c < 0 || c >= mix.k) throw std::invalid_argument("submixture: component index out of range");
    wsum += mix.weights[c];
  }
  for (int c : components) {
    out.weights.push_back(mix.weights[c] / wsum);
    out.means.push_back(mix.means[c]);
    out.covariances.push_back(mix.covariances[c]);
  }
  // renormalized weights can drift off 1 by a few ulps; pin the last one
  double acc = 0.0;
  for (int i = 0; i + 1 < out.k; ++i) acc += out.weights[i];
  out.weights[out.k - 1] = 1.0 - acc;
  return out;
}

GaussianMixture parallel_pancakes(int n, double d, double sigma_thin, double w1) {
  if (n < 1) throw std::invalid_argument("parallel_pancakes: n must be >= 1");
  if (!(d > 0.0)) throw std::invalid_argument("parallel_pancakes: d must be positive");
  if (!(sigma_thin > 0.0)) throw std::invalid_argument("parallel_pancakes: sigma_thin must be positive");
  if (!(w1 > 0.0 && w1 < 1.0)) throw std::invalid_argument("parallel_pancakes: w1 must be in (0,1)");
  GaussianMixture mix;
  mix.k = 2;
  mix.n = n;
  mix.weights = {w1, 1.0 - w1};
  Eigen::VectorXd mu1 = Eigen::VectorXd::Zero(n), mu2 = Eigen::VectorXd::Zero(n);
  mu1[0] = 2.0 * d * (1.0 - w1);  // total separation 2d, weighted mean zero
  mu2[0] = -2.0 * d * w1;
  mix.means = {mu1, mu2};
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(n, n);
  cov(0, 0) = sigma_thin * sigma_thin;
  mix.covariances = {cov, cov};
  return mix;
}

Eigen::MatrixXd random_spd(int n, Rng& rng, double ridge) {
  const Eigen::MatrixXd g = rng.normal_matrix(n, n);
  return (g * g.transpose()) / static_cast<double>(n) + ridge * Eigen::MatrixXd::Identity(n, n);
}

Eigen::MatrixXd random_orthogonal(int n, Rng& rng) {
  const Eigen::MatrixXd g = rng.normal_matrix(n, n);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i)
    if (r(i, i) < 0.0) q.col(i) = -q.col(i);
  return q;
}

AffineMap random_affine(int n, double condition, Rng& rng) {
  if (!(condition >= 1.0)) throw std::invalid_argument("random_affine: condition must be >= 1");
  const Eigen::MatrixXd u = random_orthogonal(n, rng);
  const Eigen::MatrixXd v = random_orthogonal(n, rng);
  Eigen::VectorXd s(n);
  const double half = 0.5 * std::log(condition);
  for (int i = 0; i < n; ++i) {
    const double f = (n == 1) ? 0.0 : static_cast<double>(i) / (n - 1);
    s[i] = std::exp(half - 2.0 * half * f);  // from sqrt(c) down to 1/sqrt(c)
  }
  AffineMap map{u * s.asDiagonal() * v.transpose(), rng.normal_vector(n)};
  return map;
}

namespace {

// Scale the covariance blocks inside the intermean span F by s (congruence by
// I + (sqrt(s)-1) F F^T), keeping the matrices SPD and the means untouched.
GaussianMixture rescale_intermean_variance(const GaussianMixture& mix, const Eigen::MatrixXd& f,
                                           double s) {
  const Eigen::MatrixXd c = Eigen::MatrixXd::Identity(mix.n, mix.n) +
                            (std::sqrt(s) - 1.0) * (f * f.transpose());
  GaussianMixture out = mix;
  for (int i = 0; i < mix.k; ++i) {
    out.covariances[i] = c * mix.covariances[i] * c;
    out.covariances[i] = ((out.covariances[i] + out.covariances[i].transpose()) / 2.0).eval();
  }
  return out;
}

// Bisection on the intermean-variance scale until the isotropic overlap lands
// within 10% of target (inside the documented 20% contract).
GaussianMixture rescale_to_overlap(const GaussianMixture& raw, double target) {
  if (!(target > 0.0 && target < 1.0))
    throw std::invalid_argument("rescale_to_overlap: target must be in (0,1)");
  Eigen::MatrixXd mean_cols(raw.n, raw.k);
  const Eigen::VectorXd center = raw.mean();
  for (int i = 0; i < raw.k; ++i) mean_cols.col(i) = raw.means[i] - center;
  const Eigen::MatrixXd f = column_space_basis(mean_cols, 1e-10);
  if (f.cols() != raw.k - 1)
    throw std::runtime_error("rescale_to_overlap: means do not span k-1 dimensions");

  auto phi_at = [&](double s) { return overlap(rescale_intermean_variance(raw, f, s)); };

  double lo = 1e-12, hi = 1.0;
  double phi_hi = phi_at(hi);
  int iters = 0;
  while (phi_hi < target && hi < 1e8) {
    hi *= 10.0;
    phi_hi = phi_at(hi);
    if (++iters > 100)
      throw std::runtime_error("rescale_to_overlap: target overlap infeasible after 100 rescale iterations");
  }
  if (phi_hi < target)
    throw std::runtime_error("rescale_to_overlap: target overlap infeasible after 100 rescale iterations");

  for (; iters < 100; ++iters) {
    const double mid = std::sqrt(lo * hi);
    const double phi = phi_at(mid);
    if (std::abs(phi - target) <= 0.1 * target)
      return isotropize(rescale_intermean_variance(raw, f, mid));
    (phi > target ? hi : lo) = mid;
  }
  throw std::runtime_error("rescale_to_overlap: target overlap infeasible after 100 rescale iterations");
}

}  // namespace

GaussianMixture random_separable_mixture(int k, int n, double target_overlap, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("random_separable_mixture: k must be >= 2");
  if (n < k - 1) throw std::invalid_argument("random_separable_mixture: need n >= k-1");
  if (!(target_overlap > 0.0 && target_overlap < 1.0))
    throw std::invalid_argument("random_separable_mixture: target_overlap must be in (0,1)");
  Rng rng(derive_seed(seed, 0x5eedu));

  GaussianMixture mix;
  mix.k = k;
  mix.n = n;
  double wsum = 0.0;
  for (int i = 0; i < k; ++i) {
    mix.weights.push_back(0.75 + 0.5 * rng.uniform());
    wsum += mix.weights.back();
  }
  for (double& w : mix.weights) w /= wsum;
  double acc = 0.0;
  for (int i = 0; i + 1 < k; ++i) acc += mix.weights[i];
  mix.weights[k - 1] = 1.0 - acc;

  for (int i = 0; i < k; ++i) mix.means.push_back(rng.normal_vector(n));
  Eigen::VectorXd center = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < k; ++i) center += mix.weights[i] * mix.means[i];
  for (int i = 0; i < k; ++i) mix.means[i] -= center;

  for (int i = 0; i < k; ++i)
    mix.covariances.push_back((0.5 + rng.uniform()) * random_spd(n, rng));

  return rescale_to_overlap(mix, target_overlap);
}

GaussianMixture balanced_symmetric_mixture(int k, int n, double target_overlap,
                                           std::uint64_t seed) {
  if (k < 2 || k > 4) throw std::invalid_argument("balanced_symmetric_mixture: k must be 2, 3 or 4");
  if (n < k - 1) throw std::invalid_argument("balanced_symmetric_mixture: need n >= k-1");
  Rng rng(derive_seed(seed, 0xba1a5cedu));

  GaussianMixture mix;
  mix.k = k;
  mix.n = n;
  mix.weights.assign(static_cast<std::size_t>(k), 1.0 / k);
  const Eigen::MatrixXd sigma0 = random_spd(n, rng);
  const double len = 0.7 + 0.6 * rng.uniform();

  if (k == 2) {
    Eigen::VectorXd mu = rng.normal_vector(n);
    mu *= len / mu.norm();
    mix.means = {mu, -mu};
    mix.covariances = {sigma0, sigma0};
  } else if (k == 3) {
    const double psi = rng.uniform(0.0, 2.0 * M_PI);
    Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(n, n);
    const double c = std::cos(2.0 * M_PI / 3.0), s = std::sin(2.0 * M_PI / 3.0);
    rot(0, 0) = c;
    rot(0, 1) = -s;
    rot(1, 0) = s;
    rot(1, 1) = c;
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(n);
    mu[0] = len * std::cos(psi);
    mu[1] = len * std::sin(psi);
    Eigen::MatrixXd sig = sigma0;
    for (int i = 0; i < 3; ++i) {
      mix.means.push_back(mu);
      mix.covariances.push_back(((sig + sig.transpose()) / 2.0).eval());
      mu = (rot * mu).eval();
      sig = (rot * sig * rot.transpose()).eval();
    }
  } else {  // k == 4: tetrahedral orbit under three axis sign-flips
    Eigen::VectorXd mu0 = Eigen::VectorXd::Zero(n);
    mu0[0] = mu0[1] = mu0[2] = len / std::sqrt(3.0);
    for (int i = 0; i < 4; ++i) {
      Eigen::VectorXd flip = Eigen::VectorXd::Ones(n);
      if (i == 1) flip[1] = flip[2] = -1.0;
      if (i == 2) flip[0] = flip[2] = -1.0;
      if (i == 3) flip[0] = flip[1] = -1.0;
      mix.means.push_back(flip.asDiagonal() * mu0);
      mix.covariances.push_back(
          (flip.asDiagonal() * sigma0 * flip.asDiagonal()).eval());
    }
  }

  // random global rotation keeps the orbit structure but hides the axes
  const AffineMap spin{random_orthogonal(n, rng), Eigen::VectorXd::Zero(n)};
  return rescale_to_overlap(apply_affine(mix, spin), target_overlap);
}

}  // namespace unravel
