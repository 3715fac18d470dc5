#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "unravel/fisher.hpp"
#include "unravel/mixture.hpp"
#include "unravel/rng.hpp"

using namespace unravel;

namespace {

GaussianMixture tiny_pair() {
  GaussianMixture mix;
  mix.k = 2;
  mix.n = 2;
  mix.weights = {0.5, 0.5};
  mix.means = {Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(-1.0, 0.0)};
  mix.covariances = {Eigen::Matrix2d::Identity() * 0.25, Eigen::Matrix2d::Identity() * 0.25};
  return mix;
}

std::string catch_message(const GaussianMixture& mix) {
  try {
    mix.validate();
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("validate names the offending field") {
  GaussianMixture mix = tiny_pair();

  SUBCASE("negative weight") {
    mix.weights[1] = -0.5;
    CHECK(catch_message(mix).find("weights[1]") != std::string::npos);
  }
  SUBCASE("weights do not sum to one") {
    mix.weights = {0.5, 0.6};
    CHECK(catch_message(mix).find("weights") != std::string::npos);
  }
  SUBCASE("wrong mean dimension") {
    mix.means[0] = Eigen::Vector3d(1.0, 0.0, 0.0);
    CHECK(catch_message(mix).find("means[0]") != std::string::npos);
  }
  SUBCASE("asymmetric covariance") {
    mix.covariances[1](0, 1) = 0.3;
    const std::string msg = catch_message(mix);
    CHECK(msg.find("covariances[1]") != std::string::npos);
    CHECK(msg.find("symmetric") != std::string::npos);
  }
  SUBCASE("non positive definite covariance") {
    mix.covariances[0] << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3 and -1
    CHECK(catch_message(mix).find("covariances[0]") != std::string::npos);
  }
  SUBCASE("valid mixture passes") { CHECK(catch_message(mix).empty()); }
}

TEST_CASE("pancake moments match the closed form") {
  const int n = 6;
  const double d = 1.5, sigma = 0.1, w1 = 0.3;
  const GaussianMixture mix = parallel_pancakes(n, d, sigma, w1);
  mix.validate();

  CHECK(mix.mean().norm() < 1e-14);

  // separation along e1 is exactly 2d, so the total covariance picks up
  // w1 w2 (2d)^2 on top of the intra-component sigma^2
  const Eigen::MatrixXd total = mix.total_covariance();
  const double expected_11 = 4.0 * d * d * w1 * (1.0 - w1) + sigma * sigma;
  CHECK(total(0, 0) == doctest::Approx(expected_11).epsilon(1e-12));
  for (int i = 1; i < n; ++i) CHECK(total(i, i) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((total - Eigen::MatrixXd(total.diagonal().asDiagonal())).norm() < 1e-12);

  CHECK(mix.min_weight() == doctest::Approx(0.3));
  CHECK_FALSE(mix.is_isotropic());
}

TEST_CASE("isotropize produces isotropic position") {
  Rng rng(31);
  GaussianMixture mix = tiny_pair();
  mix.means[0] += Eigen::Vector2d(0.5, 2.0);
  mix.covariances[1] = random_spd(2, rng);

  const GaussianMixture iso = isotropize(mix);
  CHECK(iso.is_isotropic(1e-10));
  CHECK(iso.mean().norm() < 1e-10);
  CHECK((iso.second_moment() - Eigen::Matrix2d::Identity()).norm() < 1e-10);

  // idempotent: isotropizing an isotropic mixture is (numerically) a no-op
  const GaussianMixture twice = isotropize(iso);
  CHECK((twice.means[0] - iso.means[0]).norm() < 1e-9);
  CHECK((twice.covariances[1] - iso.covariances[1]).norm() < 1e-9);
}

TEST_CASE("isotropic_params rejects a rank-deficient mixture") {
  // each covariance passes validation on its own, but the huge mean spread
  // along e1 pushes the e2 eigenvalue below the relative floor of the total
  GaussianMixture mix = tiny_pair();
  mix.means[0] << 300.0, 0.0;
  mix.means[1] << -300.0, 0.0;
  mix.covariances[0] = Eigen::Vector2d(0.25, 1e-12).asDiagonal();
  mix.covariances[1] = mix.covariances[0];
  CHECK_THROWS_WITH_AS((void)isotropic_params(mix), doctest::Contains("rank-deficient"),
                       std::runtime_error);
}

TEST_CASE("sampling is deterministic and matches weights") {
  const GaussianMixture mix = parallel_pancakes(4, 1.0, 0.2, 0.3);
  const LabeledSample a = sample(mix, 5000, 99);
  const LabeledSample b = sample(mix, 5000, 99);
  CHECK((a.points - b.points).norm() == 0.0);
  CHECK(a.labels == b.labels);

  const LabeledSample c = sample(mix, 5000, 100);
  CHECK((a.points - c.points).norm() != 0.0);

  int count0 = 0;
  for (const int label : a.labels) count0 += label == 0 ? 1 : 0;
  CHECK(count0 / 5000.0 == doctest::Approx(0.3).epsilon(0.1));
}

TEST_CASE("per-component sample moments match the parameters") {
  Rng rng(17);
  GaussianMixture mix = tiny_pair();
  mix.covariances[0] = random_spd(2, rng);
  const LabeledSample drawn = sample(mix, 200000, 3);

  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  Eigen::Matrix2d sumsq = Eigen::Matrix2d::Zero();
  int count = 0;
  for (Eigen::Index j = 0; j < drawn.points.rows(); ++j) {
    if (drawn.labels[static_cast<std::size_t>(j)] != 0) continue;
    const Eigen::Vector2d x = drawn.points.row(j).transpose();
    sum += x;
    sumsq += x * x.transpose();
    ++count;
  }
  const Eigen::Vector2d mean = sum / count;
  const Eigen::Matrix2d cov = sumsq / count - mean * mean.transpose();
  CHECK((mean - mix.means[0]).norm() < 0.02);
  CHECK((cov - mix.covariances[0]).norm() < 0.03);
}

TEST_CASE("sample decomposes into labels, normals, materialize") {
  // This layering is load-bearing for common-random-number experiments:
  // reusing (labels, z) under transformed parameters yields coupled draws.
  const GaussianMixture mix = parallel_pancakes(3, 1.0, 0.3, 0.4);
  const Eigen::Index m = 400;
  const std::uint64_t seed = 2024;

  Rng rng(seed);
  const std::vector<int> labels = draw_labels(mix, m, rng);
  const Eigen::MatrixXd z = rng.normal_matrix(m, mix.n);
  const Eigen::MatrixXd pts = materialize(mix.means, cholesky_factors(mix), labels, z);

  const LabeledSample drawn = sample(mix, m, seed);
  CHECK(drawn.labels == labels);
  CHECK((drawn.points - pts).norm() == 0.0);
}

TEST_CASE("pushforward sampling commutes with affine maps") {
  const GaussianMixture mix = parallel_pancakes(3, 1.0, 0.3, 0.5);
  Rng map_rng(8);
  const AffineMap map = random_affine(3, 50.0, map_rng);
  const GaussianMixture moved = apply_affine(mix, map);
  moved.validate();

  // transform the Cholesky factors covariantly: (A L)(A L)^T = A Sigma A^T
  std::vector<Eigen::MatrixXd> factors = cholesky_factors(mix);
  std::vector<Eigen::VectorXd> means = mix.means;
  for (int i = 0; i < mix.k; ++i) {
    factors[static_cast<std::size_t>(i)] = map.linear * factors[static_cast<std::size_t>(i)];
    means[static_cast<std::size_t>(i)] = map(mix.means[static_cast<std::size_t>(i)]);
    const Eigen::MatrixXd rebuilt = factors[static_cast<std::size_t>(i)] *
                                    factors[static_cast<std::size_t>(i)].transpose();
    CHECK((rebuilt - moved.covariances[static_cast<std::size_t>(i)]).norm() < 1e-10);
  }

  Rng rng(77);
  const std::vector<int> labels = draw_labels(mix, 300, rng);
  const Eigen::MatrixXd z = rng.normal_matrix(300, mix.n);
  const Eigen::MatrixXd base = materialize(mix.means, cholesky_factors(mix), labels, z);
  const Eigen::MatrixXd pushed = materialize(means, factors, labels, z);
  CHECK((map.apply_rows(base) - pushed).norm() < 1e-10 * pushed.norm());
}

TEST_CASE("apply_affine transforms moments consistently") {
  Rng rng(5);
  GaussianMixture mix = tiny_pair();
  mix.covariances[0] = random_spd(2, rng);
  const AffineMap map = random_affine(2, 100.0, rng);
  const GaussianMixture moved = apply_affine(mix, map);

  const Eigen::VectorXd expected_mean = map(mix.mean());
  CHECK((moved.mean() - expected_mean).norm() < 1e-12);
  const Eigen::MatrixXd expected_total =
      map.linear * mix.total_covariance() * map.linear.transpose();
  CHECK((moved.total_covariance() - expected_total).norm() < 1e-10);
}

TEST_CASE("submixture renormalizes") {
  GaussianMixture mix;
  mix.k = 3;
  mix.n = 2;
  mix.weights = {0.2, 0.5, 0.3};
  for (int i = 0; i < 3; ++i) {
    mix.means.push_back(Eigen::Vector2d(i, -i));
    mix.covariances.push_back(Eigen::Matrix2d::Identity());
  }
  const GaussianMixture sub = submixture(mix, {0, 2});
  REQUIRE(sub.k == 2);
  CHECK(sub.weights[0] == doctest::Approx(0.4));
  CHECK(sub.weights[1] == doctest::Approx(0.6));
  CHECK(sub.weights[0] + sub.weights[1] == 1.0);
  CHECK((sub.means[1] - Eigen::Vector2d(2, -2)).norm() == 0.0);
}

TEST_CASE("random_separable_mixture hits the overlap target") {
  for (const int k : {2, 3, 4}) {
    const double target = 0.01;
    const GaussianMixture mix = random_separable_mixture(k, 6, target, 11 + k);
    mix.validate();
    CHECK(mix.is_isotropic(1e-8));
    const double phi = overlap(mix);
    CHECK(phi == doctest::Approx(target).epsilon(0.2));
  }
}

TEST_CASE("balanced_symmetric_mixture equalizes component geometry") {
  for (const int k : {2, 3, 4}) {
    const GaussianMixture mix = balanced_symmetric_mixture(k, 5, 0.02, 40 + k);
    mix.validate();
    CHECK(mix.is_isotropic(1e-8));
    CHECK(overlap(mix) == doctest::Approx(0.02).epsilon(0.2));
    // orbit symmetry: every component has the same mean norm and spectrum
    for (int i = 1; i < k; ++i) {
      CHECK(mix.means[static_cast<std::size_t>(i)].norm() ==
            doctest::Approx(mix.means[0].norm()).epsilon(1e-9));
      const Eigen::VectorXd s0 =
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(mix.covariances[0]).eigenvalues();
      const Eigen::VectorXd si = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(
                                     mix.covariances[static_cast<std::size_t>(i)])
                                     .eigenvalues();
      CHECK((s0 - si).norm() < 1e-9);
    }
  }
}

TEST_CASE("random_affine hits the requested condition number") {
  Rng rng(64);
  const AffineMap map = random_affine(5, 1000.0, rng);
  CHECK(map.invertible());
  CHECK(map.condition_number() == doctest::Approx(1000.0).epsilon(1e-6));
}

TEST_CASE("random_orthogonal is orthogonal and deterministic") {
  Rng rng(12);
  const Eigen::MatrixXd q = random_orthogonal(4, rng);
  CHECK((q * q.transpose() - Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-12);
  Rng rng2(12);
  CHECK((q - random_orthogonal(4, rng2)).norm() == 0.0);
}
