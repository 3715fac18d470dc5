#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "unravel/clusterer.hpp"
#include "unravel/evaluation.hpp"
#include "unravel/mixture.hpp"
#include "unravel/rng.hpp"

using namespace unravel;

namespace {

PolyhedralPartition identity_halfspace(const Eigen::VectorXd& h, double t) {
  const int n = static_cast<int>(h.size());
  PolyhedralPartition partition;
  partition.n = n;
  partition.leaves = 2;
  partition.root = std::make_unique<PartitionNode>();
  partition.root->whiten = AffineMap::identity(n);
  partition.root->h = h;
  partition.root->t = t;
  partition.root->left = std::make_unique<PartitionNode>();
  partition.root->left->leaf_id = 0;
  partition.root->right = std::make_unique<PartitionNode>();
  partition.root->right->leaf_id = 1;
  return partition;
}

PolyhedralPartition single_leaf(int n) {
  PolyhedralPartition partition;
  partition.n = n;
  partition.leaves = 1;
  partition.root = std::make_unique<PartitionNode>();
  partition.root->leaf_id = 0;
  partition.root->witness = Eigen::VectorXd::Zero(n);
  return partition;
}

// brute-force best assignment: permuting the larger side enumerates every
// (subset, bijection) combination against the smaller side
double brute_force_best(const Eigen::MatrixXd& score) {
  if (score.rows() > score.cols()) return brute_force_best(score.transpose());
  const int nr = static_cast<int>(score.rows());
  const int nc = static_cast<int>(score.cols());
  std::vector<int> cols(static_cast<std::size_t>(nc));
  std::iota(cols.begin(), cols.end(), 0);
  double best = -1e300;
  do {
    double total = 0.0;
    for (int r = 0; r < nr; ++r) total += score(r, cols[static_cast<std::size_t>(r)]);
    best = std::max(best, total);
  } while (std::next_permutation(cols.begin(), cols.end()));
  return best;
}

double assignment_score(const Eigen::MatrixXd& score, const std::vector<int>& matching) {
  double total = 0.0;
  for (int r = 0; r < static_cast<int>(matching.size()); ++r)
    if (matching[static_cast<std::size_t>(r)] >= 0)
      total += score(r, matching[static_cast<std::size_t>(r)]);
  return total;
}

}  // namespace

TEST_CASE("optimal_assignment equals brute force on random matrices") {
  Rng rng(1234);
  for (int trial = 0; trial < 30; ++trial) {
    const int nr = 2 + static_cast<int>(rng.below(4));
    const int nc = 2 + static_cast<int>(rng.below(4));
    Eigen::MatrixXd score(nr, nc);
    for (int r = 0; r < nr; ++r)
      for (int c = 0; c < nc; ++c) score(r, c) = rng.uniform();

    const std::vector<int> matching = optimal_assignment(score);
    REQUIRE(static_cast<int>(matching.size()) == nr);

    // one-to-one over assigned pairs
    std::vector<int> used;
    int assigned = 0;
    for (const int c : matching) {
      if (c < 0) continue;
      CHECK(std::find(used.begin(), used.end(), c) == used.end());
      used.push_back(c);
      ++assigned;
    }
    CHECK(assigned == std::min(nr, nc));
    CHECK(assignment_score(score, matching) == doctest::Approx(brute_force_best(score)));
  }
}

TEST_CASE("labeled_error on hand-labeled points") {
  Eigen::VectorXd h(2);
  h << 1, 0;
  const PolyhedralPartition partition = identity_halfspace(h, 0.0);

  Eigen::MatrixXd pts(4, 2);
  pts << -1, 0, -2, 1, 1, 0, 2, -1;

  SUBCASE("perfectly aligned labels") {
    const ErrorReport report = labeled_error(partition, {pts, {0, 0, 1, 1}}, 2);
    CHECK(report.error == doctest::Approx(0.0));
    CHECK(report.confusion.sum() == doctest::Approx(1.0));
  }
  SUBCASE("flipped labels still match after permutation") {
    const ErrorReport report = labeled_error(partition, {pts, {1, 1, 0, 0}}, 2);
    CHECK(report.error == doctest::Approx(0.0));
  }
  SUBCASE("one stray point costs 1/m") {
    const ErrorReport report = labeled_error(partition, {pts, {0, 1, 1, 1}}, 2);
    CHECK(report.error == doctest::Approx(0.25));
  }
}

TEST_CASE("partition_error matches the gaussian tail oracle") {
  // balanced pair at +-2 e1 with unit covariance, cut at 0: the mass on the
  // wrong side is Phi(-2) per the normal cdf
  GaussianMixture mix;
  mix.k = 2;
  mix.n = 2;
  mix.weights = {0.5, 0.5};
  mix.means = {Eigen::Vector2d(2, 0), Eigen::Vector2d(-2, 0)};
  mix.covariances = {Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Identity()};

  Eigen::VectorXd h(2);
  h << 1, 0;
  const ErrorReport report = partition_error(identity_halfspace(h, 0.0), mix, 200000, 99);
  CHECK(report.error == doctest::Approx(0.022750131948179207).epsilon(0.08));
  CHECK(report.leaves == 2);
  CHECK(report.matching[0] == 1);  // left leaf holds the mean at -2
  CHECK(report.matching[1] == 0);
}

TEST_CASE("weighted one-dimensional oracle") {
  // w1 = 0.7 N(-1.5, 1), w2 = 0.3 N(2.5, 0.25), threshold 0.8:
  // error = 0.7 P(x >= 0.8 | left) + 0.3 P(x < 0.8 | right) = 0.00760795...
  GaussianMixture mix;
  mix.k = 2;
  mix.n = 1;
  mix.weights = {0.7, 0.3};
  mix.means = {Eigen::VectorXd::Constant(1, -1.5), Eigen::VectorXd::Constant(1, 2.5)};
  mix.covariances = {Eigen::MatrixXd::Constant(1, 1, 1.0), Eigen::MatrixXd::Constant(1, 1, 0.25)};

  const ErrorReport report =
      partition_error(identity_halfspace(Eigen::VectorXd::Ones(1), 0.8), mix, 300000, 3);
  CHECK(report.error == doctest::Approx(0.0076079557948761281).epsilon(0.15));
}

TEST_CASE("single leaf leaves half of a balanced pair unmatched") {
  GaussianMixture mix;
  mix.k = 2;
  mix.n = 2;
  mix.weights = {0.5, 0.5};
  mix.means = {Eigen::Vector2d(5, 0), Eigen::Vector2d(-5, 0)};
  mix.covariances = {Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Identity()};

  const ErrorReport report = partition_error(single_leaf(2), mix, 50000, 1);
  CHECK(report.error == doctest::Approx(0.5).epsilon(0.04));
}

TEST_CASE("partition_error rejects tiny evaluation budgets") {
  GaussianMixture mix;
  mix.k = 1;
  mix.n = 1;
  mix.weights = {1.0};
  mix.means = {Eigen::VectorXd::Zero(1)};
  mix.covariances = {Eigen::MatrixXd::Identity(1, 1)};
  CHECK_THROWS_AS((void)partition_error(single_leaf(1), mix, 999, 0), std::invalid_argument);
}

TEST_CASE("identity map gives exactly equal invariance arms") {
  const GaussianMixture mix = parallel_pancakes(4, 1.0, 0.05, 0.5);
  ExperimentConfig config;
  config.unravel.k = 2;
  config.unravel.alpha = 2.0;
  config.unravel.seed = 5;
  config.m_sample = 12000;
  config.m_eval = 6000;

  const InvarianceResult result =
      affine_invariance_experiment(mix, AffineMap::identity(4), config, 3);
  REQUIRE(result.rows.size() == 6);
  CHECK(result.mean_error_original == result.mean_error_transformed);
  for (std::size_t i = 0; i < result.rows.size(); i += 2)
    CHECK(result.rows[i].error == result.rows[i + 1].error);
}

TEST_CASE("baseline splits spherical pairs but not stretched pancakes") {
  // spherical pair, separation along e1 with unit variance: the top
  // principal direction is the separating one, so the baseline succeeds
  GaussianMixture spherical;
  spherical.k = 2;
  spherical.n = 4;
  spherical.weights = {0.5, 0.5};
  Eigen::VectorXd m0 = Eigen::VectorXd::Zero(4);
  m0[0] = 4.0;
  spherical.means = {m0, -m0};
  spherical.covariances = {0.25 * Eigen::MatrixXd::Identity(4, 4),
                           0.25 * Eigen::MatrixXd::Identity(4, 4)};

  const LabeledSample easy = sample(spherical, 20000, 8);
  const PolyhedralPartition base_easy = baseline_pca_cluster(easy.points, 2);
  CHECK(labeled_error(base_easy, easy, 2).error <= 0.05);

  // pancakes plus a high-variance nuisance coordinate: raw PCA projects
  // onto the nuisance direction and finds no gap
  GaussianMixture stretched = parallel_pancakes(4, 1.0, 0.05, 0.5);
  AffineMap stretch = AffineMap::identity(4);
  stretch.linear(3, 3) = 30.0;
  stretched = apply_affine(stretched, stretch);

  const LabeledSample hard = sample(stretched, 20000, 9);
  const PolyhedralPartition base_hard = baseline_pca_cluster(hard.points, 2);
  CHECK(labeled_error(base_hard, hard, 2).error >= 0.2);

  UnravelConfig cfg;
  cfg.k = 2;
  cfg.alpha = 1.0;  // strong damping: the weighted mean stays quiet at this sample size
  cfg.seed = 10;
  const PolyhedralPartition ours = unravel::unravel(hard.points, cfg);
  CHECK(labeled_error(ours, hard, 2).error <= 0.05);
}

TEST_CASE("baseline handles k = 1") {
  Rng rng(2);
  const PolyhedralPartition partition = baseline_pca_cluster(rng.normal_matrix(100, 3), 1);
  CHECK(partition.leaves == 1);
}

TEST_CASE("route_components walks the tree") {
  const GaussianMixture mix = parallel_pancakes(6, 1.0, 0.02, 0.5);
  const LabeledSample drawn = sample(mix, 20000, 12);
  UnravelConfig cfg;
  cfg.k = 2;
  cfg.alpha = 2.0;
  const PolyhedralPartition partition = unravel::unravel(drawn.points, cfg);
  REQUIRE(partition.leaves == 2);

  const std::vector<NodeComponents> routed = route_components(partition, mix);
  REQUIRE(routed.size() == 3);  // root + 2 leaves, preorder
  CHECK(routed[0].parent_index == -1);
  CHECK_FALSE(routed[0].leaf);
  CHECK(routed[0].components == std::vector<int>{0, 1});
  CHECK(routed[1].leaf);
  CHECK(routed[2].leaf);
  CHECK(routed[1].parent_index == 0);
  CHECK(routed[2].parent_index == 0);
  // one component mean per leaf
  CHECK(routed[1].components.size() == 1);
  CHECK(routed[2].components.size() == 1);
  CHECK(routed[1].components[0] != routed[2].components[0]);
}
