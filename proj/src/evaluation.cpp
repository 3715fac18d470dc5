#include "unravel/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "unravel/isotropy.hpp"
#include "unravel/separator.hpp"

namespace unravel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Classic potentials-based shortest-augmenting-path assignment (minimizing),
// rows <= cols; returns row -> col.
std::vector<int> hungarian_min(const Eigen::MatrixXd& cost) {
  const int nr = static_cast<int>(cost.rows());
  const int nc = static_cast<int>(cost.cols());
  std::vector<double> u(nr + 1, 0.0), v(nc + 1, 0.0);
  std::vector<int> p(nc + 1, 0), way(nc + 1, 0);
  for (int i = 1; i <= nr; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(nc + 1, kInf);
    std::vector<char> used(nc + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= nc; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= nc; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(nr, -1);
  for (int j = 1; j <= nc; ++j)
    if (p[j] >= 1) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

std::vector<int> optimal_assignment(const Eigen::MatrixXd& score) {
  if (score.rows() == 0 || score.cols() == 0)
    return std::vector<int>(static_cast<std::size_t>(score.rows()), -1);
  if (score.rows() <= score.cols()) return hungarian_min(-score);
  // transpose, solve, invert the mapping
  const std::vector<int> col_to_row = hungarian_min((-score).transpose());
  std::vector<int> row_to_col(static_cast<std::size_t>(score.rows()), -1);
  for (int c = 0; c < static_cast<int>(col_to_row.size()); ++c)
    if (col_to_row[static_cast<std::size_t>(c)] >= 0)
      row_to_col[static_cast<std::size_t>(col_to_row[static_cast<std::size_t>(c)])] = c;
  return row_to_col;
}

ErrorReport labeled_error(const PolyhedralPartition& partition, const LabeledSample& sample,
                          int k) {
  const Eigen::Index m = sample.points.rows();
  if (m < 1) throw std::invalid_argument("labeled_error: empty sample");
  if (static_cast<Eigen::Index>(sample.labels.size()) != m)
    throw std::invalid_argument("labeled_error: labels/points length mismatch");

  ErrorReport report;
  report.leaves = partition.leaves;
  // integer counts keep the error an exact ratio of counts
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(partition.leaves, k);
  for (Eigen::Index j = 0; j < m; ++j) {
    const int leaf = partition.classify(sample.points.row(j).transpose());
    const int label = sample.labels[static_cast<std::size_t>(j)];
    if (label < 0 || label >= k) throw std::invalid_argument("labeled_error: label out of range");
    counts(leaf, label) += 1;
  }
  report.confusion = counts.cast<double>() / static_cast<double>(m);
  report.matching = optimal_assignment(report.confusion);
  long matched = 0;
  for (int l = 0; l < partition.leaves; ++l)
    if (report.matching[static_cast<std::size_t>(l)] >= 0)
      matched += counts(l, report.matching[static_cast<std::size_t>(l)]);
  report.error = static_cast<double>(m - matched) / static_cast<double>(m);
  return report;
}

ErrorReport partition_error(const PolyhedralPartition& partition, const GaussianMixture& mix,
                            Eigen::Index m_eval, std::uint64_t seed) {
  if (m_eval < 1000) throw std::invalid_argument("partition_error: m_eval must be >= 1000");
  return labeled_error(partition, sample(mix, m_eval, seed), mix.k);
}

InvarianceResult affine_invariance_experiment(const GaussianMixture& mix, const AffineMap& map,
                                              const ExperimentConfig& config, int trials) {
  if (trials < 1) throw std::invalid_argument("affine_invariance_experiment: trials must be >= 1");
  const GaussianMixture moved = apply_affine(mix, map);

  InvarianceResult result;
  double sum_orig = 0.0, sum_moved = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    const std::uint64_t sample_seed = derive_seed(config.unravel.seed, 1000 + trial);
    const std::uint64_t eval_seed = derive_seed(config.unravel.seed, 5000 + trial);
    UnravelConfig ucfg = config.unravel;
    ucfg.seed = derive_seed(config.unravel.seed, 9000 + trial);

    for (int arm = 0; arm < 2; ++arm) {
      const GaussianMixture& target = arm == 0 ? mix : moved;
      const LabeledSample train = sample(target, config.m_sample, sample_seed);
      const PolyhedralPartition part = unravel(train.points, ucfg);
      const ErrorReport err = partition_error(part, target, config.m_eval, eval_seed);
      (arm == 0 ? sum_orig : sum_moved) += err.error;
      result.rows.push_back({trial, arm == 0 ? "original" : "transformed", err.error, part.leaves,
                             part.internal_nodes(SeparatorMethod::MeanShift),
                             part.internal_nodes(SeparatorMethod::Spectral)});
    }
  }
  result.mean_error_original = sum_orig / trials;
  result.mean_error_transformed = sum_moved / trials;
  return result;
}

namespace {

struct BaselineBuilder {
  const Eigen::MatrixXd& points;
  int k;
  int n;
  int next_leaf = 0;

  std::unique_ptr<PartitionNode> leaf(const std::vector<Eigen::Index>& ids) {
    auto node = std::make_unique<PartitionNode>();
    node->leaf_id = next_leaf++;
    node->witness = points.row(ids.front()).transpose();
    return node;
  }

  std::unique_ptr<PartitionNode> build(std::vector<Eigen::Index> ids, int depth) {
    if (k == 1 || depth >= 2 * k || static_cast<int>(ids.size()) < n + 1) return leaf(ids);

    Eigen::MatrixXd cell(static_cast<Eigen::Index>(ids.size()), n);
    for (Eigen::Index i = 0; i < cell.rows(); ++i)
      cell.row(i) = points.row(ids[static_cast<std::size_t>(i)]);
    const MomentEstimate est = estimate_moments(cell);
    const TopEigenvector top = top_eigenvector(est.covariance);
    if (!(top.value > 0.0)) return leaf(ids);

    // standardize the 1-d projection; no whitening of the cell itself
    const double scale = std::sqrt(top.value);
    AffineMap ctx{Eigen::MatrixXd::Identity(n, n) / scale, -est.mean / scale};
    const Eigen::VectorXd proj = ctx.apply_rows(cell) * top.v;
    const std::optional<double> cut = largest_gap_threshold(
        std::vector<double>(proj.data(), proj.data() + proj.size()), k);
    if (!cut) return leaf(ids);

    std::vector<Eigen::Index> left_ids, right_ids;
    for (Eigen::Index i = 0; i < proj.size(); ++i)
      (proj[i] >= *cut ? right_ids : left_ids).push_back(ids[static_cast<std::size_t>(i)]);
    if (left_ids.empty() || right_ids.empty()) return leaf(ids);

    auto node = std::make_unique<PartitionNode>();
    node->whiten = ctx;
    node->h = top.v;
    node->t = *cut;
    node->choice = DirectionChoice{top.v, SeparatorMethod::Spectral, 0.0, 0.0, top.degenerate};
    node->left = build(std::move(left_ids), depth + 1);
    node->right = build(std::move(right_ids), depth + 1);
    return node;
  }
};

}  // namespace

PolyhedralPartition baseline_pca_cluster(const Eigen::MatrixXd& points, int k) {
  if (k < 1) throw std::invalid_argument("baseline_pca_cluster: k must be >= 1");
  if (points.rows() < 1) throw std::invalid_argument("baseline_pca_cluster: empty point set");
  PolyhedralPartition partition;
  partition.n = static_cast<int>(points.cols());
  BaselineBuilder builder{points, k, partition.n};
  std::vector<Eigen::Index> ids(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) ids[static_cast<std::size_t>(i)] = i;
  partition.root = builder.build(std::move(ids), 0);
  partition.leaves = builder.next_leaf;
  return partition;
}

namespace {

void index_nodes(const PartitionNode* node, int parent, std::vector<const PartitionNode*>& order,
                 std::vector<int>& parents) {
  const int self = static_cast<int>(order.size());
  order.push_back(node);
  parents.push_back(parent);
  if (!node->is_leaf()) {
    index_nodes(node->left.get(), self, order, parents);
    index_nodes(node->right.get(), self, order, parents);
  }
}

}  // namespace

std::vector<NodeComponents> route_components(const PolyhedralPartition& partition,
                                             const GaussianMixture& mix) {
  if (!partition.root) throw std::invalid_argument("route_components: empty partition");
  if (mix.n != partition.n) throw std::invalid_argument("route_components: dimension mismatch");

  std::vector<const PartitionNode*> order;
  std::vector<int> parents;
  index_nodes(partition.root.get(), -1, order, parents);

  std::vector<NodeComponents> out(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    out[i].node_index = static_cast<int>(i);
    out[i].parent_index = parents[i];
    out[i].leaf = order[i]->is_leaf();
  }

  for (int c = 0; c < mix.k; ++c) {
    const PartitionNode* node = partition.root.get();
    // record membership along the path of the component mean
    while (true) {
      const auto it = std::find(order.begin(), order.end(), node);
      out[static_cast<std::size_t>(it - order.begin())].components.push_back(c);
      if (node->is_leaf()) break;
      const Eigen::VectorXd y = node->whiten(mix.means[c]);
      node = (node->h.dot(y) >= node->t) ? node->right.get() : node->left.get();
    }
  }
  return out;
}

}  // namespace unravel
