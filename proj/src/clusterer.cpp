#include "unravel/clusterer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "unravel/isotropy.hpp"
#include "unravel/linalg.hpp"
#include "unravel/reweighting.hpp"
#include "unravel/rng.hpp"

namespace unravel {

void UnravelConfig::validate(int n, Eigen::Index m) const {
  if (k < 1) throw std::invalid_argument("unravel: k must be >= 1");
  if (wmin > 0.0 && wmin > 1.0 / k + 1e-12)
    throw std::invalid_argument("unravel: wmin must be <= 1/k");
  if (!(alpha_coeff > 0.0) && !(alpha > 0.0))
    throw std::invalid_argument("unravel: alpha_coeff must be positive");
  if (!(eps_floor_rel > 0.0)) throw std::invalid_argument("unravel: eps_floor_rel must be positive");
  if (m1 > 0 && m1 < n + 1) throw std::invalid_argument("unravel: m1 must be >= n+1");
  if (m2 > 0 && m2 < n + 1) throw std::invalid_argument("unravel: m2 must be >= n+1");
  if (m1 > 0 && m2 > 0 && m < m1 + m2)
    throw std::invalid_argument("unravel: need m >= m1 + m2 points");
  if (m < 1) throw std::invalid_argument("unravel: empty point set");
}

std::optional<double> largest_gap_threshold(const std::vector<double>& projections, int k) {
  if (k < 2) throw std::invalid_argument("largest_gap_threshold: k must be >= 2");
  if (projections.size() < 2) return std::nullopt;

  std::vector<double> sorted = projections;
  std::sort(sorted.begin(), sorted.end());

  // Gaps live between consecutive points but are measured by their overlap
  // with the window [-1/2, 1/2]; ties prefer the midpoint closest to zero,
  // then the leftmost gap.
  double best_len = 0.0, best_mid = 0.0;
  bool found = false;
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    const double lo = std::max(sorted[i], -0.5);
    const double hi = std::min(sorted[i + 1], 0.5);
    const double len = hi - lo;
    if (len <= 0.0) continue;
    const double mid = (lo + hi) / 2.0;
    const bool better =
        !found || len > best_len ||
        (len == best_len &&
         (std::abs(mid) < std::abs(best_mid) || (std::abs(mid) == std::abs(best_mid) && mid < best_mid)));
    if (better) {
      best_len = len;
      best_mid = mid;
      found = true;
    }
  }
  if (!found || best_len < 1.0 / (4.0 * (k - 1))) return std::nullopt;
  return best_mid;
}

namespace {

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& points, const std::vector<Eigen::Index>& ids) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(ids.size()), points.cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i) out.row(i) = points.row(ids[static_cast<std::size_t>(i)]);
  return out;
}

struct Builder {
  const Eigen::MatrixXd& points;
  const UnravelConfig& cfg;
  int n;
  PolyhedralPartition* partition;
  int next_leaf = 0;

  std::unique_ptr<PartitionNode> leaf(const std::vector<Eigen::Index>& ids) {
    auto node = std::make_unique<PartitionNode>();
    node->leaf_id = next_leaf++;
    node->witness = points.row(ids.front()).transpose();
    return node;
  }

  void warn(std::uint64_t path, const std::string& what) {
    std::ostringstream os;
    os << "node " << path << ": " << what;
    partition->warnings.push_back(os.str());
  }

  Whitening whiten_pool(const Eigen::MatrixXd& pool) const {
    if (cfg.eps_floor_rel == 1e-8) return whiten(pool);  // whiten's own default
    const SymEig eig = sym_eig(estimate_moments(pool).covariance);
    return whiten(pool, cfg.eps_floor_rel * eig.values.maxCoeff());
  }

  std::unique_ptr<PartitionNode> build(std::vector<Eigen::Index> ids, const AffineMap& ctx,
                                       int depth, std::uint64_t path) {
    const auto s = static_cast<Eigen::Index>(ids.size());
    if (cfg.k == 1 || depth >= cfg.effective_max_depth()) return leaf(ids);
    if (s < n + 1) {
      warn(path, "fewer than n+1 points, stopping here");
      return leaf(ids);
    }

    // disjoint thirds: whitening / moments / gap
    std::vector<Eigen::Index> perm = ids;
    Rng rng(derive_seed(cfg.seed, path));
    rng.shuffle(perm);
    const Eigen::Index s1 = s / 3, s2 = s / 3;
    const Eigen::Index s3 = s - s1 - s2;
    if (s1 < n + 1) {
      warn(path, "whitening pool smaller than n+1, stopping here");
      return leaf(ids);
    }
    const Eigen::Index take_m1 = cfg.m1 > 0 ? std::min(cfg.m1, s2) : s2;
    const Eigen::Index take_m2 = cfg.m2 > 0 ? std::min(cfg.m2, s3) : s3;
    const std::vector<Eigen::Index> iso_ids(perm.begin(), perm.begin() + s1);
    const std::vector<Eigen::Index> mom_ids(perm.begin() + s1, perm.begin() + s1 + take_m1);
    const std::vector<Eigen::Index> gap_ids(perm.begin() + s1 + s2,
                                            perm.begin() + s1 + s2 + take_m2);
    if (mom_ids.empty() || gap_ids.empty()) {
      warn(path, "moment or gap pool empty, stopping here");
      return leaf(ids);
    }

    AffineMap node_ctx;
    try {
      const Whitening w = whiten_pool(ctx.apply_rows(gather_rows(points, iso_ids)));
      node_ctx = w.map.compose(ctx);
    } catch (const std::exception& e) {
      warn(path, std::string("whitening failed: ") + e.what());
      return leaf(ids);
    }

    DirectionChoice choice;
    try {
      const ReweightedMoments mom = sample_reweighted_moments(
          node_ctx.apply_rows(gather_rows(points, mom_ids)), cfg.node_alpha(n));
      choice = choose_direction(mom, cfg.effective_wmin());
    } catch (const std::exception& e) {
      warn(path, std::string("separating direction failed: ") + e.what());
      return leaf(ids);
    }

    const Eigen::VectorXd gap_proj =
        node_ctx.apply_rows(gather_rows(points, gap_ids)) * choice.h;
    const std::optional<double> cut = largest_gap_threshold(
        std::vector<double>(gap_proj.data(), gap_proj.data() + gap_proj.size()), cfg.k);
    if (!cut) return leaf(ids);

    const Eigen::VectorXd all_proj = node_ctx.apply_rows(gather_rows(points, ids)) * choice.h;
    std::vector<Eigen::Index> left_ids, right_ids;
    for (Eigen::Index i = 0; i < s; ++i) {
      (all_proj[i] >= *cut ? right_ids : left_ids).push_back(ids[static_cast<std::size_t>(i)]);
    }
    if (left_ids.empty() || right_ids.empty()) {
      warn(path, "cut left one side empty, stopping here");
      return leaf(ids);
    }

    auto node = std::make_unique<PartitionNode>();
    node->whiten = node_ctx;
    node->h = choice.h;
    node->t = *cut;
    node->choice = choice;
    node->left = build(std::move(left_ids), node_ctx, depth + 1, 2 * path);
    node->right = build(std::move(right_ids), node_ctx, depth + 1, 2 * path + 1);
    return node;
  }
};

const PartitionNode* descend(const PartitionNode* node, const Eigen::VectorXd& x) {
  while (!node->is_leaf()) {
    const Eigen::VectorXd y = node->whiten(x);
    node = (node->h.dot(y) >= node->t) ? node->right.get() : node->left.get();
  }
  return node;
}

int count_method(const PartitionNode* node, SeparatorMethod method) {
  if (!node || node->is_leaf()) return 0;
  return (node->choice.method == method ? 1 : 0) + count_method(node->left.get(), method) +
         count_method(node->right.get(), method);
}

}  // namespace

int PolyhedralPartition::classify(const Eigen::VectorXd& x) const {
  if (!root) throw std::runtime_error("classify: empty partition");
  if (x.size() != n) throw std::invalid_argument("classify: point dimension mismatch");
  return descend(root.get(), x)->leaf_id;
}

std::vector<int> PolyhedralPartition::classify_rows(const Eigen::MatrixXd& points) const {
  std::vector<int> out(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    out[static_cast<std::size_t>(i)] = classify(points.row(i).transpose());
  return out;
}

int PolyhedralPartition::internal_nodes(SeparatorMethod method) const {
  return count_method(root.get(), method);
}

PolyhedralPartition unravel(const Eigen::MatrixXd& points, const UnravelConfig& config) {
  const Eigen::Index m = points.rows();
  const int n = static_cast<int>(points.cols());
  config.validate(n, m);

  PolyhedralPartition partition;
  partition.n = n;
  Builder builder{points, config, n, &partition};
  std::vector<Eigen::Index> ids(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) ids[static_cast<std::size_t>(i)] = i;
  partition.root = builder.build(std::move(ids), AffineMap::identity(n), 0, 1);
  partition.leaves = builder.next_leaf;
  return partition;
}

}  // namespace unravel
