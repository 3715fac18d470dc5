#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "unravel/mixture.hpp"
#include "unravel/separator.hpp"

namespace unravel {

struct UnravelConfig {
  int k = 2;
  double wmin = 0.0;        // <= 0 means 1/k
  double alpha = 0.0;       // absolute override; <= 0 uses alpha_coeff * n / wmin
  double alpha_coeff = 1.0;
  Eigen::Index m1 = 0;      // moment samples per node (cap; 0 means "its whole share")
  Eigen::Index m2 = 0;      // gap samples per node   (cap; 0 means "its whole share")
  std::uint64_t seed = 0;
  int max_depth = 0;        // <= 0 means 2k
  double eps_floor_rel = 1e-8;  // whitening floor, relative to the top eigenvalue

  double effective_wmin() const { return wmin > 0.0 ? wmin : 1.0 / k; }
  double node_alpha(int n) const {
    return alpha > 0.0 ? alpha : alpha_coeff * n / effective_wmin();
  }
  int effective_max_depth() const { return max_depth > 0 ? max_depth : 2 * k; }
  void validate(int n, Eigen::Index m) const;  // throws on bad budgets
};

// Binary tree of whitened halfspace cuts.  Each internal node stores the
// affine context composed from the root, so a point is routed by testing
// h^T (whiten(x)) >= t directly against the original coordinates.
struct PartitionNode {
  // internal fields
  AffineMap whiten;      // composed from root
  Eigen::VectorXd h;
  double t = 0.0;
  DirectionChoice choice;  // audit record of the separating-direction branch
  std::unique_ptr<PartitionNode> left;   // h^T y <  t
  std::unique_ptr<PartitionNode> right;  // h^T y >= t (boundary goes right)
  // leaf fields
  int leaf_id = -1;
  Eigen::VectorXd witness;  // one training point that reached this leaf

  bool is_leaf() const { return !left; }
};

struct PolyhedralPartition {
  std::unique_ptr<PartitionNode> root;
  int n = 0;
  int leaves = 0;
  std::vector<std::string> warnings;  // e.g. sample-starved nodes

  int classify(const Eigen::VectorXd& x) const;
  std::vector<int> classify_rows(const Eigen::MatrixXd& points) const;
  int internal_nodes(SeparatorMethod method) const;  // count by branch taken
};

// Largest empty interval between consecutive sorted projections, measured by
// its intersection with [-1/2, 1/2].  Returns the midpoint of that
// intersection when its length reaches 1/(4(k-1)); std::nullopt otherwise
// (that includes every projection sitting on one side of the window).
std::optional<double> largest_gap_threshold(const std::vector<double>& projections, int k);

// Recursive whiten / reweight / cut clustering of a points matrix.
// Deterministic for fixed (points, config); node RNG streams derive from
// (seed, heap path), so sibling subtrees are independent.
PolyhedralPartition unravel(const Eigen::MatrixXd& points, const UnravelConfig& config);

}  // namespace unravel
