#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "unravel/clusterer.hpp"
#include "unravel/mixture.hpp"

namespace unravel {

struct ErrorReport {
  double error = 0.0;        // 1 - optimally matched probability mass
  Eigen::MatrixXd confusion; // leaves x k, entries sum to 1
  std::vector<int> matching; // leaf -> component (or -1 for unmatched leaves)
  int leaves = 0;
};

// Clustering error of a partition against the generating mixture, estimated
// from m_eval fresh labeled samples (m_eval >= 1000) and a one-to-one
// leaf-to-component matching that maximizes agreed mass.
ErrorReport partition_error(const PolyhedralPartition& partition, const GaussianMixture& mix,
                            Eigen::Index m_eval, std::uint64_t seed);

// Same, but from an already-drawn labeled sample.
ErrorReport labeled_error(const PolyhedralPartition& partition, const LabeledSample& sample, int k);

// Maximum-total-score one-to-one assignment (rows to columns, rectangular).
// Returns row -> column, -1 for unassigned rows.
std::vector<int> optimal_assignment(const Eigen::MatrixXd& score);

struct TrialRow {
  int trial = 0;
  std::string arm;  // "original" | "transformed" | "baseline"
  double error = 0.0;
  int leaves = 0;
  int mean_shift_nodes = 0;
  int spectral_nodes = 0;
};

struct ExperimentConfig {
  UnravelConfig unravel;
  Eigen::Index m_sample = 100000;  // training points per trial
  Eigen::Index m_eval = 100000;    // evaluation points per trial
};

struct InvarianceResult {
  std::vector<TrialRow> rows;
  double mean_error_original = 0.0;
  double mean_error_transformed = 0.0;
};

// Paired trials on mix and apply_affine(mix, map) with common per-trial seeds.
InvarianceResult affine_invariance_experiment(const GaussianMixture& mix, const AffineMap& map,
                                              const ExperimentConfig& config, int trials);

// Reference splitter with no isotropy and no reweighting: recursively project
// onto the top principal component, standardize the projections, and cut at
// the largest gap under the same window rule as unravel.
PolyhedralPartition baseline_pca_cluster(const Eigen::MatrixXd& points, int k);

// Which components reach which tree node (component means routed from the
// root).  Preorder over all nodes; parent_index is -1 at the root.
struct NodeComponents {
  int node_index = 0;
  int parent_index = -1;
  bool leaf = false;
  std::vector<int> components;
};
std::vector<NodeComponents> route_components(const PolyhedralPartition& partition,
                                             const GaussianMixture& mix);

}  // namespace unravel
