#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "unravel/clusterer.hpp"
#include "unravel/evaluation.hpp"
#include "unravel/fisher.hpp"
#include "unravel/mixture.hpp"

namespace unravel {

// Raised for unreadable, unparsable, or structurally invalid files.  Loaders
// include the offending field path in the message (e.g. "covariances[2]: not
// symmetric at (0,1)") so CLI users can fix the input without a stack trace.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

GaussianMixture read_mixture(const std::string& path);
void write_mixture(const std::string& path, const GaussianMixture& mix);

struct PointsFile {
  Eigen::MatrixXd points;
  std::optional<std::vector<int>> labels;  // present when the CSV has a label column
};

// CSV with header x0,...,x{n-1}[,label]; floats written with 17 significant digits.
PointsFile read_points_csv(const std::string& path);
void write_points_csv(const std::string& path, const Eigen::MatrixXd& points,
                      const std::vector<int>* labels = nullptr);

PolyhedralPartition read_partition(const std::string& path);
void write_partition(const std::string& path, const PolyhedralPartition& partition);

void write_overlap_report(const std::string& path, const OverlapReport& report);
void write_error_report(const std::string& path, const ErrorReport& report);

void write_trial_csv(const std::string& path, const std::vector<TrialRow>& rows);

std::string format_double(double v);  // %.17g

}  // namespace unravel
