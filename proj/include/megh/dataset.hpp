#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace megh {

// Standardization record for one design column, kept so fitted coefficients
// can be mapped back to the original covariate scale.
struct ColumnScaling {
  std::string name;
  bool standardized = false;
  double mean = 0.0;
  double sd = 1.0;
};

// Right-censored survival records grouped into clusters. X holds the
// hazard-scale design matrix; the time-scale design X~ is the subset of X
// columns listed in time_scale_columns.
struct ClusteredDataset {
  Eigen::VectorXd times;
  Eigen::VectorXd log_times;  // cached log(t)
  std::vector<int> status;    // 1 = event, 0 = right-censored
  std::vector<int> cluster;   // 0-based cluster index per row
  Eigen::MatrixXd X;
  std::vector<int> time_scale_columns;
  std::vector<std::string> covariate_names;
  std::vector<std::string> cluster_labels;
  std::vector<std::vector<int>> cluster_rows;
  std::vector<ColumnScaling> scalings;

  int n() const { return static_cast<int>(times.size()); }
  int r() const { return static_cast<int>(cluster_rows.size()); }
  int p() const { return static_cast<int>(X.cols()); }
  int p_tilde() const { return static_cast<int>(time_scale_columns.size()); }

  Eigen::MatrixXd x_tilde() const;
  Eigen::VectorXd row_tilde(int row) const;
  double censoring_rate() const;
};

// Assembles and validates a dataset: positive times, binary status, nonempty
// clusters, and full column rank of the uncensored rows of X and X~.
// Throws ValidationError naming the offending rows/columns.
ClusteredDataset make_dataset(Eigen::VectorXd times, std::vector<int> status,
                              std::vector<int> cluster, Eigen::MatrixXd X,
                              std::vector<int> time_scale_columns,
                              std::vector<std::string> covariate_names = {},
                              std::vector<std::string> cluster_labels = {});

}  // namespace megh
