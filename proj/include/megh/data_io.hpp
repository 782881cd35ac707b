#pragma once

#include <map>
#include <string>
#include <vector>

#include "megh/dataset.hpp"
#include "megh/diagnostics.hpp"

namespace megh {

// Columns of a parsed CSV file kept as strings; rectangular by construction.
struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

RawTable read_csv(const std::string& path);

struct ColumnMapping {
  std::string time = "time";
  std::string status = "status";
  std::string cluster = "cluster";
  std::vector<std::string> hazard_covariates;
  std::vector<std::string> time_covariates;          // subset of the above
  std::vector<std::string> standardize;              // subset of the above
  std::map<std::string, double> truncate;            // cap applied before standardization
};

// Loads, truncates, standardizes ((x - mean)/sd over the pooled sample, the
// transform recorded in the dataset scalings) and validates the dataset.
ClusteredDataset load_dataset(const std::string& path, const ColumnMapping& mapping);

void write_dataset_csv(const std::string& path, const ClusteredDataset& data);

struct KMCurve {
  std::string label;
  std::vector<double> times;      // t = 0 first, then event times
  std::vector<double> survival;
  std::vector<int> at_risk;
};

// Product-limit estimator per cluster; deaths processed before censorings at
// tied times.
std::vector<KMCurve> km_by_cluster(const ClusteredDataset& data);

void write_km_csv(const std::string& path, const std::vector<KMCurve>& curves);
void write_gradient_csv(const std::string& path, const GradientDiagnostic& diag);

}  // namespace megh
