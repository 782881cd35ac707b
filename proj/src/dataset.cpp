#include "megh/dataset.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <set>

#include "megh/errors.hpp"

namespace megh {

Eigen::MatrixXd ClusteredDataset::x_tilde() const {
  Eigen::MatrixXd Xt(X.rows(), time_scale_columns.size());
  for (std::size_t j = 0; j < time_scale_columns.size(); ++j)
    Xt.col(j) = X.col(time_scale_columns[j]);
  return Xt;
}

Eigen::VectorXd ClusteredDataset::row_tilde(int row) const {
  Eigen::VectorXd xt(time_scale_columns.size());
  for (std::size_t j = 0; j < time_scale_columns.size(); ++j)
    xt(j) = X(row, time_scale_columns[j]);
  return xt;
}

double ClusteredDataset::censoring_rate() const {
  if (status.empty()) return 0.0;
  double censored = 0.0;
  for (int d : status) censored += (d == 0);
  return censored / static_cast<double>(status.size());
}

namespace {

void check_full_rank(const Eigen::MatrixXd& M, const std::string& label,
                     const std::vector<std::string>& names) {
  if (M.cols() == 0) return;
  if (M.rows() < M.cols())
    throw ValidationError(label + ": fewer uncensored rows than columns");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
  qr.setThreshold(1e-10);
  if (qr.rank() < M.cols()) {
    std::string msg = label + ": design matrix of uncensored rows is rank deficient";
    if (!names.empty()) {
      msg += " (columns:";
      for (const auto& nm : names) msg += " " + nm;
      msg += ")";
    }
    throw ValidationError(msg);
  }
}

}  // namespace

ClusteredDataset make_dataset(Eigen::VectorXd times, std::vector<int> status,
                              std::vector<int> cluster, Eigen::MatrixXd X,
                              std::vector<int> time_scale_columns,
                              std::vector<std::string> covariate_names,
                              std::vector<std::string> cluster_labels) {
  const int n = static_cast<int>(times.size());
  if (static_cast<int>(status.size()) != n ||
      static_cast<int>(cluster.size()) != n || X.rows() != n)
    throw ValidationError("dataset: column lengths disagree");
  if (n == 0) throw ValidationError("dataset: no rows");

  for (int i = 0; i < n; ++i) {
    if (!(times(i) > 0.0) || !std::isfinite(times(i)))
      throw ValidationError("dataset: nonpositive time at row " + std::to_string(i + 1));
    if (status[i] != 0 && status[i] != 1)
      throw ValidationError("dataset: non-binary status at row " + std::to_string(i + 1));
  }

  const int p = static_cast<int>(X.cols());
  for (int c : time_scale_columns)
    if (c < 0 || c >= p)
      throw ValidationError("dataset: time-scale column index out of range");

  int r = 0;
  for (int c : cluster) {
    if (c < 0) throw ValidationError("dataset: negative cluster index");
    r = std::max(r, c + 1);
  }
  std::vector<std::vector<int>> rows(r);
  for (int i = 0; i < n; ++i) rows[cluster[i]].push_back(i);
  for (int c = 0; c < r; ++c)
    if (rows[c].empty())
      throw ValidationError("dataset: empty cluster " + std::to_string(c + 1));

  ClusteredDataset d;
  d.times = std::move(times);
  d.log_times = d.times.array().log();
  d.status = std::move(status);
  d.cluster = std::move(cluster);
  d.X = std::move(X);
  d.time_scale_columns = std::move(time_scale_columns);
  d.cluster_rows = std::move(rows);

  if (covariate_names.empty())
    for (int j = 0; j < p; ++j) covariate_names.push_back("x" + std::to_string(j + 1));
  if (static_cast<int>(covariate_names.size()) != p)
    throw ValidationError("dataset: covariate name count mismatch");
  d.covariate_names = std::move(covariate_names);

  if (cluster_labels.empty())
    for (int c = 0; c < d.r(); ++c) cluster_labels.push_back(std::to_string(c + 1));
  if (static_cast<int>(cluster_labels.size()) != d.r())
    throw ValidationError("dataset: cluster label count mismatch");
  d.cluster_labels = std::move(cluster_labels);

  d.scalings.resize(p);
  for (int j = 0; j < p; ++j) d.scalings[j].name = d.covariate_names[j];

  // Rank condition applies to the rows of uncensored individuals only.
  std::vector<int> uncensored;
  for (int i = 0; i < d.n(); ++i)
    if (d.status[i] == 1) uncensored.push_back(i);
  if (!uncensored.empty()) {
    Eigen::MatrixXd Xo(uncensored.size(), p);
    for (std::size_t k = 0; k < uncensored.size(); ++k)
      Xo.row(k) = d.X.row(uncensored[k]);
    check_full_rank(Xo, "dataset", d.covariate_names);
    if (d.p_tilde() > 0) {
      Eigen::MatrixXd Xto(uncensored.size(), d.p_tilde());
      for (int j = 0; j < d.p_tilde(); ++j)
        Xto.col(j) = Xo.col(d.time_scale_columns[j]);
      std::vector<std::string> tnames;
      for (int j : d.time_scale_columns) tnames.push_back(d.covariate_names[j]);
      check_full_rank(Xto, "dataset (time scale)", tnames);
    }
  }
  return d;
}

}  // namespace megh
