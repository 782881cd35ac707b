#include "megh/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "megh/errors.hpp"

namespace megh {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, int row, const std::string& col) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("csv: cannot parse '" + s + "' in column " + col +
                          ", row " + std::to_string(row));
  }
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

int RawTable::column(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == name) return static_cast<int>(j);
  return -1;
}

RawTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("csv: cannot open " + path);
  RawTable table;
  std::string line;
  if (!std::getline(in, line))
    throw ValidationError("csv: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split_line(line);
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_line(line);
    if (fields.size() != table.header.size())
      throw ValidationError("csv: row " + std::to_string(row) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(table.header.size()));
    table.rows.push_back(std::move(fields));
  }
  return table;
}

ClusteredDataset load_dataset(const std::string& path,
                              const ColumnMapping& mapping) {
  const RawTable table = read_csv(path);
  auto need = [&](const std::string& name) {
    const int j = table.column(name);
    if (j < 0) throw ValidationError("csv: missing required column '" + name + "'");
    return j;
  };
  const int jt = need(mapping.time);
  const int js = need(mapping.status);
  const int jc = need(mapping.cluster);
  std::vector<int> jx;
  for (const auto& name : mapping.hazard_covariates) jx.push_back(need(name));

  const int n = static_cast<int>(table.rows.size());
  if (n == 0) throw ValidationError("csv: no data rows in " + path);

  Eigen::VectorXd times(n);
  std::vector<int> status(n);
  std::vector<int> cluster(n);
  std::vector<std::string> labels;
  Eigen::MatrixXd X(n, static_cast<int>(jx.size()));

  std::map<std::string, int> label_index;
  for (int i = 0; i < n; ++i) {
    const auto& row = table.rows[i];
    times(i) = parse_double(row[jt], i + 2, mapping.time);
    const double d = parse_double(row[js], i + 2, mapping.status);
    if (d != 0.0 && d != 1.0)
      throw ValidationError("csv: non-binary status at row " + std::to_string(i + 2));
    status[i] = static_cast<int>(d);
    const std::string& lab = row[jc];
    auto it = label_index.find(lab);
    if (it == label_index.end()) {  // clusters indexed by first appearance
      it = label_index.emplace(lab, static_cast<int>(labels.size())).first;
      labels.push_back(lab);
    }
    cluster[i] = it->second;
    for (std::size_t c = 0; c < jx.size(); ++c)
      X(i, c) = parse_double(row[jx[c]], i + 2, mapping.hazard_covariates[c]);
  }

  // truncation caps, applied before standardization
  for (const auto& [name, cap] : mapping.truncate) {
    const auto pos = std::find(mapping.hazard_covariates.begin(),
                               mapping.hazard_covariates.end(), name);
    if (pos == mapping.hazard_covariates.end())
      throw ValidationError("csv: truncation column '" + name + "' is not a covariate");
    const int c = static_cast<int>(pos - mapping.hazard_covariates.begin());
    X.col(c) = X.col(c).cwiseMin(cap);
  }

  std::vector<ColumnScaling> scalings(jx.size());
  for (std::size_t c = 0; c < jx.size(); ++c)
    scalings[c].name = mapping.hazard_covariates[c];
  for (const auto& name : mapping.standardize) {
    const auto pos = std::find(mapping.hazard_covariates.begin(),
                               mapping.hazard_covariates.end(), name);
    if (pos == mapping.hazard_covariates.end())
      throw ValidationError("csv: standardize column '" + name + "' is not a covariate");
    const int c = static_cast<int>(pos - mapping.hazard_covariates.begin());
    const double mean = X.col(c).mean();
    const double sd = std::sqrt((X.col(c).array() - mean).square().sum() /
                                std::max(1, n - 1));
    if (!(sd > 0.0))
      throw ValidationError("csv: column '" + name + "' is constant; cannot standardize");
    X.col(c) = (X.col(c).array() - mean) / sd;
    scalings[c] = {name, true, mean, sd};
  }

  std::vector<int> time_cols;
  for (const auto& name : mapping.time_covariates) {
    const auto pos = std::find(mapping.hazard_covariates.begin(),
                               mapping.hazard_covariates.end(), name);
    if (pos == mapping.hazard_covariates.end())
      throw ValidationError("csv: time-scale column '" + name +
                            "' must also be a hazard-scale covariate");
    time_cols.push_back(static_cast<int>(pos - mapping.hazard_covariates.begin()));
  }

  ClusteredDataset data =
      make_dataset(std::move(times), std::move(status), std::move(cluster),
                   std::move(X), time_cols, mapping.hazard_covariates, labels);
  data.scalings = std::move(scalings);
  return data;
}

void write_dataset_csv(const std::string& path, const ClusteredDataset& data) {
  std::ofstream out(path);
  if (!out) throw ValidationError("csv: cannot write " + path);
  out << "cluster,time,status";
  for (const auto& name : data.covariate_names) out << "," << name;
  out << "\n";
  for (int i = 0; i < data.n(); ++i) {
    out << data.cluster_labels[data.cluster[i]] << ","
        << fmt_double(data.times(i)) << "," << data.status[i];
    for (int c = 0; c < data.p(); ++c) out << "," << fmt_double(data.X(i, c));
    out << "\n";
  }
}

std::vector<KMCurve> km_by_cluster(const ClusteredDataset& data) {
  std::vector<KMCurve> curves;
  curves.reserve(data.r());
  for (int cl = 0; cl < data.r(); ++cl) {
    const auto& rows = data.cluster_rows[cl];
    std::vector<std::pair<double, int>> obs;  // (time, status)
    obs.reserve(rows.size());
    for (int i : rows) obs.emplace_back(data.times(i), data.status[i]);
    std::sort(obs.begin(), obs.end());

    KMCurve curve;
    curve.label = data.cluster_labels[cl];
    curve.times.push_back(0.0);
    curve.survival.push_back(1.0);
    curve.at_risk.push_back(static_cast<int>(obs.size()));

    double s = 1.0;
    std::size_t i = 0;
    int at_risk = static_cast<int>(obs.size());
    while (i < obs.size()) {
      const double t = obs[i].first;
      int deaths = 0, censored = 0;
      while (i < obs.size() && obs[i].first == t) {
        (obs[i].second == 1 ? deaths : censored) += 1;
        ++i;
      }
      if (deaths > 0) {
        s *= 1.0 - static_cast<double>(deaths) / at_risk;
        curve.times.push_back(t);
        curve.survival.push_back(s);
        curve.at_risk.push_back(at_risk);
      }
      at_risk -= deaths + censored;
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

void write_km_csv(const std::string& path, const std::vector<KMCurve>& curves) {
  std::ofstream out(path);
  if (!out) throw ValidationError("csv: cannot write " + path);
  out << "cluster,time,survival,at_risk\n";
  for (const auto& c : curves)
    for (std::size_t i = 0; i < c.times.size(); ++i)
      out << c.label << "," << fmt_double(c.times[i]) << ","
          << fmt_double(c.survival[i]) << "," << c.at_risk[i] << "\n";
}

void write_gradient_csv(const std::string& path, const GradientDiagnostic& diag) {
  std::ofstream out(path);
  if (!out) throw ValidationError("csv: cannot write " + path);
  out << "u,delta,lo,hi\n";
  for (int g = 0; g < diag.grid.size(); ++g) {
    out << fmt_double(diag.grid(g)) << "," << fmt_double(diag.delta(g)) << ",";
    if (diag.has_bands)
      out << fmt_double(diag.band_lower(g)) << "," << fmt_double(diag.band_upper(g));
    else
      out << ",";
    out << "\n";
  }
}

}  // namespace megh
