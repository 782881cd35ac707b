#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "megh/dataset.hpp"
#include "megh/estimation.hpp"
#include "megh/model.hpp"

namespace megh {

struct CovariateSpec {
  enum class Kind { StdNormal, Bernoulli };
  std::string name;
  Kind kind = Kind::StdNormal;
  double prob = 0.5;  // Bernoulli success probability
};

// Simulation truth: model + true parameters + design of the synthetic data.
struct SimTruth {
  ModelSpec model;
  ParameterVector truth;
  std::vector<int> cluster_sizes;
  double censoring_target = 0.0;  // proportion in [0, 1)
  std::vector<CovariateSpec> covariates;
  std::vector<int> time_scale_columns;
};

std::vector<int> equal_cluster_sizes(int n, int r);
void validate_sim_truth(const SimTruth& truth);

// Uniform(0, c_max) administrative censoring; c_max found by bisection on a
// pilot batch so the expected censoring proportion hits the target.
double calibrate_censoring_cmax(const SimTruth& truth, std::uint64_t seed,
                                int pilot_size = 10000);

// Cumulative-hazard inversion simulator: u_i ~ G per cluster, E ~ Exp(1) per
// subject, t solves H(t | x, u) = E in closed form via H0_inv.
ClusteredDataset simulate_times(const SimTruth& truth, std::uint64_t seed);

// Same but with the cluster effects supplied by the caller (one per cluster);
// used by parametric-bootstrap and misspecification fixtures.
ClusteredDataset simulate_times_with_effects(const SimTruth& truth,
                                             const std::vector<double>& effects,
                                             std::uint64_t seed);

// Resimulate times/status from a fitted model on an existing design (same X,
// same clusters), censored to match a target proportion.
ClusteredDataset simulate_conditional(const ModelSpec& spec,
                                      const ParameterVector& eta,
                                      const ClusteredDataset& design,
                                      double censoring_target,
                                      std::uint64_t seed);

struct RepModelRecord {
  bool ok = false;
  bool converged = false;
  double log_marginal = 0.0;
  double aic = 0.0;
  bool has_lrt = false;
  double lrt_statistic = 0.0;
  double lrt_p = 1.0;
  std::map<std::string, double> estimates;
  std::map<std::string, double> standard_errors;
  std::map<std::string, int> ci_covers;  // 1 if the 95% CI covers the truth
};

struct RepRecord {
  int rep = 0;
  std::uint64_t seed = 0;
  double censoring_rate = 0.0;
  std::vector<RepModelRecord> models;  // aligned with StudyConfig::fit_models
};

struct ParamSummary {
  std::string name;
  double truth = 0.0;
  double mean = 0.0;
  double bias = 0.0;          // mean - truth
  double mean_abs_error = 0.0;
  double mc_se = 0.0;         // sd of the estimates / sqrt(reps)
  double coverage = 0.0;      // 95% CI coverage rate
  int n = 0;
};

struct ModelStudySummary {
  std::string label;
  ModelSpec spec;
  int n_ok = 0;
  int n_failed = 0;
  double mean_aic = 0.0;
  double lrt_rejection_rate = -1.0;  // -1 when the model carries no test
  std::vector<ParamSummary> params;
};

struct StudyConfig {
  SimTruth truth;
  int n_reps = 50;
  std::vector<ModelSpec> fit_models;
  std::uint64_t seed = 1;
  int jobs = 1;
  FitConfig fit;
  double lrt_level = 0.05;
};

struct StudyReport {
  int n_reps = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> model_labels;
  std::vector<RepRecord> reps;
  std::vector<ModelStudySummary> models;
};

std::string model_label(const ModelSpec& spec);

// Replications run independently (optionally on `jobs` threads) with seeds
// derived from the master seed, so the report is identical for any job count.
StudyReport run_study(const StudyConfig& config);

}  // namespace megh
