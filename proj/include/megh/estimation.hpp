#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "megh/dataset.hpp"
#include "megh/likelihood.hpp"
#include "megh/model.hpp"
#include "megh/optim.hpp"

namespace megh {

struct FitConfig {
  int n_starts = 3;             // jittered multi-starts
  std::uint64_t seed = 1;       // jitter rng seed
  NelderMeadOptions nm;
  BfgsOptions bfgs;
  QuadratureOptions quad;
  int threads = 1;              // per-objective cluster parallelism
  std::optional<ParameterVector> init;
  // Coordinates of the unconstrained vector held fixed during optimization
  // (index, value); excluded from the parameter count and the covariance.
  std::vector<std::pair<int, double>> fixed;
  bool compute_covariance = true;
};

struct FitResult {
  ModelSpec spec;
  ParameterVector eta_hat;
  Eigen::VectorXd unconstrained;       // full packed optimum
  Eigen::MatrixXd covariance;          // constrained scale, free coordinates
  Eigen::VectorXd standard_errors;     // 0 for fixed coordinates
  Eigen::VectorXd ci_lower, ci_upper;  // Wald 95% on the constrained scale
  bool se_defined = false;
  double log_marginal_at_max = 0.0;
  double aic = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  int p = 0, p_tilde = 0;
  int n_parameters = 0;  // free parameters entering the AIC penalty
  std::vector<std::string> parameter_names;
  std::vector<bool> is_fixed;

  Eigen::VectorXd estimates() const;  // constrained values in layout order
};

FitResult fit(const ModelSpec& spec, const ClusteredDataset& data,
              const FitConfig& config = {});

// Observed-information covariance: inverse of the central-difference Hessian
// of -log m at the optimum (steps max(1e-4, 1e-4|z_j|)), delta-method mapped
// to the constrained scale. Fills covariance/SE/CI fields of `result`.
void covariance_and_se(const ClusteredDataset& data, FitResult& result,
                       const FitConfig& config = {});

double aic_of(double log_marginal_at_max, int n_parameters);

}  // namespace megh
