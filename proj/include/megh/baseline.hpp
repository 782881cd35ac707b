#pragma once

#include <Eigen/Core>

namespace megh {

enum class BaselineFamily { PGW, LogLogistic };

// Parametric baseline hazard. PGW parameters are theta = (eta, nu, delta)
// with H0(t) = (1 + (t/eta)^nu)^(1/delta) - 1; the log-logistic uses
// theta = (mu, tau) with S0(t) = 1 / (1 + (t e^{-mu})^{1/tau}).
struct BaselineHazard {
  BaselineFamily family;
  Eigen::VectorXd theta;
};

BaselineHazard make_pgw(double eta, double nu, double delta);
BaselineHazard make_loglogistic(double mu, double tau);

int n_baseline_params(BaselineFamily family);
const char* baseline_name(BaselineFamily family);

// Positivity checks on scale/shape parameters; throws std::domain_error.
void check_baseline(const BaselineHazard& b);

double h0(double t, const BaselineHazard& b);
double log_h0(double t, const BaselineHazard& b);
double H0(double t, const BaselineHazard& b);
double H0_inv(double s, const BaselineHazard& b);

// Evaluation in terms of a = log(t), used by the likelihood inner loops where
// the baseline is applied at t * exp(linear predictor + random effect) and the
// product is only available stably in logs.
struct BaselineLogEval {
  explicit BaselineLogEval(const BaselineHazard& b);
  double log_h0(double log_t) const;
  double cum_hazard(double log_t) const;

  BaselineFamily family;
  double c0, c1, c2, c3;  // family-specific precomputed constants
};

}  // namespace megh
