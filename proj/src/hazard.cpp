#include "megh/hazard.hpp"

#include <cmath>
#include <stdexcept>

namespace megh {

const char* structure_name(HazardStructure s) {
  switch (s) {
    case HazardStructure::GH: return "gh";
    case HazardStructure::MEGH_I: return "megh1";
    default: return "megh2";
  }
}

RandomEffectPair structure_effects(HazardStructure s, double u_raw) {
  switch (s) {
    case HazardStructure::GH: return {0.0, 0.0};
    case HazardStructure::MEGH_I: return {u_raw, 0.0};
    default: return {u_raw, u_raw};
  }
}

namespace {
void check_dims(const Eigen::VectorXd& x, const Eigen::VectorXd& x_tilde,
                const RegressionCoefficients& coef) {
  if (x.size() != coef.beta.size() || x_tilde.size() != coef.alpha.size())
    throw std::invalid_argument("hazard: covariate/coefficient dimension mismatch");
}
}  // namespace

double cond_log_hazard(double t, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& x_tilde, double u, double u_tilde,
                       const RegressionCoefficients& coef,
                       const BaselineHazard& b) {
  check_dims(x, x_tilde, coef);
  if (!(t > 0.0)) throw std::domain_error("cond_log_hazard: time must be positive");
  const double lp_time = x_tilde.dot(coef.alpha) + u_tilde;
  const double lp_haz = x.dot(coef.beta) + u;
  return BaselineLogEval(b).log_h0(std::log(t) + lp_time) + lp_haz;
}

double cond_cum_hazard(double t, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& x_tilde, double u, double u_tilde,
                       const RegressionCoefficients& coef,
                       const BaselineHazard& b) {
  check_dims(x, x_tilde, coef);
  if (t < 0.0) throw std::domain_error("cond_cum_hazard: time must be nonnegative");
  if (t == 0.0) return 0.0;
  const double lp_time = x_tilde.dot(coef.alpha) + u_tilde;
  const double lp_haz = x.dot(coef.beta) + u;
  return BaselineLogEval(b).cum_hazard(std::log(t) + lp_time) *
         std::exp(lp_haz - lp_time);
}

}  // namespace megh
