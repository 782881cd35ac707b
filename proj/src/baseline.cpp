#include "megh/baseline.hpp"

#include <cmath>
#include <stdexcept>

#include "megh/mathutil.hpp"

namespace megh {

BaselineHazard make_pgw(double eta, double nu, double delta) {
  BaselineHazard b{BaselineFamily::PGW, Eigen::VectorXd(3)};
  b.theta << eta, nu, delta;
  check_baseline(b);
  return b;
}

BaselineHazard make_loglogistic(double mu, double tau) {
  BaselineHazard b{BaselineFamily::LogLogistic, Eigen::VectorXd(2)};
  b.theta << mu, tau;
  check_baseline(b);
  return b;
}

int n_baseline_params(BaselineFamily family) {
  return family == BaselineFamily::PGW ? 3 : 2;
}

const char* baseline_name(BaselineFamily family) {
  return family == BaselineFamily::PGW ? "pgw" : "loglogistic";
}

void check_baseline(const BaselineHazard& b) {
  if (b.theta.size() != n_baseline_params(b.family))
    throw std::domain_error("baseline: wrong number of parameters");
  if (b.family == BaselineFamily::PGW) {
    if (!(b.theta(0) > 0.0) || !(b.theta(1) > 0.0) || !(b.theta(2) > 0.0))
      throw std::domain_error("baseline: PGW parameters must be positive");
  } else {
    if (!std::isfinite(b.theta(0)) || !(b.theta(1) > 0.0))
      throw std::domain_error("baseline: log-logistic scale must be positive");
  }
}

BaselineLogEval::BaselineLogEval(const BaselineHazard& b) : family(b.family) {
  check_baseline(b);
  if (family == BaselineFamily::PGW) {
    const double eta = b.theta(0), nu = b.theta(1), delta = b.theta(2);
    c0 = std::log(nu) - std::log(delta) - nu * std::log(eta);
    c1 = nu;
    c2 = std::log(eta);
    c3 = 1.0 / delta;
  } else {
    const double mu = b.theta(0), tau = b.theta(1);
    c0 = std::log(tau);
    c1 = mu;
    c2 = tau;
    c3 = 0.0;
  }
}

double BaselineLogEval::log_h0(double a) const {
  if (family == BaselineFamily::PGW) {
    const double z = c1 * (a - c2);
    return c0 + (c1 - 1.0) * a + (c3 - 1.0) * softplus(z);
  }
  const double z = (a - c1) / c2;
  return z - c0 - a - softplus(z);
}

double BaselineLogEval::cum_hazard(double a) const {
  if (family == BaselineFamily::PGW) {
    const double z = c1 * (a - c2);
    return std::expm1(c3 * softplus(z));
  }
  return softplus((a - c1) / c2);
}

double log_h0(double t, const BaselineHazard& b) {
  if (!(t > 0.0)) throw std::domain_error("h0: time must be positive");
  return BaselineLogEval(b).log_h0(std::log(t));
}

double h0(double t, const BaselineHazard& b) { return std::exp(log_h0(t, b)); }

double H0(double t, const BaselineHazard& b) {
  if (t < 0.0) throw std::domain_error("H0: time must be nonnegative");
  check_baseline(b);
  if (t == 0.0) return 0.0;
  return BaselineLogEval(b).cum_hazard(std::log(t));
}

double H0_inv(double s, const BaselineHazard& b) {
  if (s < 0.0) throw std::domain_error("H0_inv: argument must be nonnegative");
  check_baseline(b);
  if (s == 0.0) return 0.0;
  if (b.family == BaselineFamily::PGW) {
    const double eta = b.theta(0), nu = b.theta(1), delta = b.theta(2);
    // eta * ((1+s)^delta - 1)^(1/nu), in logs for wide-range stability
    const double t1 = std::expm1(delta * std::log1p(s));
    return eta * std::exp(std::log(t1) / nu);
  }
  const double mu = b.theta(0), tau = b.theta(1);
  return std::exp(mu + tau * std::log(std::expm1(s)));
}

}  // namespace megh
