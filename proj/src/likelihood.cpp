#include "megh/likelihood.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "megh/errors.hpp"
#include "megh/mathutil.hpp"
#include "megh/optim.hpp"

namespace megh {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_eta_dims(const ParameterVector& eta, const ClusteredDataset& data,
                    const ModelSpec& spec) {
  if (eta.beta.size() != data.p() || eta.alpha.size() != data.p_tilde())
    throw std::invalid_argument("likelihood: coefficient dimensions do not match the data");
  if (eta.theta.size() != n_baseline_params(spec.baseline))
    throw std::invalid_argument("likelihood: baseline parameter count mismatch");
  if (spec.has_random_effects() &&
      eta.xi.size() != n_re_params(spec.re_family))
    throw std::invalid_argument("likelihood: random-effects parameter count mismatch");
}
}  // namespace

ClusterLik::ClusterLik(const ModelSpec& spec, const ParameterVector& eta,
                       const ClusteredDataset& data, int cluster_id)
    : structure_(spec.structure), base_(baseline_of(spec, eta)) {
  const Eigen::VectorXd lph = data.X * eta.beta;
  const Eigen::VectorXd lpt = data.p_tilde() > 0
                                  ? Eigen::VectorXd(data.x_tilde() * eta.alpha)
                                  : Eigen::VectorXd::Zero(data.n());
  build(spec, eta, data, cluster_id, lph, lpt);
}

ClusterLik::ClusterLik(const ModelSpec& spec, const ParameterVector& eta,
                       const ClusteredDataset& data, int cluster_id,
                       const Eigen::VectorXd& lp_hazard,
                       const Eigen::VectorXd& lp_time)
    : structure_(spec.structure), base_(baseline_of(spec, eta)) {
  build(spec, eta, data, cluster_id, lp_hazard, lp_time);
}

void ClusterLik::build(const ModelSpec& spec, const ParameterVector& eta,
                       const ClusteredDataset& data, int cluster_id,
                       const Eigen::VectorXd& lp_hazard,
                       const Eigen::VectorXd& lp_time) {
  (void)spec;
  (void)eta;
  if (cluster_id < 0 || cluster_id >= data.r())
    throw std::invalid_argument("likelihood: cluster id out of range");
  const auto& rows = data.cluster_rows[cluster_id];
  if (structure_ == HazardStructure::MEGH_II) {
    w_.reserve(rows.size());
    k_.reserve(rows.size());
    d_.reserve(rows.size());
    for (int i : rows) {
      w_.push_back(data.log_times(i) + lp_time(i));
      k_.push_back(std::exp(lp_hazard(i) - lp_time(i)));
      d_.push_back(data.status[i]);
      if (data.status[i] == 1) {
        ++events_;
        event_const_ += lp_hazard(i);
      }
    }
  } else {
    for (int i : rows) {
      const double w = data.log_times(i) + lp_time(i);
      cum_at_zero_ += base_.cum_hazard(w) * std::exp(lp_hazard(i) - lp_time(i));
      if (data.status[i] == 1) {
        ++events_;
        event_const_ += base_.log_h0(w) + lp_hazard(i);
      }
    }
  }
}

double ClusterLik::operator()(double u_raw) const {
  if (structure_ != HazardStructure::MEGH_II) {
    const double u = structure_ == HazardStructure::GH ? 0.0 : u_raw;
    const double v = event_const_ + events_ * u - cum_at_zero_ * std::exp(u);
    return std::isnan(v) ? kNegInf : v;
  }
  // MEGH-II: u shifts the baseline time argument and scales the hazard.
  double acc = event_const_ + events_ * u_raw;
  for (std::size_t j = 0; j < w_.size(); ++j) {
    const double a = w_[j] + u_raw;
    if (d_[j] == 1) acc += base_.log_h0(a);
    acc -= base_.cum_hazard(a) * k_[j];
  }
  return std::isnan(acc) ? kNegInf : acc;
}

ClusterLik::Mode ClusterLik::maximize(double sd_hint) const {
  if (structure_ == HazardStructure::GH)
    return {0.0, (*this)(0.0), true};
  if (has_closed_form_mode()) {
    if (!std::isfinite(cum_at_zero_))
      return {0.0, kNegInf, false};
    if (events_ == 0) {
      // l(u) = A - C e^u increases towards A as u -> -inf
      return {std::numeric_limits<double>::quiet_NaN(), event_const_, false};
    }
    const double u_hat = std::log(static_cast<double>(events_)) -
                         std::log(cum_at_zero_);
    return {u_hat, (*this)(u_hat), true};
  }
  const double half = 10.0 * std::max(sd_hint, 1e-8);
  auto res = maximize_expanding([this](double u) { return (*this)(u); }, -half,
                                half, 1e-8, 300);
  return {res.x, res.fx, !res.at_boundary};
}

namespace {

ClusterMarginal integrate_cluster(const ClusterLik& lik,
                                  const RandomEffectsDist& G,
                                  const QuadratureOptions& quad,
                                  int cluster_id, bool scaled) {
  ClusterMarginal out;
  const double sd_g = stddev(G);
  const auto mode = lik.maximize(sd_g);
  out.log_K = mode.log_K;
  if (out.log_K == kNegInf) {  // degenerate parameter region
    out.log_m = kNegInf;
    out.m = 0.0;
    return out;
  }

  // Center/scale for the substitution u = c + s tan(v): mode and curvature
  // of psi(u) = l_i(u) - log K + log g(u).
  auto psi = [&](double u) {
    return lik(u) - out.log_K + log_density(u, G);
  };
  double blo = -10.0 * sd_g, bhi = 10.0 * sd_g;
  if (mode.finite_mode) {
    blo = std::min(blo, mode.u_hat - 10.0 * sd_g);
    bhi = std::max(bhi, mode.u_hat + 10.0 * sd_g);
  }
  const auto center = maximize_expanding(psi, blo, bhi, 1e-8, 300);
  const double c = center.x;
  const double h = std::max({1e-6, 1e-3 * sd_g, 1e-6 * std::abs(c)});
  const double curv = (psi(c + h) - 2.0 * center.fx + psi(c - h)) / (h * h);
  double s = curv < 0.0 ? 1.0 / std::sqrt(-curv) : sd_g;
  if (!std::isfinite(s)) s = sd_g;
  s = std::min(std::max(s, 1e-12), 1e6);
  out.center = c;
  out.scale = s;

  const double shift = scaled ? out.log_K : 0.0;
  auto integrand = [&](double u) {
    return std::exp(lik(u) - shift + log_density(u, G));
  };
  const auto q = integrate_real_line(integrand, c, s, quad);
  out.quadrature_intervals = q.intervals;
  if (!q.converged) {
    std::ostringstream msg;
    msg << "quadrature for cluster " << cluster_id + 1
        << " did not converge (value " << q.value << ", error estimate "
        << q.error_estimate << ", intervals " << q.intervals << ")";
    throw NumericError(msg.str());
  }
  const double integral = std::max(q.value, 0.0);
  out.log_m = shift + std::log(integral);
  out.m = std::exp(out.log_m);
  return out;
}

}  // namespace

double cond_loglik_cluster(int cluster_id, double u_raw, const ModelSpec& spec,
                           const ParameterVector& eta,
                           const ClusteredDataset& data) {
  check_eta_dims(eta, data, spec);
  return ClusterLik(spec, eta, data, cluster_id)(u_raw);
}

ClusterMarginal marginal_lik_cluster(int cluster_id, const ModelSpec& spec,
                                     const ParameterVector& eta,
                                     const ClusteredDataset& data,
                                     const QuadratureOptions& quad) {
  check_eta_dims(eta, data, spec);
  ClusterLik lik(spec, eta, data, cluster_id);
  if (!spec.has_random_effects()) {
    ClusterMarginal out;
    out.log_m = out.log_K = lik(0.0);
    out.m = std::exp(out.log_m);
    return out;
  }
  return integrate_cluster(lik, reffects_of(spec, eta), quad, cluster_id, true);
}

double marginal_lik_cluster_unscaled(int cluster_id, const ModelSpec& spec,
                                     const ParameterVector& eta,
                                     const ClusteredDataset& data,
                                     const QuadratureOptions& quad) {
  check_eta_dims(eta, data, spec);
  if (!spec.has_random_effects())
    throw std::invalid_argument("marginal_lik_cluster_unscaled: GH model has no integral");
  ClusterLik lik(spec, eta, data, cluster_id);
  return integrate_cluster(lik, reffects_of(spec, eta), quad, cluster_id, false).m;
}

std::vector<ClusterMarginal> cluster_marginals(const ModelSpec& spec,
                                               const ParameterVector& eta,
                                               const ClusteredDataset& data,
                                               const EvalOptions& opts) {
  check_eta_dims(eta, data, spec);
  const Eigen::VectorXd lph = data.X * eta.beta;
  const Eigen::VectorXd lpt = data.p_tilde() > 0
                                  ? Eigen::VectorXd(data.x_tilde() * eta.alpha)
                                  : Eigen::VectorXd::Zero(data.n());
  const int r = data.r();
  std::vector<ClusterMarginal> out(r);

  auto eval_range = [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      ClusterLik lik(spec, eta, data, i, lph, lpt);
      if (!spec.has_random_effects()) {
        out[i].log_m = out[i].log_K = lik(0.0);
        out[i].m = std::exp(out[i].log_m);
      } else {
        out[i] = integrate_cluster(lik, reffects_of(spec, eta), opts.quad, i, true);
      }
    }
  };

  const int threads = std::max(1, std::min(opts.threads, r));
  if (threads == 1) {
    eval_range(0, r);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    const int chunk = (r + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          eval_range(t * chunk, std::min(r, (t + 1) * chunk));
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  return out;
}

double log_marginal(const ModelSpec& spec, const ParameterVector& eta,
                    const ClusteredDataset& data, const EvalOptions& opts) {
  const auto per_cluster = cluster_marginals(spec, eta, data, opts);
  double total = 0.0;
  for (const auto& cm : per_cluster) total += cm.log_m;  // fixed order
  return total;
}

}  // namespace megh
