#include "megh/estimation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "megh/errors.hpp"
#include "megh/mathutil.hpp"

namespace megh {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Embeds free optimization coordinates into the full unconstrained vector.
struct FixedMask {
  std::vector<int> free_idx;
  Eigen::VectorXd full_template;

  FixedMask(int dim, const std::vector<std::pair<int, double>>& fixed) {
    full_template = Eigen::VectorXd::Zero(dim);
    std::vector<bool> is_fixed(dim, false);
    for (const auto& [idx, val] : fixed) {
      if (idx < 0 || idx >= dim)
        throw std::invalid_argument("fit: fixed parameter index out of range");
      is_fixed[idx] = true;
      full_template(idx) = val;
    }
    for (int j = 0; j < dim; ++j)
      if (!is_fixed[j]) free_idx.push_back(j);
  }

  int free_dim() const { return static_cast<int>(free_idx.size()); }

  Eigen::VectorXd embed(const Eigen::VectorXd& z_free) const {
    Eigen::VectorXd z = full_template;
    for (int j = 0; j < free_dim(); ++j) z(free_idx[j]) = z_free(j);
    return z;
  }

  Eigen::VectorXd restrict(const Eigen::VectorXd& z_full) const {
    Eigen::VectorXd z(free_dim());
    for (int j = 0; j < free_dim(); ++j) z(j) = z_full(free_idx[j]);
    return z;
  }
};

Eigen::VectorXd moment_theta_init(const ModelSpec& spec,
                                  const ClusteredDataset& data) {
  if (spec.baseline == BaselineFamily::PGW) {
    Eigen::VectorXd theta(3);
    theta << data.times.mean(), 1.0, 1.1;
    return theta;
  }
  const double mu = data.log_times.mean();
  const double sd = std::sqrt(
      (data.log_times.array() - mu).square().sum() /
      std::max(1, data.n() - 1));
  Eigen::VectorXd theta(2);
  theta << mu, std::max(0.05, sd * std::sqrt(3.0) / M_PI);
  return theta;
}

Eigen::VectorXd default_xi(const ModelSpec& spec, double target_sd) {
  switch (spec.re_family) {
    case RandomEffectsFamily::Normal: {
      Eigen::VectorXd xi(1);
      xi << target_sd;
      return xi;
    }
    case RandomEffectsFamily::StudentT: {
      Eigen::VectorXd xi(1);
      xi << target_sd / std::sqrt(spec.t_dof / (spec.t_dof - 2.0));
      return xi;
    }
    default: {
      Eigen::VectorXd xi(2);
      xi << target_sd, 0.0;
      return xi;
    }
  }
}

}  // namespace

Eigen::VectorXd FitResult::estimates() const {
  const ParameterLayout layout(spec, p, p_tilde);
  Eigen::VectorXd z = layout.pack(eta_hat);
  Eigen::VectorXd est(z.size());
  const ParameterVector& e = eta_hat;
  int k = 0;
  for (int j = 0; j < e.beta.size(); ++j) est(k++) = e.beta(j);
  for (int j = 0; j < e.alpha.size(); ++j) est(k++) = e.alpha(j);
  for (int j = 0; j < e.theta.size(); ++j) est(k++) = e.theta(j);
  for (int j = 0; j < e.xi.size(); ++j) est(k++) = e.xi(j);
  return est;
}

double aic_of(double log_marginal_at_max, int n_parameters) {
  return -2.0 * log_marginal_at_max + 2.0 * n_parameters;
}

FitResult fit(const ModelSpec& spec, const ClusteredDataset& data,
              const FitConfig& config) {
  validate_model(spec, data.p(), data.p_tilde());
  const ParameterLayout layout(spec, data.p(), data.p_tilde());

  // Starting point: supplied init, else moment-fit baseline with zero
  // coefficients, warm-started through a GH fit for the mixed structures.
  ParameterVector init;
  if (config.init) {
    init = *config.init;
    validate_parameters(spec, init, data.p(), data.p_tilde());
  } else {
    if (spec.has_random_effects()) {
      ModelSpec gh = spec;
      gh.structure = HazardStructure::GH;
      FitConfig gh_config = config;
      gh_config.init.reset();
      gh_config.fixed.clear();
      gh_config.compute_covariance = false;
      gh_config.n_starts = 1;
      FitResult gh_fit = fit(gh, data, gh_config);
      init = gh_fit.eta_hat;
      init.xi = default_xi(spec, 0.5);
    } else {
      init.beta = Eigen::VectorXd::Zero(data.p());
      init.alpha = Eigen::VectorXd::Zero(data.p_tilde());
      init.theta = moment_theta_init(spec, data);
      init.xi.resize(0);
    }
  }

  const FixedMask mask(layout.dim(), config.fixed);
  EvalOptions eval{config.quad, config.threads};
  auto objective = [&](const Eigen::VectorXd& z_free) -> double {
    const Eigen::VectorXd z = mask.embed(z_free);
    try {
      const double lm = log_marginal(spec, layout.unpack(z), data, eval);
      return std::isnan(lm) ? kInf : -lm;
    } catch (const NumericError&) {
      return kInf;
    }
  };

  const Eigen::VectorXd z0 = mask.restrict(layout.pack(init));
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> jitter(0.0, 0.25);

  Eigen::VectorXd best_z;
  double best_f = kInf;
  bool best_converged = false;
  int best_iters = 0;
  int total_evals = 0;
  for (int s = 0; s < std::max(1, config.n_starts); ++s) {
    Eigen::VectorXd z_start = z0;
    if (s > 0)
      for (int j = 0; j < z_start.size(); ++j) z_start(j) += jitter(rng);
    OptimResult nm = nelder_mead_minimize(objective, z_start, config.nm);
    OptimResult qgn = bfgs_minimize(objective, nm.x, config.bfgs);
    const bool use_qn = qgn.fx <= nm.fx;
    const Eigen::VectorXd& zk = use_qn ? qgn.x : nm.x;
    const double fk = use_qn ? qgn.fx : nm.fx;
    const bool conv = nm.converged || qgn.converged;
    total_evals += nm.evaluations + qgn.evaluations;
    if (fk < best_f - 1e-8 || s == 0) {
      best_f = fk;
      best_z = zk;
      best_converged = conv;
      best_iters = nm.iterations + qgn.iterations;
    }
  }

  FitResult out;
  out.spec = spec;
  out.p = data.p();
  out.p_tilde = data.p_tilde();
  out.unconstrained = mask.embed(best_z);
  out.eta_hat = layout.unpack(out.unconstrained);
  out.log_marginal_at_max = -best_f;
  out.n_parameters = mask.free_dim();
  out.aic = aic_of(out.log_marginal_at_max, out.n_parameters);
  out.iterations = best_iters;
  out.evaluations = total_evals;
  out.converged = best_converged && std::isfinite(best_f);
  out.parameter_names = layout.names();
  out.is_fixed.assign(layout.dim(), true);
  for (int j : mask.free_idx) out.is_fixed[j] = false;
  if (config.compute_covariance) covariance_and_se(data, out, config);
  return out;
}

void covariance_and_se(const ClusteredDataset& data, FitResult& result,
                       const FitConfig& config) {
  const ParameterLayout layout(result.spec, result.p, result.p_tilde);
  const FixedMask mask(layout.dim(), config.fixed);
  EvalOptions eval{config.quad, config.threads};
  auto neg_logm = [&](const Eigen::VectorXd& z_free) -> double {
    const Eigen::VectorXd z = mask.embed(z_free);
    try {
      return -log_marginal(result.spec, layout.unpack(z), data, eval);
    } catch (const NumericError&) {
      return kInf;
    }
  };

  const Eigen::VectorXd z_hat = mask.restrict(result.unconstrained);
  const int m = mask.free_dim();
  Eigen::VectorXd steps(m);
  for (int j = 0; j < m; ++j)
    steps(j) = std::max(1e-4, 1e-4 * std::abs(z_hat(j)));
  Eigen::MatrixXd H = numerical_hessian(neg_logm, z_hat, steps);
  H = 0.5 * (H + H.transpose()).eval();

  const int dim = layout.dim();
  result.standard_errors = Eigen::VectorXd::Zero(dim);
  result.covariance = Eigen::MatrixXd::Zero(dim, dim);
  result.ci_lower = Eigen::VectorXd::Constant(dim, std::nan(""));
  result.ci_upper = Eigen::VectorXd::Constant(dim, std::nan(""));
  result.se_defined = false;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
  if (ldlt.info() != Eigen::Success || !H.allFinite()) return;
  Eigen::MatrixXd cov_unc = ldlt.solve(Eigen::MatrixXd::Identity(m, m));
  if (!cov_unc.allFinite()) return;
  bool pos = true;
  for (int j = 0; j < m; ++j) pos = pos && cov_unc(j, j) > 0.0;
  if (!pos) return;

  // Delta method onto the constrained scale.
  const Eigen::VectorXd jac = layout.jacobian_diag(result.unconstrained);
  Eigen::VectorXd jac_free(m);
  for (int j = 0; j < m; ++j) jac_free(j) = jac(mask.free_idx[j]);
  Eigen::MatrixXd cov_con =
      jac_free.asDiagonal() * cov_unc * jac_free.asDiagonal();

  const Eigen::VectorXd est = result.estimates();
  for (int a = 0; a < m; ++a) {
    const int ja = mask.free_idx[a];
    for (int b = 0; b < m; ++b)
      result.covariance(ja, mask.free_idx[b]) = cov_con(a, b);
    const double se = std::sqrt(cov_con(a, a));
    result.standard_errors(ja) = se;
    result.ci_lower(ja) = est(ja) - kZ975 * se;
    result.ci_upper(ja) = est(ja) + kZ975 * se;
  }
  result.se_defined = true;
}

}  // namespace megh
