#include "megh/diagnostics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

#include "megh/errors.hpp"
#include "megh/likelihood.hpp"
#include "megh/mathutil.hpp"
#include "megh/simulation.hpp"

namespace megh {

double chisq1_survival(double x) { return std::erfc(std::sqrt(0.5 * x)); }
double chisq2_survival(double x) { return std::exp(-0.5 * x); }

double boundary_pvalue(MixtureCase mixture, double r_obs) {
  if (r_obs < 0.0 || !std::isfinite(r_obs))
    throw std::invalid_argument("boundary_pvalue: statistic must be >= 0");
  if (r_obs == 0.0) return 1.0;
  const double p1 = chisq1_survival(r_obs);
  if (mixture == MixtureCase::Case5_one_variance) return 0.5 * p1;
  return 0.5 * p1 + 0.25 * chisq2_survival(r_obs);
}

Eigen::VectorXd default_gradient_grid(const FitResult& fit, int n_points) {
  if (!fit.spec.has_random_effects())
    throw std::logic_error("gradient diagnostic: undefined for a GH fit");
  const double half = 4.0 * stddev(reffects_of(fit.spec, fit.eta_hat));
  return Eigen::VectorXd::LinSpaced(n_points, -half, half);
}

namespace {

Eigen::VectorXd delta_on_grid(const ModelSpec& spec, const ParameterVector& eta,
                              const ClusteredDataset& data,
                              const Eigen::VectorXd& grid,
                              const QuadratureOptions& quad) {
  const auto marginals = cluster_marginals(spec, eta, data, {quad, 1});
  const Eigen::VectorXd lph = data.X * eta.beta;
  const Eigen::VectorXd lpt = data.p_tilde() > 0
                                  ? Eigen::VectorXd(data.x_tilde() * eta.alpha)
                                  : Eigen::VectorXd::Zero(data.n());
  std::vector<ClusterLik> liks;
  liks.reserve(data.r());
  for (int i = 0; i < data.r(); ++i)
    liks.emplace_back(spec, eta, data, i, lph, lpt);

  Eigen::VectorXd delta(grid.size());
  for (int g = 0; g < grid.size(); ++g) {
    double acc = 0.0;
    for (int i = 0; i < data.r(); ++i)
      acc += std::exp(liks[i](grid(g)) - marginals[i].log_m);
    delta(g) = acc / data.r();
  }
  return delta;
}

}  // namespace

double gradient_identity(const FitResult& fit, const ClusteredDataset& data,
                         const QuadratureOptions& quad) {
  if (!fit.spec.has_random_effects())
    throw std::logic_error("gradient identity: undefined for a GH fit");
  const ModelSpec& spec = fit.spec;
  const ParameterVector& eta = fit.eta_hat;
  const auto marginals = cluster_marginals(spec, eta, data, {quad, 1});
  const Eigen::VectorXd lph = data.X * eta.beta;
  const Eigen::VectorXd lpt = data.p_tilde() > 0
                                  ? Eigen::VectorXd(data.x_tilde() * eta.alpha)
                                  : Eigen::VectorXd::Zero(data.n());
  std::vector<ClusterLik> liks;
  liks.reserve(data.r());
  for (int i = 0; i < data.r(); ++i)
    liks.emplace_back(spec, eta, data, i, lph, lpt);
  const RandomEffectsDist g = reffects_of(spec, eta);

  double total = 0.0;
  for (int i = 0; i < data.r(); ++i) {
    auto integrand = [&](double u) {
      return std::exp(liks[i](u) - marginals[i].log_m + log_density(u, g));
    };
    const auto q =
        integrate_real_line(integrand, marginals[i].center, marginals[i].scale, quad);
    total += q.value;
  }
  return total / data.r();
}

GradientDiagnostic gradient_function(const FitResult& fit,
                                     const ClusteredDataset& data,
                                     const Eigen::VectorXd& grid,
                                     const QuadratureOptions& quad) {
  if (!fit.spec.has_random_effects())
    throw std::logic_error("gradient diagnostic: undefined for a GH fit");
  GradientDiagnostic out;
  out.grid = grid.size() > 0 ? grid : default_gradient_grid(fit);
  for (int g = 1; g < out.grid.size(); ++g)
    if (!(out.grid(g) > out.grid(g - 1)))
      throw std::invalid_argument("gradient diagnostic: grid must be strictly increasing");
  out.delta = delta_on_grid(fit.spec, fit.eta_hat, data, out.grid, quad);
  return out;
}

void gradient_bands(GradientDiagnostic& diag, const FitResult& fitted,
                    const ClusteredDataset& data, const BandOptions& opts) {
  if (opts.n_boot <= 0)
    throw std::invalid_argument("gradient bands: n_boot must be positive");
  if (!fitted.spec.has_random_effects())
    throw std::logic_error("gradient bands: undefined for a GH fit");

  const double censoring = data.censoring_rate();
  const int B = opts.n_boot;
  std::vector<Eigen::VectorXd> curves(B);
  std::vector<char> ok(B, 0);

  FitConfig refit = opts.refit;
  refit.init = fitted.eta_hat;
  refit.n_starts = std::max(1, std::min(refit.n_starts, 2));
  refit.compute_covariance = false;

  auto one_boot = [&](int b) {
    const std::uint64_t seed_b = derive_seed(opts.seed, b);
    try {
      const ClusteredDataset boot = simulate_conditional(
          fitted.spec, fitted.eta_hat, data, censoring, seed_b);
      FitConfig fc = refit;
      fc.seed = derive_seed(seed_b, 7);
      const FitResult refit_res = fit(fitted.spec, boot, fc);
      if (!refit_res.converged) return;
      curves[b] = delta_on_grid(fitted.spec, refit_res.eta_hat, boot,
                                diag.grid, refit.quad);
      ok[b] = 1;
    } catch (const std::exception&) {
      // dropped and counted below
    }
  };

  const int jobs = std::max(1, opts.jobs);
  if (jobs == 1) {
    for (int b = 0; b < B; ++b) one_boot(b);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t)
      pool.emplace_back([&] {
        for (;;) {
          const int b = next.fetch_add(1);
          if (b >= B) return;
          one_boot(b);
        }
      });
    for (auto& th : pool) th.join();
  }

  int n_ok = 0;
  for (int b = 0; b < B; ++b) n_ok += ok[b];
  diag.n_boot = B;
  diag.n_boot_failed = B - n_ok;
  diag.band_warning = diag.n_boot_failed > 0.2 * B;
  if (n_ok == 0)
    throw NumericError("gradient bands: every bootstrap refit failed");

  // Simultaneous 95% band by rank envelope: peel k extreme order statistics
  // per grid point, with k chosen so at least 95% of the bootstrap curves lie
  // entirely inside the band. Pointwise percentile bands do not control the
  // whole-curve level (their familywise containment is far below nominal).
  const int G = static_cast<int>(diag.grid.size());
  const int m = n_ok;
  std::vector<std::vector<double>> sorted(G);
  std::vector<const Eigen::VectorXd*> kept;
  kept.reserve(m);
  for (int b = 0; b < B; ++b)
    if (ok[b]) kept.push_back(&curves[b]);
  for (int g = 0; g < G; ++g) {
    sorted[g].reserve(m);
    for (const auto* c : kept) sorted[g].push_back((*c)(g));
    std::sort(sorted[g].begin(), sorted[g].end());
  }
  // two-sided rank depth of each curve: distance of its most extreme point
  // from the ensemble edge
  std::vector<int> depth(m, m);
  for (int b = 0; b < m; ++b) {
    for (int g = 0; g < G; ++g) {
      const auto& col = sorted[g];
      const double v = (*kept[b])(g);
      const int below = static_cast<int>(
          std::lower_bound(col.begin(), col.end(), v) - col.begin());
      const int above = static_cast<int>(
          col.end() - std::upper_bound(col.begin(), col.end(), v));
      depth[b] = std::min(depth[b], std::min(below, above) + 1);
    }
  }
  const int need = static_cast<int>(std::ceil(0.95 * m));
  int k_star = 1;
  for (int k = 1; k <= m / 2; ++k) {
    int inside = 0;
    for (int b = 0; b < m; ++b) inside += (depth[b] >= k);
    if (inside >= need)
      k_star = k;
    else
      break;
  }
  diag.band_lower.resize(G);
  diag.band_upper.resize(G);
  for (int g = 0; g < G; ++g) {
    diag.band_lower(g) = sorted[g][k_star - 1];
    diag.band_upper(g) = sorted[g][m - k_star];
  }
  diag.has_bands = true;
  diag.exceeds = false;
  for (int g = 0; g < G; ++g)
    if (diag.delta(g) > diag.band_upper(g)) diag.exceeds = true;
}

LRTResult lrt_random_effects(const ModelSpec& model_with,
                             const ClusteredDataset& data,
                             const FitConfig& config) {
  if (!model_with.has_random_effects())
    throw std::invalid_argument("lrt_random_effects: the alternative must carry random effects");
  LRTResult out;
  out.full = fit(model_with, data, config);
  ModelSpec reduced = model_with;
  reduced.structure = HazardStructure::GH;
  out.reduced = fit(reduced, data, config);
  if (!out.full.converged || !out.reduced.converged)
    throw NumericError(
        std::string("lrt_random_effects: fit did not converge (full: ") +
        (out.full.converged ? "ok" : "failed") + ", reduced: " +
        (out.reduced.converged ? "ok" : "failed") + "); test refused");
  out.statistic = std::max(
      0.0, 2.0 * (out.full.log_marginal_at_max - out.reduced.log_marginal_at_max));
  // the fitted subclasses share one scalar effect: single-variance boundary
  out.mixture = MixtureCase::Case5_one_variance;
  out.p_value = boundary_pvalue(out.mixture, out.statistic);
  return out;
}

}  // namespace megh
