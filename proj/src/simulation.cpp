#include "megh/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "megh/diagnostics.hpp"
#include "megh/errors.hpp"
#include "megh/mathutil.hpp"

namespace megh {

std::vector<int> equal_cluster_sizes(int n, int r) {
  if (n < r || r < 1) throw ValidationError("simulation: need n >= r >= 1");
  std::vector<int> sizes(r, n / r);
  for (int i = 0; i < n % r; ++i) ++sizes[i];
  return sizes;
}

void validate_sim_truth(const SimTruth& truth) {
  const int p = static_cast<int>(truth.covariates.size());
  const int p_tilde = static_cast<int>(truth.time_scale_columns.size());
  for (int c : truth.time_scale_columns)
    if (c < 0 || c >= p)
      throw ValidationError("simulation: time-scale column out of range");
  validate_parameters(truth.model, truth.truth, p, p_tilde, false);
  if (truth.cluster_sizes.empty())
    throw ValidationError("simulation: no clusters");
  for (int s : truth.cluster_sizes)
    if (s < 1) throw ValidationError("simulation: empty cluster in truth");
  if (!(truth.censoring_target >= 0.0 && truth.censoring_target < 1.0))
    throw ValidationError("simulation: censoring target must lie in [0, 1)");
}

namespace {

double draw_covariate(const CovariateSpec& spec, std::mt19937_64& rng) {
  if (spec.kind == CovariateSpec::Kind::Bernoulli) {
    std::uniform_real_distribution<double> unif;
    return unif(rng) < spec.prob ? 1.0 : 0.0;
  }
  std::normal_distribution<double> z;
  return z(rng);
}

// Draws one uncensored survival time given the linear predictors and the
// (u, u~) pair, by inverting H(t) = E.
double invert_time(double E, double lp_haz, double lp_time,
                   const RandomEffectPair& re, const BaselineHazard& base) {
  const double s = E * std::exp(-(lp_haz - lp_time + re.u - re.u_tilde));
  return H0_inv(s, base) * std::exp(-(lp_time + re.u_tilde));
}

struct RawDraws {
  std::vector<double> times;  // uncensored event times o_ij
  std::vector<int> cluster;
  Eigen::MatrixXd X;
};

RawDraws draw_event_times(const SimTruth& truth,
                          const std::vector<double>& effects,
                          std::uint64_t seed) {
  const int p = static_cast<int>(truth.covariates.size());
  const int r = static_cast<int>(truth.cluster_sizes.size());
  int n = 0;
  for (int s : truth.cluster_sizes) n += s;

  const BaselineHazard base = baseline_of(truth.model, truth.truth);
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> exp1(1.0);

  RawDraws out;
  out.times.resize(n);
  out.cluster.resize(n);
  out.X.resize(n, p);
  Eigen::VectorXd x(p);
  int row = 0;
  for (int i = 0; i < r; ++i) {
    const RandomEffectPair re =
        structure_effects(truth.model.structure, effects[i]);
    for (int j = 0; j < truth.cluster_sizes[i]; ++j, ++row) {
      for (int c = 0; c < p; ++c) x(c) = draw_covariate(truth.covariates[c], rng);
      double lp_time = 0.0;
      for (std::size_t c = 0; c < truth.time_scale_columns.size(); ++c)
        lp_time += x(truth.time_scale_columns[c]) * truth.truth.alpha(c);
      const double lp_haz = x.dot(truth.truth.beta);
      const double E = exp1(rng);
      out.times[row] = invert_time(E, lp_haz, lp_time, re, base);
      out.cluster[row] = i;
      out.X.row(row) = x;
    }
  }
  return out;
}

std::vector<double> draw_effects(const SimTruth& truth, std::uint64_t seed) {
  const int r = static_cast<int>(truth.cluster_sizes.size());
  std::vector<double> effects(r, 0.0);
  if (truth.model.has_random_effects()) {
    const RandomEffectsDist g = reffects_of(truth.model, truth.truth);
    std::mt19937_64 rng(seed);
    for (int i = 0; i < r; ++i) effects[i] = sample_one(g, rng);
  }
  return effects;
}

std::vector<std::string> covariate_names(const SimTruth& truth) {
  std::vector<std::string> names;
  for (const auto& c : truth.covariates) names.push_back(c.name);
  return names;
}

ClusteredDataset censor_and_pack(const SimTruth& truth, RawDraws draws,
                                 double cmax, std::uint64_t censor_seed) {
  const int n = static_cast<int>(draws.times.size());
  Eigen::VectorXd times(n);
  std::vector<int> status(n, 1);
  std::mt19937_64 rng(censor_seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    double t = draws.times[i];
    if (cmax > 0.0) {
      const double c = cmax * unif(rng);
      if (c < t) {
        t = c;
        status[i] = 0;
      }
    }
    // guard against a zero censoring draw; times must stay positive
    times(i) = std::max(t, 1e-300);
  }
  return make_dataset(std::move(times), std::move(status),
                      std::move(draws.cluster), std::move(draws.X),
                      truth.time_scale_columns, covariate_names(truth));
}

double expected_censoring(const std::vector<double>& pilot, double cmax) {
  // c ~ U(0, cmax): P(c < o) = min(o / cmax, 1)
  double acc = 0.0;
  for (double o : pilot) acc += std::min(o / cmax, 1.0);
  return acc / static_cast<double>(pilot.size());
}

}  // namespace

namespace {

double bisect_cmax(const std::vector<double>& pilot, double target) {
  double lo = 1e-12, hi = 1.0;
  while (expected_censoring(pilot, hi) > target) hi *= 2.0;
  for (int it = 0; it < 200 && (hi - lo) > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (expected_censoring(pilot, mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Pilot event times conditioned on the dataset's realized cluster effects, so
// the per-dataset censoring proportion concentrates at the target.
double calibrate_cmax_given_effects(const SimTruth& truth,
                                    const std::vector<double>& effects,
                                    std::uint64_t seed, int pilot_size) {
  if (truth.censoring_target <= 0.0) return 0.0;
  SimTruth pilot_truth = truth;
  const int r = static_cast<int>(truth.cluster_sizes.size());
  pilot_truth.cluster_sizes = equal_cluster_sizes(std::max(pilot_size, r), r);
  const auto draws =
      draw_event_times(pilot_truth, effects, derive_seed(seed, 102));
  return bisect_cmax(draws.times, truth.censoring_target);
}

}  // namespace

double calibrate_censoring_cmax(const SimTruth& truth, std::uint64_t seed,
                                int pilot_size) {
  validate_sim_truth(truth);
  if (truth.censoring_target <= 0.0) return 0.0;
  const auto effects = draw_effects(truth, derive_seed(seed, 1));
  return calibrate_cmax_given_effects(truth, effects, seed, pilot_size);
}

ClusteredDataset simulate_times(const SimTruth& truth, std::uint64_t seed) {
  validate_sim_truth(truth);
  const auto effects = draw_effects(truth, derive_seed(seed, 1));
  return simulate_times_with_effects(truth, effects, seed);
}

ClusteredDataset simulate_times_with_effects(const SimTruth& truth,
                                             const std::vector<double>& effects,
                                             std::uint64_t seed) {
  validate_sim_truth(truth);
  if (effects.size() != truth.cluster_sizes.size())
    throw std::invalid_argument("simulation: one effect per cluster required");
  auto draws = draw_event_times(truth, effects, derive_seed(seed, 2));
  const double cmax = calibrate_cmax_given_effects(truth, effects, seed, 10000);
  return censor_and_pack(truth, std::move(draws), cmax, derive_seed(seed, 3));
}

ClusteredDataset simulate_conditional(const ModelSpec& spec,
                                      const ParameterVector& eta,
                                      const ClusteredDataset& design,
                                      double censoring_target,
                                      std::uint64_t seed) {
  const BaselineHazard base = baseline_of(spec, eta);
  const Eigen::VectorXd lph = design.X * eta.beta;
  const Eigen::VectorXd lpt =
      design.p_tilde() > 0 ? Eigen::VectorXd(design.x_tilde() * eta.alpha)
                           : Eigen::VectorXd::Zero(design.n());

  std::mt19937_64 rng(derive_seed(seed, 11));
  std::exponential_distribution<double> exp1(1.0);
  std::vector<double> effects(design.r(), 0.0);
  if (spec.has_random_effects()) {
    const RandomEffectsDist g = reffects_of(spec, eta);
    for (int i = 0; i < design.r(); ++i) effects[i] = sample_one(g, rng);
  }
  std::vector<double> o(design.n());
  for (int row = 0; row < design.n(); ++row) {
    const RandomEffectPair re =
        structure_effects(spec.structure, effects[design.cluster[row]]);
    o[row] = invert_time(exp1(rng), lph(row), lpt(row), re, base);
  }

  const double cmax = censoring_target > 0.0 ? bisect_cmax(o, censoring_target) : 0.0;

  Eigen::VectorXd times(design.n());
  std::vector<int> status(design.n(), 1);
  std::mt19937_64 crng(derive_seed(seed, 12));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int row = 0; row < design.n(); ++row) {
    double t = o[row];
    if (cmax > 0.0) {
      const double c = cmax * unif(crng);
      if (c < t) {
        t = c;
        status[row] = 0;
      }
    }
    times(row) = std::max(t, 1e-300);
  }
  return make_dataset(std::move(times), std::move(status), design.cluster,
                      design.X, design.time_scale_columns,
                      design.covariate_names, design.cluster_labels);
}

std::string model_label(const ModelSpec& spec) {
  std::string label = structure_name(spec.structure);
  label += "_";
  label += baseline_name(spec.baseline);
  if (spec.has_random_effects()) {
    label += "_";
    label += re_family_name(spec.re_family);
  }
  return label;
}

namespace {

std::map<std::string, double> truth_by_name(const SimTruth& truth) {
  const int p = static_cast<int>(truth.covariates.size());
  const int pt = static_cast<int>(truth.time_scale_columns.size());
  const ParameterLayout layout(truth.model, p, pt);
  const auto names = layout.names();
  std::map<std::string, double> out;
  int k = 0;
  for (int j = 0; j < p; ++j) out[names[k++]] = truth.truth.beta(j);
  for (int j = 0; j < pt; ++j) out[names[k++]] = truth.truth.alpha(j);
  for (int j = 0; j < truth.truth.theta.size(); ++j)
    out[names[k++]] = truth.truth.theta(j);
  for (int j = 0; j < truth.truth.xi.size(); ++j)
    out[names[k++]] = truth.truth.xi(j);
  return out;
}

RepRecord run_replication(const StudyConfig& config, int rep,
                          const std::map<std::string, double>& truth_values) {
  RepRecord rec;
  rec.rep = rep;
  rec.seed = derive_seed(config.seed, static_cast<std::uint64_t>(rep));
  const ClusteredDataset data = simulate_times(config.truth, rec.seed);
  rec.censoring_rate = data.censoring_rate();

  // GH reduction needed by the LRT; reuse it when it is among the fit models.
  int gh_index = -1;
  for (std::size_t m = 0; m < config.fit_models.size(); ++m)
    if (!config.fit_models[m].has_random_effects()) gh_index = static_cast<int>(m);

  std::vector<FitResult> fits(config.fit_models.size());
  rec.models.resize(config.fit_models.size());
  for (std::size_t m = 0; m < config.fit_models.size(); ++m) {
    RepModelRecord& mr = rec.models[m];
    try {
      FitConfig fc = config.fit;
      fc.seed = derive_seed(rec.seed, 1000 + static_cast<std::uint64_t>(m));
      fits[m] = fit(config.fit_models[m], data, fc);
      const FitResult& f = fits[m];
      mr.ok = true;
      mr.converged = f.converged;
      mr.log_marginal = f.log_marginal_at_max;
      mr.aic = f.aic;
      const auto est = f.estimates();
      for (std::size_t j = 0; j < f.parameter_names.size(); ++j) {
        const auto& name = f.parameter_names[j];
        mr.estimates[name] = est(j);
        if (f.se_defined) {
          mr.standard_errors[name] = f.standard_errors(j);
          auto it = truth_values.find(name);
          if (it != truth_values.end())
            mr.ci_covers[name] =
                (it->second >= f.ci_lower(j) && it->second <= f.ci_upper(j)) ? 1 : 0;
        }
      }
    } catch (const std::exception&) {
      mr.ok = false;
    }
  }

  // boundary LRT for each mixed model against the GH reduction
  for (std::size_t m = 0; m < config.fit_models.size(); ++m) {
    if (!config.fit_models[m].has_random_effects() || !rec.models[m].ok)
      continue;
    double gh_logm;
    if (gh_index >= 0 && rec.models[gh_index].ok) {
      gh_logm = rec.models[gh_index].log_marginal;
    } else {
      try {
        ModelSpec gh = config.fit_models[m];
        gh.structure = HazardStructure::GH;
        FitConfig fc = config.fit;
        fc.seed = derive_seed(rec.seed, 2000 + static_cast<std::uint64_t>(m));
        fc.compute_covariance = false;
        gh_logm = fit(gh, data, fc).log_marginal_at_max;
      } catch (const std::exception&) {
        continue;
      }
    }
    RepModelRecord& mr = rec.models[m];
    mr.has_lrt = true;
    mr.lrt_statistic = std::max(0.0, 2.0 * (mr.log_marginal - gh_logm));
    mr.lrt_p = boundary_pvalue(MixtureCase::Case5_one_variance, mr.lrt_statistic);
  }
  return rec;
}

}  // namespace

StudyReport run_study(const StudyConfig& config) {
  validate_sim_truth(config.truth);
  if (config.fit_models.empty())
    throw ValidationError("study: no models to fit");
  const auto truth_values = truth_by_name(config.truth);

  StudyReport report;
  report.n_reps = config.n_reps;
  report.seed = config.seed;
  for (const auto& spec : config.fit_models)
    report.model_labels.push_back(model_label(spec));
  report.reps.resize(config.n_reps);

  const int jobs = std::max(1, config.jobs);
  if (jobs == 1) {
    for (int rep = 0; rep < config.n_reps; ++rep)
      report.reps[rep] = run_replication(config, rep, truth_values);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) {
      pool.emplace_back([&] {
        for (;;) {
          const int rep = next.fetch_add(1);
          if (rep >= config.n_reps) return;
          report.reps[rep] = run_replication(config, rep, truth_values);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  // aggregate
  for (std::size_t m = 0; m < config.fit_models.size(); ++m) {
    ModelStudySummary summary;
    summary.label = report.model_labels[m];
    summary.spec = config.fit_models[m];
    double aic_acc = 0.0;
    int lrt_n = 0, lrt_rej = 0;
    std::map<std::string, std::vector<double>> est;
    std::map<std::string, std::pair<int, int>> cover;  // covered, total
    for (const auto& rec : report.reps) {
      const RepModelRecord& mr = rec.models[m];
      if (!mr.ok) {
        ++summary.n_failed;
        continue;
      }
      ++summary.n_ok;
      aic_acc += mr.aic;
      for (const auto& [name, value] : mr.estimates) est[name].push_back(value);
      for (const auto& [name, c] : mr.ci_covers) {
        cover[name].first += c;
        cover[name].second += 1;
      }
      if (mr.has_lrt) {
        ++lrt_n;
        if (mr.lrt_p < config.lrt_level) ++lrt_rej;
      }
    }
    summary.mean_aic = summary.n_ok > 0 ? aic_acc / summary.n_ok : 0.0;
    summary.lrt_rejection_rate =
        lrt_n > 0 ? static_cast<double>(lrt_rej) / lrt_n : -1.0;
    for (auto& [name, values] : est) {
      ParamSummary ps;
      ps.name = name;
      ps.n = static_cast<int>(values.size());
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= ps.n;
      double var = 0.0, mae = 0.0;
      auto it = truth_values.find(name);
      ps.truth = it != truth_values.end() ? it->second : 0.0;
      for (double v : values) {
        var += sq(v - mean);
        mae += std::abs(v - ps.truth);
      }
      ps.mean = mean;
      ps.bias = mean - ps.truth;
      ps.mean_abs_error = mae / ps.n;
      ps.mc_se = ps.n > 1 ? std::sqrt(var / (ps.n - 1) / ps.n) : 0.0;
      auto cit = cover.find(name);
      ps.coverage = (cit != cover.end() && cit->second.second > 0)
                        ? static_cast<double>(cit->second.first) / cit->second.second
                        : -1.0;
      summary.params.push_back(ps);
    }
    report.models.push_back(summary);
  }
  return report;
}

}  // namespace megh
