#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "megh/errors.hpp"
#include "megh/hazard.hpp"
#include "megh/likelihood.hpp"
#include "megh/mathutil.hpp"
#include "megh/simulation.hpp"
#include "test_fixtures.hpp"
#include "test_oracles.hpp"

using namespace megh;

namespace {

ParameterVector unit_exponential_eta(int p, double sigma) {
  ParameterVector eta;
  eta.beta = Eigen::VectorXd::Zero(p);
  eta.alpha.resize(0);
  eta.theta = Eigen::VectorXd(3);
  eta.theta << 1.0, 1.0, 1.0;
  eta.xi = Eigen::VectorXd(1);
  eta.xi << sigma;
  return eta;
}

// Monte Carlo oracle for the scaled cluster marginal: draws u ~ G and
// averages exp(l_i(u) - log K); returns the estimate and its standard error.
struct McMarginal {
  double log_m;
  double mc_se_rel;
  double mean;
  double se;
  double log_K;
};

McMarginal mc_marginal(const ModelSpec& spec, const ParameterVector& eta,
                       const ClusteredDataset& data, int cluster, int n_draws,
                       std::uint64_t seed) {
  const ClusterLik lik(spec, eta, data, cluster);
  const double log_K = lik.maximize(stddev(reffects_of(spec, eta))).log_K;
  const auto g = reffects_of(spec, eta);
  std::mt19937_64 rng(seed);
  double acc = 0.0, acc2 = 0.0;
  for (int k = 0; k < n_draws; ++k) {
    const double v = std::exp(lik(sample_one(g, rng)) - log_K);
    acc += v;
    acc2 += v * v;
  }
  const double mean = acc / n_draws;
  const double var = (acc2 / n_draws - mean * mean) / n_draws;
  McMarginal out;
  out.mean = mean;
  out.se = std::sqrt(std::max(var, 0.0));
  out.log_m = log_K + std::log(mean);
  out.mc_se_rel = out.se / mean;
  out.log_K = log_K;
  return out;
}

}  // namespace

TEST_CASE("single-subject exponential cluster log-likelihood") {
  ModelSpec spec{HazardStructure::MEGH_I, BaselineFamily::PGW,
                 RandomEffectsFamily::Normal};
  const auto eta = unit_exponential_eta(1, 1.0);
  // d=1: log h - H = 0 - 2; d=0: censored contribution is -H = -2
  CHECK(cond_loglik_cluster(0, 0.0, spec, eta, fixtures::single_subject(2.0, 1)) ==
        doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(cond_loglik_cluster(0, 0.0, spec, eta, fixtures::single_subject(2.0, 0)) ==
        doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("cluster log-likelihood is additive over per-subject terms") {
  for (const auto structure :
       {HazardStructure::MEGH_I, HazardStructure::MEGH_II}) {
    const auto truth = fixtures::small_truth(structure);
    const auto data = simulate_times(truth, 31);
    const ModelSpec spec = truth.model;
    ParameterVector eta = truth.truth;
    eta.beta << 0.5, -0.2;  // arbitrary eta, not the truth
    eta.alpha << 0.3;
    const auto base = baseline_of(spec, eta);
    const RegressionCoefficients coef{eta.beta, eta.alpha};
    for (double u : {-0.7, 0.0, 1.1}) {
      const auto re = structure_effects(structure, u);
      for (int cluster : {0, 5}) {
        // independent per-subject evaluation through the hazard module
        double sum_single = 0.0;
        for (int row : data.cluster_rows[cluster]) {
          const Eigen::VectorXd x = data.X.row(row);
          const Eigen::VectorXd xt = data.row_tilde(row);
          if (data.status[row] == 1)
            sum_single += cond_log_hazard(data.times(row), x, xt, re.u,
                                          re.u_tilde, coef, base);
          sum_single -= cond_cum_hazard(data.times(row), x, xt, re.u,
                                        re.u_tilde, coef, base);
        }
        CHECK(cond_loglik_cluster(cluster, u, spec, eta, data) ==
              doctest::Approx(sum_single).epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("degenerate G: sigma -> 0 recovers the conditional at u=0") {
  const auto truth = fixtures::small_truth(HazardStructure::MEGH_I);
  const auto data = simulate_times(truth, 5);
  ParameterVector eta = truth.truth;
  eta.xi << 1e-8;
  for (int i : {0, 3, 7}) {
    const double l0 = cond_loglik_cluster(i, 0.0, truth.model, eta, data);
    const auto cm = marginal_lik_cluster(i, truth.model, eta, data);
    CHECK(cm.log_m == doctest::Approx(l0).epsilon(1e-6));
  }
}

TEST_CASE("marginal likelihood agrees with Monte Carlo integration") {
  // grid over structures, baselines and random-effects families
  std::vector<SimTruth> truths;
  truths.push_back(fixtures::small_truth(HazardStructure::MEGH_I));
  truths.push_back(fixtures::small_truth(HazardStructure::MEGH_II));
  {
    auto t = fixtures::small_truth(HazardStructure::MEGH_I);
    t.model.baseline = BaselineFamily::LogLogistic;
    t.truth.theta = Eigen::VectorXd(2);
    t.truth.theta << 0.2, 0.6;
    truths.push_back(t);
  }
  {
    auto t = fixtures::small_truth(HazardStructure::MEGH_I);
    t.model.re_family = RandomEffectsFamily::StudentT;
    truths.push_back(t);
  }
  {
    auto t = fixtures::small_truth(HazardStructure::MEGH_II);
    t.model.re_family = RandomEffectsFamily::TwoPieceNormal;
    t.truth.xi = Eigen::VectorXd(2);
    t.truth.xi << 0.8, 0.4;
    truths.push_back(t);
  }

  std::mt19937_64 rng(17);
  std::normal_distribution<double> jitter(0.0, 0.15);
  int checked = 0;
  for (std::size_t k = 0; k < truths.size(); ++k) {
    const auto& truth = truths[k];
    const auto data = simulate_times(truth, 100 + k);
    ParameterVector eta = truth.truth;
    for (int rep = 0; rep < 2; ++rep) {
      for (int j = 0; j < eta.beta.size(); ++j) eta.beta(j) += jitter(rng);
      const int cluster = static_cast<int>(rng() % data.r());
      const auto cm = marginal_lik_cluster(cluster, truth.model, eta, data);
      const auto mc =
          mc_marginal(truth.model, eta, data, cluster, 100000, 900 + rep);
      const double quad_mean = std::exp(cm.log_m - mc.log_K);
      CHECK(std::abs(quad_mean - mc.mean) <= 3.0 * mc.se);
      ++checked;
    }
  }
  CHECK(checked == 10);
}

TEST_CASE("one-subject exponential with normal frailty: refined-quadrature oracle") {
  ModelSpec spec{HazardStructure::MEGH_I, BaselineFamily::PGW,
                 RandomEffectsFamily::Normal};
  const auto data = fixtures::single_subject(2.0, 1);
  const auto eta = unit_exponential_eta(1, 0.9);
  const auto cm = marginal_lik_cluster(0, spec, eta, data);
  // oracle: direct integrand at 10x refinement, log-normal frailty form
  // m = E_u[e^u exp(-t e^u)] with t = 2
  const auto g = make_normal_re(0.9);
  const auto q = integrate_real_line(
      [&](double u) {
        return std::exp(u - 2.0 * std::exp(u) + log_density(u, g));
      },
      0.0, 0.9, {1e-13, 1e-11, 20000});
  REQUIRE(q.converged);
  CHECK(cm.log_m == doctest::Approx(std::log(q.value)).epsilon(1e-8));
}

TEST_CASE("total log marginal: single cluster, GH reduction, permutation") {
  const auto truth = fixtures::small_truth(HazardStructure::MEGH_I);
  const auto data = simulate_times(truth, 77);

  // r = 1: equals the single-cluster marginal
  {
    Eigen::VectorXd t1(data.cluster_rows[0].size());
    Eigen::MatrixXd X1(data.cluster_rows[0].size(), data.p());
    std::vector<int> d1, c1;
    for (std::size_t j = 0; j < data.cluster_rows[0].size(); ++j) {
      const int row = data.cluster_rows[0][j];
      t1(j) = data.times(row);
      X1.row(j) = data.X.row(row);
      d1.push_back(data.status[row]);
      c1.push_back(0);
    }
    const auto one = make_dataset(t1, d1, c1, X1, {0});
    CHECK(log_marginal(truth.model, truth.truth, one) ==
          doctest::Approx(marginal_lik_cluster(0, truth.model, truth.truth, one).log_m)
              .epsilon(1e-12));
  }

  // GH: no integration, equals the sum of conditional terms at u = 0
  {
    ModelSpec gh = truth.model;
    gh.structure = HazardStructure::GH;
    ParameterVector eta = truth.truth;
    eta.xi.resize(0);
    double direct = 0.0;
    const auto base = baseline_of(gh, eta);
    const RegressionCoefficients coef{eta.beta, eta.alpha};
    for (int i = 0; i < data.n(); ++i) {
      const Eigen::VectorXd x = data.X.row(i);
      const Eigen::VectorXd xt = data.row_tilde(i);
      if (data.status[i] == 1)
        direct += cond_log_hazard(data.times(i), x, xt, 0, 0, coef, base);
      direct -= cond_cum_hazard(data.times(i), x, xt, 0, 0, coef, base);
    }
    CHECK(log_marginal(gh, eta, data) == doctest::Approx(direct).epsilon(1e-10));
  }

  // permuting cluster order leaves the sum unchanged
  {
    std::vector<int> perm_cluster(data.cluster.size());
    const int r = data.r();
    for (std::size_t i = 0; i < data.cluster.size(); ++i)
      perm_cluster[i] = (data.cluster[i] + 5) % r;
    const auto permuted = make_dataset(data.times, data.status, perm_cluster,
                                       data.X, data.time_scale_columns);
    const double a = log_marginal(truth.model, truth.truth, data);
    const double b = log_marginal(truth.model, truth.truth, permuted);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("K-scaled and unscaled marginals agree where both are finite") {
  const auto truth = fixtures::small_truth(HazardStructure::MEGH_I, 0.8, 72, 6);
  const auto data = simulate_times(truth, 13);
  for (int i = 0; i < data.r(); ++i) {
    const auto scaled = marginal_lik_cluster(i, truth.model, truth.truth, data);
    const double unscaled =
        marginal_lik_cluster_unscaled(i, truth.model, truth.truth, data);
    if (unscaled > 0.0 && std::isfinite(unscaled))
      CHECK(scaled.m == doctest::Approx(unscaled).epsilon(1e-8));
  }
}

TEST_CASE("threaded cluster evaluation is bit-identical to serial") {
  const auto truth = fixtures::small_truth(HazardStructure::MEGH_I);
  const auto data = simulate_times(truth, 3);
  const double serial = log_marginal(truth.model, truth.truth, data, {{}, 1});
  const double threaded = log_marginal(truth.model, truth.truth, data, {{}, 2});
  CHECK(serial == threaded);
}

TEST_CASE("tightening quadrature tolerances moves log m_i by less than 1e-6") {
  const auto truth = fixtures::small_truth(HazardStructure::MEGH_II);
  const auto data = simulate_times(truth, 7);
  QuadratureOptions tight{1e-11, 1e-9, 8000};
  for (int i : {0, 4, 9}) {
    const double a = marginal_lik_cluster(i, truth.model, truth.truth, data).log_m;
    const double b =
        marginal_lik_cluster(i, truth.model, truth.truth, data, tight).log_m;
    CHECK(a == doctest::Approx(b).epsilon(1e-6));
  }
}

TEST_CASE("log marginal is continuous: difference quotients stable under halving") {
  const auto truth = fixtures::small_truth(HazardStructure::MEGH_I);
  const auto data = simulate_times(truth, 21);
  const ParameterLayout layout(truth.model, data.p(), data.p_tilde());
  const Eigen::VectorXd z0 = layout.pack(truth.truth);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> dir;
  for (int rep = 0; rep < 3; ++rep) {
    Eigen::VectorXd v(z0.size());
    for (int j = 0; j < v.size(); ++j) v(j) = dir(rng);
    v.normalize();
    auto slope = [&](double h) {
      const double fp =
          log_marginal(truth.model, layout.unpack(z0 + h * v), data);
      const double fm =
          log_marginal(truth.model, layout.unpack(z0 - h * v), data);
      return (fp - fm) / (2.0 * h);
    };
    const double s1 = slope(1e-3);
    const double s2 = slope(5e-4);
    CHECK(s2 == doctest::Approx(s1).epsilon(0.05));
  }
}

TEST_CASE("quadrature non-convergence carries the cluster id") {
  const auto truth = fixtures::small_truth(HazardStructure::MEGH_I);
  const auto data = simulate_times(truth, 2);
  QuadratureOptions starved{1e-16, 1e-16, 2};
  try {
    (void)marginal_lik_cluster(3, truth.model, truth.truth, data, starved);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("cluster 4") != std::string::npos);
  }
}

TEST_CASE("dimension mismatches are contract errors") {
  const auto truth = fixtures::small_truth(HazardStructure::MEGH_I);
  const auto data = simulate_times(truth, 2);
  ParameterVector bad = truth.truth;
  bad.beta = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS((void)log_marginal(truth.model, bad, data),
                  std::invalid_argument);
}
