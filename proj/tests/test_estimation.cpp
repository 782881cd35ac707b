#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "megh/errors.hpp"
#include "megh/estimation.hpp"
#include "megh/simulation.hpp"
#include "test_fixtures.hpp"

using namespace megh;

namespace {
// uncensored unit-exponential data without covariates
ClusteredDataset exponential_data(int n, std::uint64_t seed, double rate = 1.0) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> draw(rate);
  Eigen::VectorXd t(n);
  std::vector<int> status(n, 1), cluster(n, 0);
  for (int i = 0; i < n; ++i) t(i) = draw(rng);
  return make_dataset(t, status, cluster, Eigen::MatrixXd(n, 0), {});
}
}  // namespace

TEST_CASE("GH fit with PGW(.,1,1) fixed recovers the exponential MLE") {
  const auto data = exponential_data(500, 42, 2.0);
  ModelSpec spec{HazardStructure::GH, BaselineFamily::PGW,
                 RandomEffectsFamily::Normal};
  FitConfig fc;
  fc.n_starts = 1;
  // unconstrained layout for p=0 is (log eta, log nu, log delta)
  fc.fixed = {{1, 0.0}, {2, 0.0}};
  const auto f = fit(spec, data, fc);
  CHECK(f.converged);
  const double eta_hat = f.eta_hat.theta(0);
  const double mean_t = data.times.mean();
  // exponential MLE: rate 1/mean(t), i.e. scale eta = mean(t)
  CHECK(eta_hat == doctest::Approx(mean_t).epsilon(1e-4));
  // closed-form maximum: sum(-log eta - t/eta) = -n (log mean + 1)
  CHECK(f.log_marginal_at_max ==
        doctest::Approx(-500.0 * (std::log(mean_t) + 1.0)).epsilon(1e-8));
  CHECK(f.n_parameters == 1);
  CHECK(f.aic == doctest::Approx(-2.0 * f.log_marginal_at_max + 2.0));
}

TEST_CASE("refitting from the returned optimum is a fixed point") {
  const auto truth = fixtures::small_truth(HazardStructure::MEGH_I);
  const auto data = simulate_times(truth, 9);
  FitConfig fc;
  fc.n_starts = 1;
  fc.compute_covariance = false;
  const auto f1 = fit(truth.model, data, fc);
  REQUIRE(f1.converged);
  FitConfig fc2 = fc;
  fc2.init = f1.eta_hat;
  const auto f2 = fit(truth.model, data, fc2);
  CHECK(f2.log_marginal_at_max ==
        doctest::Approx(f1.log_marginal_at_max).epsilon(1e-8));
  CHECK((f2.unconstrained - f1.unconstrained).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("the optimum is a stationary point of the unconstrained objective") {
  const auto truth = fixtures::small_truth(HazardStructure::MEGH_I, 0.8, 240, 8);
  const auto data = simulate_times(truth, 15);
  FitConfig fc;
  fc.n_starts = 1;
  fc.compute_covariance = false;
  const auto f = fit(truth.model, data, fc);
  REQUIRE(f.converged);
  const ParameterLayout layout(truth.model, data.p(), data.p_tilde());
  const auto grad = numerical_gradient(
      [&](const Eigen::VectorXd& z) {
        return log_marginal(truth.model, layout.unpack(z), data);
      },
      f.unconstrained, 1e-4);
  CHECK(grad.cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("rescaling a covariate rescales its coefficient and nothing else") {
  auto truth = fixtures::small_truth(HazardStructure::MEGH_I, 0.8, 240, 8);
  const auto data = simulate_times(truth, 23);
  ClusteredDataset scaled = data;
  const double c = 10.0;
  scaled.X.col(1) /= c;  // x2 is hazard-scale only
  FitConfig fc;
  fc.n_starts = 1;
  fc.compute_covariance = false;
  const auto f1 = fit(truth.model, data, fc);
  const auto f2 = fit(truth.model, scaled, fc);
  REQUIRE(f1.converged);
  REQUIRE(f2.converged);
  CHECK(f2.log_marginal_at_max ==
        doctest::Approx(f1.log_marginal_at_max).epsilon(1e-6));
  CHECK(f2.eta_hat.beta(1) == doctest::Approx(c * f1.eta_hat.beta(1)).epsilon(1e-3));
  CHECK(f2.eta_hat.beta(0) == doctest::Approx(f1.eta_hat.beta(0)).epsilon(1e-3));
}

TEST_CASE("GH evaluation equals the mixed model at the zero-variance limit") {
  const auto truth = fixtures::small_truth(HazardStructure::MEGH_I);
  const auto data = simulate_times(truth, 44);
  ModelSpec gh = truth.model;
  gh.structure = HazardStructure::GH;
  ParameterVector eta_gh = truth.truth;
  eta_gh.xi.resize(0);
  ParameterVector eta_eps = truth.truth;
  eta_eps.xi << 1e-8;
  CHECK(std::abs(log_marginal(gh, eta_gh, data) -
                 log_marginal(truth.model, eta_eps, data)) < 1e-4);
}

TEST_CASE("parameter counts per model") {
  CHECK(ParameterLayout({HazardStructure::GH, BaselineFamily::PGW,
                         RandomEffectsFamily::Normal}, 4, 1).dim() == 8);
  CHECK(ParameterLayout({HazardStructure::MEGH_I, BaselineFamily::PGW,
                         RandomEffectsFamily::Normal}, 4, 1).dim() == 9);
  CHECK(ParameterLayout({HazardStructure::MEGH_II, BaselineFamily::LogLogistic,
                         RandomEffectsFamily::TwoPieceNormal}, 4, 1).dim() == 9);
  CHECK(ParameterLayout({HazardStructure::MEGH_I, BaselineFamily::LogLogistic,
                         RandomEffectsFamily::StudentT}, 2, 0).dim() == 5);
}

TEST_CASE("pack/unpack is a bijection") {
  const ParameterLayout layout({HazardStructure::MEGH_I, BaselineFamily::PGW,
                                RandomEffectsFamily::TwoPieceNormal}, 3, 2);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z;
  for (int rep = 0; rep < 25; ++rep) {
    Eigen::VectorXd v(layout.dim());
    for (int j = 0; j < v.size(); ++j) v(j) = 2.0 * z(rng);
    const Eigen::VectorXd round = layout.pack(layout.unpack(v));
    CHECK((round - v).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("hessian-based standard errors are defined and positive") {
  const auto truth = fixtures::small_truth(HazardStructure::MEGH_I, 0.8, 240, 8);
  const auto data = simulate_times(truth, 6);
  FitConfig fc;
  fc.n_starts = 1;
  const auto f = fit(truth.model, data, fc);
  REQUIRE(f.converged);
  REQUIRE(f.se_defined);
  for (int j = 0; j < f.standard_errors.size(); ++j) {
    CHECK(f.standard_errors(j) > 0.0);
    CHECK(f.ci_lower(j) < f.ci_upper(j));
  }
  // covariance is symmetric psd within tolerance
  CHECK((f.covariance - f.covariance.transpose()).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("numerical hessian of the objective is symmetric by construction") {
  const auto truth = fixtures::small_truth(HazardStructure::MEGH_I, 0.8, 120, 6);
  const auto data = simulate_times(truth, 3);
  const ParameterLayout layout(truth.model, data.p(), data.p_tilde());
  const Eigen::VectorXd z = layout.pack(truth.truth);
  Eigen::VectorXd steps(z.size());
  for (int j = 0; j < z.size(); ++j)
    steps(j) = std::max(1e-4, 1e-4 * std::abs(z(j)));
  const auto H = numerical_hessian(
      [&](const Eigen::VectorXd& v) {
        return -log_marginal(truth.model, layout.unpack(v), data);
      },
      z, steps);
  CHECK((H - H.transpose()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("weibull-degenerate init is rejected; GH xi rejected") {
  const auto truth = fixtures::small_truth(HazardStructure::MEGH_I);
  const auto data = simulate_times(truth, 2);
  FitConfig fc;
  fc.init = truth.truth;
  fc.init->theta << 0.5, 1.3, 1.0;  // delta = 1: Weibull
  CHECK_THROWS_AS((void)fit(truth.model, data, fc), ValidationError);
}

TEST_CASE("non-convergence is flagged, never silent") {
  const auto truth = fixtures::small_truth(HazardStructure::MEGH_I, 0.8, 120, 6);
  const auto data = simulate_times(truth, 12);
  FitConfig fc;
  fc.n_starts = 1;
  fc.compute_covariance = false;
  fc.nm.max_iter = 3;  // starved optimizer budget
  fc.bfgs.max_iter = 1;
  const auto f = fit(truth.model, data, fc);
  CHECK_FALSE(f.converged);
}
