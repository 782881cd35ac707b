#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "megh/diagnostics.hpp"
#include "megh/errors.hpp"
#include "megh/simulation.hpp"
#include "test_fixtures.hpp"

using namespace megh;

namespace {
FitResult quick_fit(const SimTruth& truth, const ClusteredDataset& data) {
  FitConfig fc;
  fc.n_starts = 1;
  fc.compute_covariance = false;
  return fit(truth.model, data, fc);
}
}  // namespace

TEST_CASE("boundary p-values: frozen arithmetic") {
  // chi2_1 tail 0.09997, chi2_2 tail e^{-1.353} = 0.25846
  CHECK(boundary_pvalue(MixtureCase::Case5_one_variance, 2.706) ==
        doctest::Approx(0.050).epsilon(1e-3));
  CHECK(boundary_pvalue(MixtureCase::Case7_two_variances, 2.706) ==
        doctest::Approx(0.1146).epsilon(1e-3));
  // tighter frozen values from the erfc/exp closed forms
  CHECK(boundary_pvalue(MixtureCase::Case5_one_variance, 2.706) ==
        doctest::Approx(0.0499856891).epsilon(1e-7));
  CHECK(boundary_pvalue(MixtureCase::Case7_two_variances, 2.706) ==
        doctest::Approx(0.1146016154).epsilon(1e-7));
}

TEST_CASE("boundary p-value: R = 0 gives exactly one") {
  CHECK(boundary_pvalue(MixtureCase::Case5_one_variance, 0.0) == 1.0);
  CHECK(boundary_pvalue(MixtureCase::Case7_two_variances, 0.0) == 1.0);
}

TEST_CASE("boundary p-values are monotone nonincreasing in the statistic") {
  for (const auto mix :
       {MixtureCase::Case5_one_variance, MixtureCase::Case7_two_variances}) {
    double prev = 1.0;
    for (double r = 0.0; r <= 12.0; r += 0.25) {
      const double p = boundary_pvalue(mix, r);
      CHECK(p <= prev + 1e-15);
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
      prev = p;
    }
  }
}

TEST_CASE("invalid statistic rejected") {
  CHECK_THROWS_AS((void)boundary_pvalue(MixtureCase::Case5_one_variance, -0.1),
                  std::invalid_argument);
}

TEST_CASE("gradient function: G-average identity and positivity") {
  for (const auto structure :
       {HazardStructure::MEGH_I, HazardStructure::MEGH_II}) {
    const auto truth = fixtures::small_truth(structure, 0.8, 240, 8);
    const auto data = simulate_times(truth, 60);
    const auto f = quick_fit(truth, data);
    REQUIRE(f.converged);
    CHECK(gradient_identity(f, data) == doctest::Approx(1.0).epsilon(1e-4));

    const auto diag = gradient_function(f, data);
    CHECK(diag.grid.size() == 101);
    const double sd = stddev(reffects_of(f.spec, f.eta_hat));
    CHECK(diag.grid(0) == doctest::Approx(-4.0 * sd));
    CHECK(diag.grid(100) == doctest::Approx(4.0 * sd));
    for (int g = 0; g < diag.delta.size(); ++g) {
      CHECK(diag.delta(g) >= 0.0);
      CHECK(std::isfinite(diag.delta(g)));
    }
  }
}

TEST_CASE("gradient diagnostic refuses a GH fit") {
  const auto truth = fixtures::small_truth(HazardStructure::GH, 0.8, 120, 6);
  const auto data = simulate_times(truth, 61);
  ModelSpec gh = truth.model;
  const auto f = quick_fit(truth, data);
  CHECK_THROWS_AS((void)gradient_function(f, data), std::logic_error);
  CHECK_THROWS_AS((void)default_gradient_grid(f), std::logic_error);
}

TEST_CASE("bands: determinism, failure accounting, degenerate input") {
  const auto truth = fixtures::small_truth(HazardStructure::MEGH_I, 0.8, 160, 8);
  const auto data = simulate_times(truth, 62);
  const auto f = quick_fit(truth, data);
  REQUIRE(f.converged);
  auto diag1 = gradient_function(f, data);
  auto diag2 = gradient_function(f, data);

  BandOptions opts;
  opts.n_boot = 12;
  opts.seed = 9;
  opts.refit.n_starts = 1;
  gradient_bands(diag1, f, data, opts);
  gradient_bands(diag2, f, data, opts);
  REQUIRE(diag1.has_bands);
  CHECK((diag1.band_lower - diag2.band_lower).cwiseAbs().maxCoeff() == 0.0);
  CHECK((diag1.band_upper - diag2.band_upper).cwiseAbs().maxCoeff() == 0.0);
  for (int g = 0; g < diag1.grid.size(); ++g)
    CHECK(diag1.band_lower(g) <= diag1.band_upper(g));
  CHECK(diag1.n_boot == 12);
  CHECK(diag1.n_boot_failed <= 2);

  BandOptions zero;
  zero.n_boot = 0;
  CHECK_THROWS_AS(gradient_bands(diag1, f, data, zero), std::invalid_argument);

  // two jobs, same seed: identical bands
  auto diag3 = gradient_function(f, data);
  BandOptions two = opts;
  two.jobs = 2;
  gradient_bands(diag3, f, data, two);
  CHECK((diag1.band_upper - diag3.band_upper).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("boundary LRT on simulated data") {
  // strong random effect: overwhelming rejection
  const auto truth = fixtures::small_truth(HazardStructure::MEGH_I, 1.0, 300, 10);
  const auto data = simulate_times(truth, 63);
  FitConfig fc;
  fc.n_starts = 1;
  fc.compute_covariance = false;
  const auto lrt = lrt_random_effects(truth.model, data, fc);
  CHECK(lrt.statistic >= 0.0);
  CHECK(lrt.mixture == MixtureCase::Case5_one_variance);
  CHECK(lrt.p_value < 0.01);
  CHECK(lrt.p_value ==
        doctest::Approx(boundary_pvalue(lrt.mixture, lrt.statistic)));
  CHECK(lrt.full.log_marginal_at_max >= lrt.reduced.log_marginal_at_max - 1e-9);

  ModelSpec gh = truth.model;
  gh.structure = HazardStructure::GH;
  CHECK_THROWS_AS((void)lrt_random_effects(gh, data, fc), std::invalid_argument);
}
