#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "megh/hazard.hpp"
#include "megh/quadrature.hpp"

using namespace megh;

namespace {
Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}
}  // namespace

TEST_CASE("structure_effects maps the scalar effect per structure") {
  CHECK(structure_effects(HazardStructure::MEGH_I, 0.7).u == 0.7);
  CHECK(structure_effects(HazardStructure::MEGH_I, 0.7).u_tilde == 0.0);
  CHECK(structure_effects(HazardStructure::MEGH_II, 0.7).u == 0.7);
  CHECK(structure_effects(HazardStructure::MEGH_II, 0.7).u_tilde == 0.7);
  CHECK(structure_effects(HazardStructure::GH, 0.7).u == 0.0);
  CHECK(structure_effects(HazardStructure::GH, 0.7).u_tilde == 0.0);
}

TEST_CASE("reduces to the baseline when effects vanish") {
  const auto b = make_pgw(0.2, 1.5, 3.0);
  RegressionCoefficients coef{vec({0.0, 0.0}), vec({0.0})};
  const auto x = vec({1.3, -0.4});
  const auto xt = vec({1.3});
  for (double t : {0.25, 1.0, 4.0})
    CHECK(cond_log_hazard(t, x, xt, 0.0, 0.0, coef, b) ==
          doctest::Approx(log_h0(t, b)).epsilon(1e-12));
}

TEST_CASE("AFT form at alpha=beta, x~=x, u~=u") {
  const auto b = make_loglogistic(0.3, 0.8);
  RegressionCoefficients coef{vec({0.6}), vec({0.6})};
  const auto x = vec({0.9});
  const double u = 0.4;
  for (double t : {0.5, 2.0}) {
    const double lp = 0.6 * 0.9 + u;
    CHECK(cond_log_hazard(t, x, x, u, u, coef, b) ==
          doctest::Approx(log_h0(t * std::exp(lp), b) + lp).epsilon(1e-12));
  }
}

TEST_CASE("exponential baseline kills the time-scale term") {
  const auto b = make_pgw(1.0, 1.0, 1.0);
  RegressionCoefficients coef{vec({0.3}), vec({-1.7})};
  const auto x = vec({1.0});
  const auto xt = vec({1.0});
  // log h0 == 0, so the log-hazard equals x'b + u = 0.5 for any alpha, u~
  CHECK(cond_log_hazard(2.3, x, xt, 0.2, 0.9, coef, b) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(cond_log_hazard(0.04, x, xt, 0.2, -2.0, coef, b) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("cumulative hazard closed form and t=0") {
  const auto b = make_pgw(0.7, 1.8, 2.5);
  RegressionCoefficients coef{vec({0.5, -0.2}), vec({0.4})};
  const auto x = vec({1.1, 0.3});
  const auto xt = vec({1.1});
  CHECK(cond_cum_hazard(0.0, x, xt, 0.3, 0.1, coef, b) == 0.0);

  // MEGH-I display: H0(t e^{x~'a}) e^{x'b - x~'a + u}
  const double u = 0.45;
  const double lpt = 0.4 * 1.1;
  const double lph = 0.5 * 1.1 - 0.2 * 0.3;
  for (double t : {0.2, 1.0, 5.0})
    CHECK(cond_cum_hazard(t, x, xt, u, 0.0, coef, b) ==
          doctest::Approx(H0(t * std::exp(lpt), b) * std::exp(lph - lpt + u))
              .epsilon(1e-12));
}

TEST_CASE("cumulative hazard equals the integral of the hazard") {
  const auto pgw = make_pgw(0.6, 1.7, 2.2);
  const auto ll = make_loglogistic(-0.2, 0.7);
  RegressionCoefficients coef{vec({0.4}), vec({0.8})};
  const auto x = vec({1.0});
  const auto xt = vec({1.0});
  for (const auto& b : {pgw, ll}) {
    for (const auto re : {RandomEffectPair{0.5, 0.0}, RandomEffectPair{0.5, 0.5},
                          RandomEffectPair{-0.8, 0.3}}) {
      for (double t : {0.4, 1.7}) {
        const auto q = integrate_adaptive(
            [&](double s) {
              return std::exp(cond_log_hazard(s, x, xt, re.u, re.u_tilde, coef, b));
            },
            1e-12, t, {1e-12, 1e-9, 4000});
        REQUIRE(q.converged);
        CHECK(cond_cum_hazard(t, x, xt, re.u, re.u_tilde, coef, b) ==
              doctest::Approx(q.value).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("nesting: MEPH, MEAFT and AH forms are literal reductions") {
  const auto b = make_pgw(0.8, 1.3, 2.4);
  const auto x = vec({0.7, -0.5});
  const auto xt = vec({0.7});
  const double u = 0.6;

  // alpha = 0: MEGH-I log-hazard equals log h0(t) + x'b + u
  RegressionCoefficients ph{vec({0.5, 0.3}), vec({0.0})};
  for (double t : {0.3, 2.1})
    CHECK(cond_log_hazard(t, x, xt, u, 0.0, ph, b) ==
          doctest::Approx(log_h0(t, b) + x.dot(ph.beta) + u).epsilon(1e-12));

  // alpha = beta, x~ = x, MEGH-II: accelerated failure time form
  RegressionCoefficients aft{vec({0.5}), vec({0.5})};
  const auto x1 = vec({0.7});
  for (double t : {0.3, 2.1}) {
    const double lp = 0.5 * 0.7 + u;
    CHECK(cond_log_hazard(t, x1, x1, u, u, aft, b) ==
          doctest::Approx(log_h0(t * std::exp(lp), b) + lp).epsilon(1e-12));
  }

  // beta = 0, GH: accelerated hazards form h0(t e^{x~'a})
  RegressionCoefficients ah{vec({0.0}), vec({0.9})};
  for (double t : {0.3, 2.1})
    CHECK(cond_log_hazard(t, x1, x1, 0.0, 0.0, ah, b) ==
          doctest::Approx(log_h0(t * std::exp(0.9 * 0.7), b)).epsilon(1e-12));
}

TEST_CASE("conditional survival is a proper nonincreasing survival curve") {
  const auto b = make_loglogistic(0.1, 1.3);
  RegressionCoefficients coef{vec({0.4}), vec({-0.3})};
  const auto x = vec({1.2});
  const auto xt = vec({1.2});
  double prev_s = 1.0, prev_H = 0.0;
  for (double t = 0.1; t < 40.0; t *= 1.6) {
    const double H = cond_cum_hazard(t, x, xt, 0.7, 0.7, coef, b);
    const double s = std::exp(-H);
    CHECK(H >= prev_H);
    CHECK(s > 0.0);
    CHECK(s <= prev_s);
    prev_s = s;
    prev_H = H;
  }
}

TEST_CASE("dimension mismatch is a contract error") {
  const auto b = make_pgw(1.0, 1.2, 2.0);
  RegressionCoefficients coef{vec({0.1, 0.2}), vec({0.3})};
  CHECK_THROWS_AS(
      (void)cond_log_hazard(1.0, vec({1.0}), vec({1.0}), 0, 0, coef, b),
      std::invalid_argument);
  CHECK_THROWS_AS(
      (void)cond_cum_hazard(1.0, vec({1.0, 2.0}), vec({1.0, 2.0}), 0, 0, coef, b),
      std::invalid_argument);
}
