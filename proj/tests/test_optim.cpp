#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "megh/optim.hpp"

using namespace megh;

namespace {
double rosenbrock(const Eigen::VectorXd& x) {
  double acc = 0.0;
  for (int i = 0; i + 1 < x.size(); ++i)
    acc += 100.0 * std::pow(x(i + 1) - x(i) * x(i), 2) + std::pow(1.0 - x(i), 2);
  return acc;
}
}  // namespace

TEST_CASE("Brent finds an interior maximum") {
  const auto r = maximize_scalar([](double x) { return -(x - 2.0) * (x - 2.0); },
                                 0.0, 10.0, 1e-10);
  CHECK(r.x == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(r.fx == doctest::Approx(0.0));
  CHECK_FALSE(r.at_boundary);
}

TEST_CASE("expanding bracket reaches a far-away maximum") {
  const auto r = maximize_expanding(
      [](double x) { return -(x - 50.0) * (x - 50.0); }, -1.0, 1.0, 1e-10);
  CHECK(r.x == doctest::Approx(50.0).epsilon(1e-6));
  CHECK_FALSE(r.at_boundary);
}

TEST_CASE("expanding bracket flags a maximum at infinity") {
  const auto r = maximize_expanding([](double x) { return x; }, -1.0, 1.0,
                                    1e-8, 100, 8);
  CHECK(r.at_boundary);
}

TEST_CASE("Nelder-Mead on the 2-d Rosenbrock valley") {
  Eigen::VectorXd x0(2);
  x0 << -1.2, 1.0;
  const auto r = nelder_mead_minimize(rosenbrock, x0);
  CHECK(r.converged);
  CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.x(1) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("BFGS polish tightens a loose Nelder-Mead solution") {
  Eigen::VectorXd x0(2);
  x0 << -1.2, 1.0;
  NelderMeadOptions loose;
  loose.max_iter = 120;  // deliberately under-converged
  const auto nm = nelder_mead_minimize(rosenbrock, x0, loose);
  const auto qn = bfgs_minimize(rosenbrock, nm.x);
  CHECK(qn.fx <= nm.fx);
  CHECK(qn.fx < 1e-8);
  for (int i = 0; i < 2; ++i) CHECK(qn.x(i) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("4-d Rosenbrock: both optimizers stop at a stationary point") {
  // n >= 4 Rosenbrock has a second, local minimum near x1 = -0.78; the
  // contract is stationarity, not global optimality (fit() multi-starts).
  Eigen::VectorXd x0(4);
  x0 << -1.2, 1.0, 0.5, 2.0;
  const auto nm = nelder_mead_minimize(rosenbrock, x0);
  const auto qn = bfgs_minimize(rosenbrock, nm.x);
  CHECK(qn.converged);
  const auto g = numerical_gradient(rosenbrock, qn.x);
  CHECK(g.cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("BFGS solves a quadratic to gradient tolerance") {
  auto f = [](const Eigen::VectorXd& x) {
    double acc = 0.0;
    for (int i = 0; i < x.size(); ++i) acc += (i + 1) * x(i) * x(i);
    return acc;
  };
  Eigen::VectorXd x0 = Eigen::VectorXd::Constant(6, 3.0);
  const auto r = bfgs_minimize(f, x0);
  CHECK(r.converged);
  CHECK(r.x.cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("numerical gradient and hessian of a known quadratic") {
  Eigen::MatrixXd A(3, 3);
  A << 4.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 2.0;
  auto f = [&](const Eigen::VectorXd& x) { return 0.5 * x.dot(A * x); };
  Eigen::VectorXd x(3);
  x << 0.3, -1.2, 0.7;
  const Eigen::VectorXd g = numerical_gradient(f, x);
  CHECK((g - A * x).cwiseAbs().maxCoeff() < 1e-6);
  const Eigen::VectorXd steps = Eigen::VectorXd::Constant(3, 1e-4);
  const Eigen::MatrixXd H = numerical_hessian(f, x, steps);
  CHECK((H - A).cwiseAbs().maxCoeff() < 1e-5);
  // the four-point cross formula is symmetric by construction
  CHECK((H - H.transpose()).cwiseAbs().maxCoeff() < 1e-6);
}
