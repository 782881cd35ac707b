#pragma once

#include <Eigen/Core>
#include <functional>

namespace megh {

using ScalarFn = std::function<double(double)>;
using VectorFn = std::function<double(const Eigen::VectorXd&)>;

struct Optim1DResult {
  double x = 0.0;
  double fx = 0.0;
  int evaluations = 0;
  bool at_boundary = false;
};

// Maximize f on [lo, hi] with Brent's method (golden section + parabolic
// interpolation). No derivatives needed.
Optim1DResult maximize_scalar(const ScalarFn& f, double lo, double hi,
                              double x_tol = 1e-8, int max_iter = 200);

// Maximize over an interval that is grown (factor 4 per side) while the
// maximum keeps landing on an endpoint. Used for the inner random-effect
// maximization, which starts on [-10 sd, 10 sd].
Optim1DResult maximize_expanding(const ScalarFn& f, double lo, double hi,
                                 double x_tol = 1e-8, int max_iter = 200,
                                 int max_expand = 48);

struct NelderMeadOptions {
  double f_tol = 1e-8;
  double x_tol = 1e-6;
  int max_iter = 4000;
  double init_step = 0.25;
};

struct BfgsOptions {
  double grad_tol = 1e-5;
  double f_tol = 1e-8;
  double x_tol = 1e-6;
  int max_iter = 200;
  double fd_step = 1e-4;  // relative central-difference step for gradients
};

struct OptimResult {
  Eigen::VectorXd x;
  double fx = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

OptimResult nelder_mead_minimize(const VectorFn& f, const Eigen::VectorXd& x0,
                                 const NelderMeadOptions& opts = {});

// Quasi-Newton polish with numerical central-difference gradients and a
// backtracking Armijo line search.
OptimResult bfgs_minimize(const VectorFn& f, const Eigen::VectorXd& x0,
                          const BfgsOptions& opts = {});

Eigen::VectorXd numerical_gradient(const VectorFn& f, const Eigen::VectorXd& x,
                                   double rel_step = 1e-4);

// Central-difference Hessian via the symmetric four-point cross formula.
// steps[j] is the absolute step in coordinate j.
Eigen::MatrixXd numerical_hessian(const VectorFn& f, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& steps);

}  // namespace megh
