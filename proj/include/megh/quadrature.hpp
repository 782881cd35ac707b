#pragma once

#include <functional>

namespace megh {

struct QuadratureOptions {
  double abs_tol = 1e-9;
  double rel_tol = 1e-7;
  int max_intervals = 2000;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int intervals = 0;
  bool converged = false;
};

// Adaptive Gauss-Kronrod (G7/K15 pair, bisection on the largest-error
// interval) on a finite interval [a, b].
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b,
                                    const QuadratureOptions& opts = {},
                                    int initial_segments = 1);

// Integral over the whole real line through the substitution
// u = center + scale * tan(v), v in (-pi/2, pi/2).
QuadratureResult integrate_real_line(const std::function<double(double)>& f,
                                     double center, double scale,
                                     const QuadratureOptions& opts = {});

}  // namespace megh
