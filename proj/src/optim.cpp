#include "megh/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace megh {

namespace {
constexpr double kGolden = 0.3819660112501051;  // (3 - sqrt(5)) / 2
}

Optim1DResult maximize_scalar(const ScalarFn& f, double lo, double hi,
                              double x_tol, int max_iter) {
  // Brent's localmin on -f.
  Optim1DResult out;
  double a = lo, b = hi;
  double x = a + kGolden * (b - a);
  double w = x, v = x;
  double fx = -f(x);
  out.evaluations = 1;
  double fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    const double m = 0.5 * (a + b);
    const double tol = x_tol * std::abs(x) + 1e-12;
    const double tol2 = 2.0 * tol;
    if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) break;
    double p = 0.0, q = 0.0, r = 0.0;
    bool use_golden = true;
    if (std::abs(e) > tol) {
      // parabolic fit through (v, fv), (w, fw), (x, fx)
      r = (x - w) * (fx - fv);
      q = (x - v) * (fx - fw);
      p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double e_old = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_old) && p > q * (a - x) &&
          p < q * (b - x)) {
        d = p / q;
        double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (x < m) ? tol : -tol;
        use_golden = false;
      }
    }
    if (use_golden) {
      e = (x < m) ? b - x : a - x;
      d = kGolden * e;
    }
    const double u = (std::abs(d) >= tol) ? x + d : x + ((d > 0) ? tol : -tol);
    const double fu = -f(u);
    ++out.evaluations;
    if (fu <= fx) {
      if (u < x) b = x; else a = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  out.x = x;
  out.fx = -fx;
  out.at_boundary = (x - lo) < 1e-8 * (hi - lo) || (hi - x) < 1e-8 * (hi - lo);
  return out;
}

Optim1DResult maximize_expanding(const ScalarFn& f, double lo, double hi,
                                 double x_tol, int max_iter, int max_expand) {
  Optim1DResult res;
  for (int k = 0; k <= max_expand; ++k) {
    res = maximize_scalar(f, lo, hi, x_tol, max_iter);
    const double width = hi - lo;
    const bool near_lo = res.x - lo < 0.05 * width;
    const bool near_hi = hi - res.x < 0.05 * width;
    if (!near_lo && !near_hi) return res;
    if (near_lo) lo -= 1.5 * width;
    if (near_hi) hi += 1.5 * width;
  }
  res.at_boundary = true;
  return res;
}

OptimResult nelder_mead_minimize(const VectorFn& f, const Eigen::VectorXd& x0,
                                 const NelderMeadOptions& opts) {
  const int n = static_cast<int>(x0.size());
  OptimResult out;
  std::vector<Eigen::VectorXd> simplex(n + 1, x0);
  std::vector<double> fvals(n + 1);
  for (int j = 0; j < n; ++j)
    simplex[j + 1](j) += opts.init_step * std::max(1.0, std::abs(x0(j)));
  for (int j = 0; j <= n; ++j) fvals[j] = f(simplex[j]);
  out.evaluations = n + 1;

  std::vector<int> order(n + 1);
  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return fvals[a] < fvals[b]; });
    const int best = order[0], worst = order[n], second = order[n - 1];

    double max_f_spread = 0.0, max_x_spread = 0.0;
    for (int j = 0; j <= n; ++j) {
      max_f_spread = std::max(max_f_spread, std::abs(fvals[j] - fvals[best]));
      max_x_spread = std::max(
          max_x_spread, (simplex[j] - simplex[best]).cwiseAbs().maxCoeff());
    }
    if (max_f_spread < opts.f_tol && max_x_spread < opts.x_tol) {
      out.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int j = 0; j <= n; ++j)
      if (j != worst) centroid += simplex[j];
    centroid /= n;

    Eigen::VectorXd xr = centroid + alpha * (centroid - simplex[worst]);
    double fr = f(xr);
    ++out.evaluations;
    if (fr < fvals[best]) {
      Eigen::VectorXd xe = centroid + gamma * (xr - centroid);
      double fe = f(xe);
      ++out.evaluations;
      if (fe < fr) { simplex[worst] = xe; fvals[worst] = fe; }
      else { simplex[worst] = xr; fvals[worst] = fr; }
    } else if (fr < fvals[second]) {
      simplex[worst] = xr;
      fvals[worst] = fr;
    } else {
      const bool outside = fr < fvals[worst];
      Eigen::VectorXd xc =
          outside ? Eigen::VectorXd(centroid + rho * (xr - centroid))
                  : Eigen::VectorXd(centroid - rho * (centroid - simplex[worst]));
      double fc = f(xc);
      ++out.evaluations;
      if (fc < std::min(fr, fvals[worst])) {
        simplex[worst] = xc;
        fvals[worst] = fc;
      } else {
        for (int j = 0; j <= n; ++j) {
          if (j == best) continue;
          simplex[j] = simplex[best] + sigma * (simplex[j] - simplex[best]);
          fvals[j] = f(simplex[j]);
          ++out.evaluations;
        }
      }
    }
  }
  int best = 0;
  for (int j = 1; j <= n; ++j)
    if (fvals[j] < fvals[best]) best = j;
  out.x = simplex[best];
  out.fx = fvals[best];
  out.iterations = iter;
  return out;
}

Eigen::VectorXd numerical_gradient(const VectorFn& f, const Eigen::VectorXd& x,
                                   double rel_step) {
  const int n = static_cast<int>(x.size());
  Eigen::VectorXd g(n);
  Eigen::VectorXd xp = x;
  for (int j = 0; j < n; ++j) {
    const double h = rel_step * std::max(1.0, std::abs(x(j)));
    xp(j) = x(j) + h;
    const double fp = f(xp);
    xp(j) = x(j) - h;
    const double fm = f(xp);
    xp(j) = x(j);
    g(j) = (fp - fm) / (2.0 * h);
  }
  return g;
}

OptimResult bfgs_minimize(const VectorFn& f, const Eigen::VectorXd& x0,
                          const BfgsOptions& opts) {
  const int n = static_cast<int>(x0.size());
  OptimResult out;
  Eigen::VectorXd x = x0;
  double fx = f(x);
  out.evaluations = 1;
  Eigen::VectorXd g = numerical_gradient(f, x, opts.fd_step);
  out.evaluations += 2 * n;
  auto scaled_identity = [&](const Eigen::VectorXd& grad) {
    const double scale = 1.0 / (1.0 + grad.cwiseAbs().maxCoeff());
    return Eigen::MatrixXd(scale * Eigen::MatrixXd::Identity(n, n));
  };
  Eigen::MatrixXd Hinv = scaled_identity(g);

  int resets = 0;
  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    if (g.cwiseAbs().maxCoeff() < opts.grad_tol) {
      out.converged = true;
      break;
    }
    Eigen::VectorXd dir = -Hinv * g;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      Hinv = scaled_identity(g);
      dir = -Hinv * g;
      slope = g.dot(dir);
    }
    // backtracking Armijo search
    double step = 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    Eigen::VectorXd x_new;
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      x_new = x + step * dir;
      f_new = f(x_new);
      ++out.evaluations;
      if (std::isfinite(f_new) && f_new <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      out.converged = g.cwiseAbs().maxCoeff() < 10.0 * opts.grad_tol;
      break;
    }
    Eigen::VectorXd g_new = numerical_gradient(f, x_new, opts.fd_step);
    out.evaluations += 2 * n;
    Eigen::VectorXd s = x_new - x;
    Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho_k = 1.0 / sy;
      Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      Hinv = (I - rho_k * s * y.transpose()) * Hinv *
                 (I - rho_k * y * s.transpose()) +
             rho_k * s * s.transpose();
    }
    const double f_gain = fx - f_new;
    const double x_move = s.cwiseAbs().maxCoeff();
    x = x_new;
    fx = f_new;
    g = g_new;
    if (f_gain < opts.f_tol && x_move < opts.x_tol) {
      // stalled: either truly converged or the metric went bad; retry from a
      // rescaled identity a few times before giving up
      if (g.cwiseAbs().maxCoeff() < 10.0 * opts.grad_tol) {
        out.converged = true;
        ++iter;
        break;
      }
      if (resets >= 3) break;
      Hinv = scaled_identity(g);
      ++resets;
    }
  }
  out.x = x;
  out.fx = fx;
  out.iterations = iter;
  return out;
}

Eigen::MatrixXd numerical_hessian(const VectorFn& f, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& steps) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd H(n, n);
  const double f0 = f(x);
  Eigen::VectorXd xt = x;
  for (int i = 0; i < n; ++i) {
    const double hi = steps(i);
    xt(i) = x(i) + hi;
    const double fp = f(xt);
    xt(i) = x(i) - hi;
    const double fm = f(xt);
    xt(i) = x(i);
    H(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double hi = steps(i), hj = steps(j);
      xt(i) = x(i) + hi; xt(j) = x(j) + hj;
      const double fpp = f(xt);
      xt(j) = x(j) - hj;
      const double fpm = f(xt);
      xt(i) = x(i) - hi; xt(j) = x(j) + hj;
      const double fmp = f(xt);
      xt(j) = x(j) - hj;
      const double fmm = f(xt);
      xt(i) = x(i); xt(j) = x(j);
      H(i, j) = H(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
    }
  }
  return H;
}

}  // namespace megh
