#pragma once

#include <Eigen/Core>

#include "megh/baseline.hpp"

namespace megh {

// GH has no random effects; MEGH_I places the cluster effect on the hazard
// scale only; MEGH_II places the same effect on both scales.
enum class HazardStructure { GH, MEGH_I, MEGH_II };

const char* structure_name(HazardStructure s);

struct RandomEffectPair {
  double u = 0.0;
  double u_tilde = 0.0;
};

// Maps the scalar cluster effect onto (u, u_tilde) for each structure:
// GH -> (0, 0), MEGH_I -> (u, 0), MEGH_II -> (u, u).
RandomEffectPair structure_effects(HazardStructure s, double u_raw);

struct RegressionCoefficients {
  Eigen::VectorXd beta;   // hazard-scale effects, length p
  Eigen::VectorXd alpha;  // time-scale effects, length p_tilde
};

// log h(t | x, x~, u, u~) = log h0(t e^{x~'a + u~}) + x'b + u
double cond_log_hazard(double t, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& x_tilde, double u, double u_tilde,
                       const RegressionCoefficients& coef,
                       const BaselineHazard& b);

// H(t | x, x~, u, u~) = H0(t e^{x~'a + u~}) e^{x'b - x~'a + u - u~}
double cond_cum_hazard(double t, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& x_tilde, double u, double u_tilde,
                       const RegressionCoefficients& coef,
                       const BaselineHazard& b);

}  // namespace megh
