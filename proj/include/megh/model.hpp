#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "megh/baseline.hpp"
#include "megh/hazard.hpp"
#include "megh/reffects.hpp"

namespace megh {

struct ModelSpec {
  HazardStructure structure = HazardStructure::MEGH_I;
  BaselineFamily baseline = BaselineFamily::PGW;
  RandomEffectsFamily re_family = RandomEffectsFamily::Normal;
  double t_dof = 5.0;  // fixed Student-t degrees of freedom, never estimated

  bool has_random_effects() const { return structure != HazardStructure::GH; }
};

// eta = (beta, alpha, theta, xi) on the natural (constrained) scale.
struct ParameterVector {
  Eigen::VectorXd beta;
  Eigen::VectorXd alpha;
  Eigen::VectorXd theta;
  Eigen::VectorXd xi;  // empty for GH
};

BaselineHazard baseline_of(const ModelSpec& spec, const ParameterVector& eta);
RandomEffectsDist reffects_of(const ModelSpec& spec, const ParameterVector& eta);
RegressionCoefficients coefficients_of(const ParameterVector& eta);

// Bijective packing between the constrained parameter vector and an
// unconstrained optimization vector: log for positive scale/shape parameters,
// atanh for the two-piece skewness, identity otherwise.
class ParameterLayout {
public:
  ParameterLayout(ModelSpec spec, int p, int p_tilde);

  int dim() const { return dim_; }
  const ModelSpec& spec() const { return spec_; }
  int p() const { return p_; }
  int p_tilde() const { return p_tilde_; }

  Eigen::VectorXd pack(const ParameterVector& eta) const;
  ParameterVector unpack(const Eigen::VectorXd& z) const;
  // d(constrained)/d(unconstrained), evaluated at z; diagonal of the
  // transform Jacobian used by the delta method.
  Eigen::VectorXd jacobian_diag(const Eigen::VectorXd& z) const;
  std::vector<std::string> names() const;

private:
  ModelSpec spec_;
  int p_, p_tilde_, dim_;
};

// Name lookups used by the CLI, config files and python bindings.
HazardStructure structure_from_name(const std::string& name);
BaselineFamily baseline_from_name(const std::string& name);
RandomEffectsFamily re_family_from_name(const std::string& name);

// Validates a model specification against dataset dimensions and rejects the
// Weibull-degenerate PGW (delta == 1) when the baseline parameters are fixed
// by the caller (simulation truths, user-supplied inits).
void validate_model(const ModelSpec& spec, int p, int p_tilde);
void validate_theta(const ModelSpec& spec, const Eigen::VectorXd& theta);
// exclude_weibull: estimation-time validation rejects the degenerate PGW;
// simulation truths only need well-defined parameters (the exclusion is an
// identifiability constraint, not a constraint on the data law).
void validate_parameters(const ModelSpec& spec, const ParameterVector& eta,
                         int p, int p_tilde, bool exclude_weibull = true);

}  // namespace megh
