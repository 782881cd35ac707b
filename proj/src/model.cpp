#include "megh/model.hpp"

#include <cmath>

#include "megh/errors.hpp"
#include "megh/mathutil.hpp"

namespace megh {

BaselineHazard baseline_of(const ModelSpec& spec, const ParameterVector& eta) {
  return BaselineHazard{spec.baseline, eta.theta};
}

RandomEffectsDist reffects_of(const ModelSpec& spec, const ParameterVector& eta) {
  if (!spec.has_random_effects())
    throw std::invalid_argument("reffects_of: GH model carries no random effects");
  return RandomEffectsDist{spec.re_family, eta.xi, spec.t_dof};
}

RegressionCoefficients coefficients_of(const ParameterVector& eta) {
  return RegressionCoefficients{eta.beta, eta.alpha};
}

ParameterLayout::ParameterLayout(ModelSpec spec, int p, int p_tilde)
    : spec_(spec), p_(p), p_tilde_(p_tilde) {
  const int n_theta = n_baseline_params(spec_.baseline);
  const int n_xi = spec_.has_random_effects() ? n_re_params(spec_.re_family) : 0;
  dim_ = p_ + p_tilde_ + n_theta + n_xi;
}

Eigen::VectorXd ParameterLayout::pack(const ParameterVector& eta) const {
  Eigen::VectorXd z(dim_);
  int k = 0;
  for (int j = 0; j < p_; ++j) z(k++) = eta.beta(j);
  for (int j = 0; j < p_tilde_; ++j) z(k++) = eta.alpha(j);
  if (spec_.baseline == BaselineFamily::PGW) {
    z(k++) = std::log(eta.theta(0));
    z(k++) = std::log(eta.theta(1));
    z(k++) = std::log(eta.theta(2));
  } else {
    z(k++) = eta.theta(0);
    z(k++) = std::log(eta.theta(1));
  }
  if (spec_.has_random_effects()) {
    z(k++) = std::log(eta.xi(0));
    if (spec_.re_family == RandomEffectsFamily::TwoPieceNormal)
      z(k++) = std::atanh(eta.xi(1));
  }
  return z;
}

ParameterVector ParameterLayout::unpack(const Eigen::VectorXd& z) const {
  if (z.size() != dim_)
    throw std::invalid_argument("ParameterLayout: packed vector has wrong length");
  ParameterVector eta;
  int k = 0;
  eta.beta = z.segment(k, p_); k += p_;
  eta.alpha = z.segment(k, p_tilde_); k += p_tilde_;
  if (spec_.baseline == BaselineFamily::PGW) {
    eta.theta.resize(3);
    eta.theta << std::exp(z(k)), std::exp(z(k + 1)), std::exp(z(k + 2));
    k += 3;
  } else {
    eta.theta.resize(2);
    eta.theta << z(k), std::exp(z(k + 1));
    k += 2;
  }
  if (spec_.has_random_effects()) {
    const int nxi = n_re_params(spec_.re_family);
    eta.xi.resize(nxi);
    eta.xi(0) = std::exp(z(k++));
    if (spec_.re_family == RandomEffectsFamily::TwoPieceNormal)
      eta.xi(1) = std::tanh(z(k++));
  } else {
    eta.xi.resize(0);
  }
  return eta;
}

Eigen::VectorXd ParameterLayout::jacobian_diag(const Eigen::VectorXd& z) const {
  Eigen::VectorXd j = Eigen::VectorXd::Ones(dim_);
  int k = p_ + p_tilde_;
  if (spec_.baseline == BaselineFamily::PGW) {
    j(k) = std::exp(z(k));
    j(k + 1) = std::exp(z(k + 1));
    j(k + 2) = std::exp(z(k + 2));
    k += 3;
  } else {
    j(k + 1) = std::exp(z(k + 1));
    k += 2;
  }
  if (spec_.has_random_effects()) {
    j(k) = std::exp(z(k));
    ++k;
    if (spec_.re_family == RandomEffectsFamily::TwoPieceNormal)
      j(k) = 1.0 - sq(std::tanh(z(k)));
  }
  return j;
}

std::vector<std::string> ParameterLayout::names() const {
  std::vector<std::string> out;
  for (int j = 0; j < p_; ++j) out.push_back("beta" + std::to_string(j + 1));
  for (int j = 0; j < p_tilde_; ++j) out.push_back("alpha" + std::to_string(j + 1));
  if (spec_.baseline == BaselineFamily::PGW) {
    out.insert(out.end(), {"eta", "nu", "delta"});
  } else {
    out.insert(out.end(), {"mu", "tau"});
  }
  if (spec_.has_random_effects()) {
    switch (spec_.re_family) {
      case RandomEffectsFamily::Normal: out.push_back("sigma_u"); break;
      case RandomEffectsFamily::StudentT: out.push_back("s_u"); break;
      case RandomEffectsFamily::TwoPieceNormal:
        out.push_back("sigma_u");
        out.push_back("gamma_u");
        break;
    }
  }
  return out;
}

HazardStructure structure_from_name(const std::string& name) {
  if (name == "gh") return HazardStructure::GH;
  if (name == "megh1") return HazardStructure::MEGH_I;
  if (name == "megh2") return HazardStructure::MEGH_II;
  throw ValidationError("unknown model structure '" + name + "'");
}

BaselineFamily baseline_from_name(const std::string& name) {
  if (name == "pgw") return BaselineFamily::PGW;
  if (name == "loglogistic") return BaselineFamily::LogLogistic;
  throw ValidationError("unknown baseline family '" + name + "'");
}

RandomEffectsFamily re_family_from_name(const std::string& name) {
  if (name == "normal") return RandomEffectsFamily::Normal;
  if (name == "t") return RandomEffectsFamily::StudentT;
  if (name == "tpn") return RandomEffectsFamily::TwoPieceNormal;
  throw ValidationError("unknown random-effects family '" + name + "'");
}

void validate_model(const ModelSpec& spec, int p, int p_tilde) {
  if (p < 0 || p_tilde < 0 || p_tilde > p)
    throw ValidationError("model: time-scale covariates must be a subset of the hazard-scale ones");
  if (spec.re_family == RandomEffectsFamily::StudentT && !(spec.t_dof > 2.0))
    throw ValidationError("model: Student-t dof must exceed 2");
}

void validate_theta(const ModelSpec& spec, const Eigen::VectorXd& theta) {
  check_baseline(BaselineHazard{spec.baseline, theta});
  if (spec.baseline == BaselineFamily::PGW && theta(2) == 1.0)
    throw ValidationError(
        "model: PGW with delta = 1 is the Weibull hazard, which makes the "
        "general hazard structure non-identifiable; use delta != 1");
}

void validate_parameters(const ModelSpec& spec, const ParameterVector& eta,
                         int p, int p_tilde, bool exclude_weibull) {
  validate_model(spec, p, p_tilde);
  if (eta.beta.size() != p || eta.alpha.size() != p_tilde)
    throw ValidationError("model: coefficient dimensions do not match the design");
  if (exclude_weibull)
    validate_theta(spec, eta.theta);
  else
    check_baseline(BaselineHazard{spec.baseline, eta.theta});
  if (spec.has_random_effects())
    check_reffects(RandomEffectsDist{spec.re_family, eta.xi, spec.t_dof});
  else if (eta.xi.size() != 0)
    throw ValidationError("model: GH structure admits no random-effects parameters");
}

}  // namespace megh
