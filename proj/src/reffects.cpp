#include "megh/reffects.hpp"

#include <cmath>
#include <stdexcept>

#include "megh/mathutil.hpp"

namespace megh {

namespace {

constexpr double kSqrt2OverPi = 0.7978845608028654;

// Two-piece normal with scales sigma*(1-gamma) left of the mode and
// sigma*(1+gamma) right of it, mode placed at -sqrt(2/pi)*2*sigma*gamma so
// the mean is zero. Positive gamma gives a heavier right tail.
struct TwoPiece {
  double s_left, s_right, mode;
  explicit TwoPiece(const RandomEffectsDist& d) {
    const double sigma = d.xi(0), gamma = d.xi(1);
    s_left = sigma * (1.0 - gamma);
    s_right = sigma * (1.0 + gamma);
    mode = -kSqrt2OverPi * (s_right - s_left);
  }
};

}  // namespace

RandomEffectsDist make_normal_re(double sigma) {
  RandomEffectsDist d{RandomEffectsFamily::Normal, Eigen::VectorXd(1)};
  d.xi << sigma;
  check_reffects(d);
  return d;
}

RandomEffectsDist make_student_t_re(double scale, double dof) {
  RandomEffectsDist d{RandomEffectsFamily::StudentT, Eigen::VectorXd(1), dof};
  d.xi << scale;
  check_reffects(d);
  return d;
}

RandomEffectsDist make_two_piece_normal_re(double sigma, double gamma) {
  RandomEffectsDist d{RandomEffectsFamily::TwoPieceNormal, Eigen::VectorXd(2)};
  d.xi << sigma, gamma;
  check_reffects(d);
  return d;
}

int n_re_params(RandomEffectsFamily family) {
  return family == RandomEffectsFamily::TwoPieceNormal ? 2 : 1;
}

const char* re_family_name(RandomEffectsFamily family) {
  switch (family) {
    case RandomEffectsFamily::Normal: return "normal";
    case RandomEffectsFamily::StudentT: return "t";
    default: return "tpn";
  }
}

void check_reffects(const RandomEffectsDist& d) {
  if (d.xi.size() != n_re_params(d.family))
    throw std::domain_error("random effects: wrong number of parameters");
  if (!(d.xi(0) > 0.0))
    throw std::domain_error("random effects: scale must be positive");
  if (d.family == RandomEffectsFamily::StudentT && !(d.t_dof > 2.0))
    throw std::domain_error("random effects: t dof must exceed 2 for a finite variance");
  if (d.family == RandomEffectsFamily::TwoPieceNormal &&
      !(std::abs(d.xi(1)) < 1.0))
    throw std::domain_error("random effects: skewness must lie in (-1, 1)");
}

double log_density(double u, const RandomEffectsDist& d) {
  switch (d.family) {
    case RandomEffectsFamily::Normal: {
      const double s = d.xi(0);
      return -0.5 * kLog2Pi - std::log(s) - 0.5 * sq(u / s);
    }
    case RandomEffectsFamily::StudentT: {
      const double s = d.xi(0), k = d.t_dof;
      return std::lgamma(0.5 * (k + 1.0)) - std::lgamma(0.5 * k) -
             0.5 * std::log(k * M_PI) - std::log(s) -
             0.5 * (k + 1.0) * std::log1p(sq(u / s) / k);
    }
    default: {
      const TwoPiece tp(d);
      const double s = (u < tp.mode) ? tp.s_left : tp.s_right;
      return std::log(2.0 / (tp.s_left + tp.s_right)) - 0.5 * kLog2Pi -
             0.5 * sq((u - tp.mode) / s);
    }
  }
}

double variance(const RandomEffectsDist& d) {
  switch (d.family) {
    case RandomEffectsFamily::Normal:
      return sq(d.xi(0));
    case RandomEffectsFamily::StudentT:
      return sq(d.xi(0)) * d.t_dof / (d.t_dof - 2.0);
    default: {
      const TwoPiece tp(d);
      const double diff = tp.s_right - tp.s_left;
      return (1.0 - 2.0 / M_PI) * sq(diff) + tp.s_left * tp.s_right;
    }
  }
}

double stddev(const RandomEffectsDist& d) { return std::sqrt(variance(d)); }

double sample_one(const RandomEffectsDist& d, std::mt19937_64& rng) {
  switch (d.family) {
    case RandomEffectsFamily::Normal: {
      std::normal_distribution<double> z;
      return d.xi(0) * z(rng);
    }
    case RandomEffectsFamily::StudentT: {
      std::student_t_distribution<double> t(d.t_dof);
      return d.xi(0) * t(rng);
    }
    default: {
      const TwoPiece tp(d);
      std::uniform_real_distribution<double> unif;
      std::normal_distribution<double> z;
      const double p_left = tp.s_left / (tp.s_left + tp.s_right);
      const double half = std::abs(z(rng));
      return (unif(rng) < p_left) ? tp.mode - tp.s_left * half
                                  : tp.mode + tp.s_right * half;
    }
  }
}

std::vector<double> sample(std::size_t n, const RandomEffectsDist& d,
                           std::uint64_t seed) {
  check_reffects(d);
  std::mt19937_64 rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = sample_one(d, rng);
  return out;
}

}  // namespace megh
