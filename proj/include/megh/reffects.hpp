#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <vector>

namespace megh {

enum class RandomEffectsFamily { Normal, StudentT, TwoPieceNormal };

// Zero-mean continuous distribution G for the cluster random effects.
//   Normal:          xi = (sigma_u)
//   StudentT:        xi = (scale); degrees of freedom fixed by t_dof
//   TwoPieceNormal:  xi = (sigma, gamma), gamma in (-1, 1); the mode is
//                    shifted so the mean is exactly zero.
struct RandomEffectsDist {
  RandomEffectsFamily family;
  Eigen::VectorXd xi;
  double t_dof = 5.0;
};

RandomEffectsDist make_normal_re(double sigma);
RandomEffectsDist make_student_t_re(double scale, double dof = 5.0);
RandomEffectsDist make_two_piece_normal_re(double sigma, double gamma);

int n_re_params(RandomEffectsFamily family);
const char* re_family_name(RandomEffectsFamily family);
void check_reffects(const RandomEffectsDist& d);

double log_density(double u, const RandomEffectsDist& d);
double variance(const RandomEffectsDist& d);
double stddev(const RandomEffectsDist& d);

double sample_one(const RandomEffectsDist& d, std::mt19937_64& rng);
std::vector<double> sample(std::size_t n, const RandomEffectsDist& d,
                           std::uint64_t seed);

}  // namespace megh
