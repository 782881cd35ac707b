#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "megh/dataset.hpp"
#include "megh/estimation.hpp"

namespace megh {

// Gradient function Delta(u) = (1/r) sum_i exp{l_i(u)} / m_i evaluated at the
// fitted parameters, with optional parametric-bootstrap 95% bands.
struct GradientDiagnostic {
  Eigen::VectorXd grid;
  Eigen::VectorXd delta;
  Eigen::VectorXd band_lower;
  Eigen::VectorXd band_upper;
  bool has_bands = false;
  bool exceeds = false;        // Delta above the upper band anywhere
  int n_boot = 0;
  int n_boot_failed = 0;
  bool band_warning = false;   // more than 20% of bootstrap refits failed
};

Eigen::VectorXd default_gradient_grid(const FitResult& fit, int n_points = 101);

// Throws std::logic_error for a GH fit (the diagnostic needs random effects).
GradientDiagnostic gradient_function(const FitResult& fit,
                                     const ClusteredDataset& data,
                                     const Eigen::VectorXd& grid = {},
                                     const QuadratureOptions& quad = {});

struct BandOptions {
  int n_boot = 200;
  std::uint64_t seed = 1;
  int jobs = 1;
  FitConfig refit;  // defaults set inside: single start from the fitted value
};

// Parametric bootstrap: simulate from the fitted model on the observed
// design, refit, recompute Delta on the same grid, take pointwise 2.5/97.5
// percentiles. Failed refits are dropped and counted.
void gradient_bands(GradientDiagnostic& diag, const FitResult& fit,
                    const ClusteredDataset& data, const BandOptions& opts);

// Numerically integrates Delta(u) against the fitted G; equals 1 up to
// quadrature error because each cluster integrates to m_i / m_i.
double gradient_identity(const FitResult& fit, const ClusteredDataset& data,
                         const QuadratureOptions& quad = {});

// chi-squared survival functions needed by the boundary mixtures
double chisq1_survival(double x);
double chisq2_survival(double x);

enum class MixtureCase { Case5_one_variance, Case7_two_variances };

// Boundary-corrected p-value:
//   Case 5: p = 1 at R = 0, else 0.5 P(chi2_1 >= R)
//   Case 7: p = 1 at R = 0, else 0.5 P(chi2_1 >= R) + 0.25 P(chi2_2 >= R)
double boundary_pvalue(MixtureCase mixture, double r_obs);

struct LRTResult {
  double statistic = 0.0;  // floored at zero
  MixtureCase mixture = MixtureCase::Case5_one_variance;
  double p_value = 1.0;
  FitResult full;
  FitResult reduced;
};

// Likelihood-ratio test of zero random-effects variance: fits the mixed model
// and its GH reduction, applies the Case-5 mixture (the fitted subclasses
// share a single scalar effect). Refuses the test when either fit failed to
// converge.
LRTResult lrt_random_effects(const ModelSpec& model_with,
                             const ClusteredDataset& data,
                             const FitConfig& config = {});

}  // namespace megh
