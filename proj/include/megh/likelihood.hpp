#pragma once

#include <Eigen/Core>
#include <vector>

#include "megh/dataset.hpp"
#include "megh/model.hpp"
#include "megh/quadrature.hpp"

namespace megh {

struct EvalOptions {
  QuadratureOptions quad;
  int threads = 1;
};

// Conditional cluster log-likelihood l_i(u) for fixed eta, with per-cluster
// precomputation so repeated evaluations across u are cheap. For the GH and
// MEGH-I structures the dependence on u collapses to A + D u - C e^u, which
// makes each evaluation O(1); MEGH-II moves u inside the baseline and costs
// O(n_i) per evaluation.
class ClusterLik {
public:
  ClusterLik(const ModelSpec& spec, const ParameterVector& eta,
             const ClusteredDataset& data, int cluster_id);
  ClusterLik(const ModelSpec& spec, const ParameterVector& eta,
             const ClusteredDataset& data, int cluster_id,
             const Eigen::VectorXd& lp_hazard, const Eigen::VectorXd& lp_time);

  double operator()(double u_raw) const;
  int events() const { return events_; }
  bool has_closed_form_mode() const {
    return structure_ != HazardStructure::MEGH_II;
  }
  // argmax_u l_i(u) and the maximum value log K_i. For an all-censored
  // cluster under MEGH-I the supremum sits at u -> -inf with value A; the
  // returned location is then NaN and `finite_mode` is false.
  struct Mode {
    double u_hat;
    double log_K;
    bool finite_mode;
  };
  Mode maximize(double sd_hint) const;

private:
  void build(const ModelSpec& spec, const ParameterVector& eta,
             const ClusteredDataset& data, int cluster_id,
             const Eigen::VectorXd& lp_hazard, const Eigen::VectorXd& lp_time);

  HazardStructure structure_;
  BaselineLogEval base_;
  int events_ = 0;
  double event_const_ = 0.0;  // A (GH/MEGH-I) or sum d_j lp_hazard_j (MEGH-II)
  double cum_at_zero_ = 0.0;  // C = sum_j H0(w_j) k_j
  // MEGH-II per-subject terms
  std::vector<double> w_;  // log t_j + lp_time_j
  std::vector<double> k_;  // exp(lp_hazard_j - lp_time_j)
  std::vector<int> d_;
};

// log m_i and intermediates from the scaled adaptive quadrature.
struct ClusterMarginal {
  double log_m = 0.0;
  double m = 0.0;
  double log_K = 0.0;
  double center = 0.0;
  double scale = 1.0;
  int quadrature_intervals = 0;
};

double cond_loglik_cluster(int cluster_id, double u_raw, const ModelSpec& spec,
                           const ParameterVector& eta,
                           const ClusteredDataset& data);

ClusterMarginal marginal_lik_cluster(int cluster_id, const ModelSpec& spec,
                                     const ParameterVector& eta,
                                     const ClusteredDataset& data,
                                     const QuadratureOptions& quad = {});

// Same integral without the K_i rescaling; only usable where exp(l_i) does
// not underflow. Kept as a cross-check path for tests.
double marginal_lik_cluster_unscaled(int cluster_id, const ModelSpec& spec,
                                     const ParameterVector& eta,
                                     const ClusteredDataset& data,
                                     const QuadratureOptions& quad = {});

// sum_i log m_i(eta). Clusters are evaluated independently (optionally on
// opts.threads threads) and summed in cluster order, so the result does not
// depend on the thread count.
double log_marginal(const ModelSpec& spec, const ParameterVector& eta,
                    const ClusteredDataset& data, const EvalOptions& opts = {});

// All per-cluster marginals in one pass (shared design-matrix products).
std::vector<ClusterMarginal> cluster_marginals(const ModelSpec& spec,
                                               const ParameterVector& eta,
                                               const ClusteredDataset& data,
                                               const EvalOptions& opts = {});

}  // namespace megh
