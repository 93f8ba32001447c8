#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "missbm/network.hpp"
#include "missbm/observed_network.hpp"
#include "missbm/sampling.hpp"
#include "missbm/sbm.hpp"

namespace missbm {

enum class Exploration { None, Forward, Backward, Both };

struct ControlOptions {
  double threshold = 1e-2;
  int max_iter = 50;
  int fixpoint_iter = 3;
  Exploration exploration = Exploration::Both;
  int iterates = 1;
  bool use_cov = false;
  bool trace = false;
  std::uint64_t seed = 0;
  int threads = 1;
  /// When false the sampling factor is dropped from the objective (and from
  /// the tau updates), leaving the SBM fit on the observed part only.
  bool sampling_in_objective = true;
  /// Pairs tried per block count in the backward pass; negative means Q + 1.
  int merge_budget = -1;

  void validate() const;
};

/// One row per completed VE+M cycle; iteration 0 is the state after the
/// initial M-step and carries no parameter delta (NaN).
struct MonitoringRow {
  int iter = 0;
  double elbo = 0.0;
  double delta = 0.0;
};

/// Terms of the variational bound.
struct Objective {
  double sbm = 0.0;       ///< E[log p(Z)] + E[log p(Y | Z)]
  double sampling = 0.0;  ///< E[log p(R | Y, Z)]
  double entropy = 0.0;   ///< H(tau) + H(nu)
  double expectation() const { return sbm + sampling; }
  double elbo() const { return sbm + sampling + entropy; }
};

struct FitResult {
  int Q = 1;
  std::shared_ptr<const ObservedNetwork> network;
  SbmParams sbm;
  SamplingDesign design;
  VariationalState state;
  std::vector<MonitoringRow> monitoring;
  std::vector<double> elbo_trace;
  /// Expected complete log-likelihood over every dyad; M(C)AR fits count the
  /// missing dyads at their predicted probabilities.
  double vexpec = 0.0;
  double penalty = 0.0;
  double icl = 0.0;
  bool converged = false;
  int kept_components = 0;

  SamplingTag tag() const { return tag_of(design); }
  std::vector<int> memberships() const { return missbm::memberships(state.tau); }
};

/// Runs `fixpoint_iter` rounds of sequential per-node tau updates followed, for
/// MNAR designs, by a nu update. Throws NumericalError on non-finite values.
void ve_step(const ObservedNetwork& net, const SamplingDesign& design, const SbmParams& params,
             VariationalState& state, int fixpoint_iter, bool sampling_in_objective = true);

/// M-step for the SBM and the sampling parameters.
std::pair<SbmParams, SamplingDesign> m_step(const ObservedNetwork& net, const SamplingDesign& design,
                                            const SbmParams& params, const VariationalState& state,
                                            UpdateFlags* flags = nullptr);

Objective objective(const ObservedNetwork& net, const SamplingDesign& design, const SbmParams& params,
                    const VariationalState& state, bool sampling_in_objective = true);
double elbo(const ObservedNetwork& net, const SamplingDesign& design, const SbmParams& params,
            const VariationalState& state);

/// Hard labels to tau: 1 - (Q-1) eps on the assigned block, eps elsewhere.
Eigen::MatrixXd soften(const Partition& init, double eps = 1e-3);

FitResult fit_single(std::shared_ptr<const ObservedNetwork> net, int Q, SamplingTag tag, const Partition& init,
                     const ControlOptions& control);

/// ICL penalty. `m` is the number of covariates entering the SBM.
double icl_penalty(int n, int Q, int K, Centering centering, bool directed, int m = 0);

/// Dense matrix equal to the input on observed dyads, nu (MNAR) or the
/// predicted probability (MAR) on missing dyads, NaN on the diagonal.
Eigen::MatrixXd impute(const FitResult& fit);

}  // namespace missbm
