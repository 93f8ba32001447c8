#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "missbm/network.hpp"
#include "missbm/observed_network.hpp"

namespace missbm {

enum class SbmVariant { Plain, Covariate };

/// Binary SBM parameters. The plain variant uses pi (Q x Q connection
/// probabilities); the covariate variant uses gamma (Q x Q logits) and one
/// slope per dyadic covariate in beta.
struct SbmParams {
  int Q = 1;
  bool directed = false;
  SbmVariant variant = SbmVariant::Plain;
  Eigen::VectorXd alpha;
  Eigen::MatrixXd pi;
  Eigen::MatrixXd gamma;
  Eigen::VectorXd beta;

  int covariate_count() const { return variant == SbmVariant::Covariate ? static_cast<int>(beta.size()) : 0; }
  /// Throws InputError when shapes or ranges are inconsistent.
  void validate() const;
};

/// Draws memberships from alpha and a fully observed network given them.
/// The covariate variant needs covariates with one dyadic matrix per slope
/// (nodal covariates are transferred first).
std::pair<PartialAdjacency, Partition> sample_network(const SbmParams& params, int n, const CovariateSet* covariates,
                                                      std::uint64_t seed);

/// beta^T X_ij for every cell (zero matrix for the plain variant). `cov` must
/// already be dyadic.
Eigen::MatrixXd covariate_effect(const SbmParams& params, const CovariateSet& cov, int n);

/// E[log p(Z)] + E[log p(Y | Z)] over the dyads selected by `mode`.
double expected_loglik_sbm(const SbmParams& params, const ObservedNetwork& net, const VariationalState& state,
                           InferenceMode mode);

/// sum_{q,l} tau_iq tau_jl p_ql(X_ij); the diagonal is set to NaN.
Eigen::MatrixXd predict_probabilities(const SbmParams& params, const Eigen::MatrixXd& tau, const CovariateSet& cov);

/// Per missing dyad, sum_{q,l} tau_iq tau_jl logit p_ql(X_ij).
std::vector<double> missing_dyad_logits(const SbmParams& params, const ObservedNetwork& net,
                                        const Eigen::MatrixXd& tau);

/// M-step for (alpha, pi) or (alpha, gamma, beta) given the variational state.
SbmParams update_sbm(const SbmParams& previous, const ObservedNetwork& net, const VariationalState& state,
                     InferenceMode mode, UpdateFlags* flags = nullptr);

/// Largest absolute change in the connection parameters (pi, or gamma and beta).
double parameter_delta(const SbmParams& a, const SbmParams& b);

}  // namespace missbm
