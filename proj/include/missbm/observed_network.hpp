#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "missbm/network.hpp"

namespace missbm {

/// Observation indicators. `node_observed` (V) is only meaningful for
/// node-centered samplings; `mask` is R with a zero diagonal.
struct ObservationEvent {
  Eigen::VectorXd node_observed;
  Eigen::MatrixXd mask;
};

/// Recovers (V, R) from a partially observed adjacency. A node counts as
/// observed when every dyad involving it is observed.
ObservationEvent observation_event(const PartialAdjacency& adj);

/// Which dyads enter the SBM part of the objective.
enum class InferenceMode {
  ObservedOnly,  ///< M(C)AR: sums over observed dyads, no nu.
  Imputed,       ///< MNAR: sums over all dyads, missing ones through nu.
};

/// Variational parameters: tau (n x Q, row-stochastic) and nu, one value per
/// missing dyad in canonical order. nu is empty unless populated.
struct VariationalState {
  Eigen::MatrixXd tau;
  std::vector<double> nu;
};

/// Immutable inference input: the adjacency, transferred covariates and dense
/// working views derived from them. Shared read-only between fits.
struct ObservedNetwork {
  PartialAdjacency adjacency;
  CovariateSet covariates;
  ObservationEvent event;
  Eigen::MatrixXd values;       ///< Y on observed dyads, 0 elsewhere
  std::vector<Dyad> missing;    ///< canonical order, aligned with nu

  int size() const { return adjacency.size(); }
  bool directed() const { return adjacency.directed(); }
  double dyad_count() const { return static_cast<double>(adjacency.dyad_count()); }

  /// Transfers covariates to the dyad level and builds the working views.
  static std::shared_ptr<const ObservedNetwork> make(PartialAdjacency adj, CovariateSet cov = {});
};

/// Raised (not thrown) when a closed-form update had an empty denominator and
/// kept the previous value.
struct UpdateFlags {
  int kept_components = 0;
};

/// Dense matrix of y-tilde: observed Y, plus nu on missing dyads in Imputed mode.
Eigen::MatrixXd completed_values(const ObservedNetwork& net, const VariationalState& state, InferenceMode mode);

/// Dyad weights of the SBM term: R in ObservedOnly mode, every off-diagonal
/// cell in Imputed mode.
Eigen::MatrixXd dyad_weights(const ObservedNetwork& net, InferenceMode mode);

/// Hard labels from tau (first maximum wins).
std::vector<int> memberships(const Eigen::MatrixXd& tau);

}  // namespace missbm
