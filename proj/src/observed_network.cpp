#include "missbm/observed_network.hpp"

#include "missbm/errors.hpp"

namespace missbm {

ObservationEvent observation_event(const PartialAdjacency& adj) {
  ObservationEvent ev;
  ev.mask = adj.observed_mask();
  const int n = adj.size();
  ev.node_observed = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    const double row = ev.mask.row(i).sum();
    const double col = ev.mask.col(i).sum();
    if (row == n - 1 && col == n - 1) ev.node_observed(i) = 1.0;
  }
  return ev;
}

std::shared_ptr<const ObservedNetwork> ObservedNetwork::make(PartialAdjacency adj, CovariateSet cov) {
  auto net = std::make_shared<ObservedNetwork>();
  const int n = adj.size();
  if (n < 2) throw InputError("network needs at least two nodes");
  net->covariates = cov.empty() ? std::move(cov) : transfer_covariates(cov, n, adj.directed());
  net->event = observation_event(adj);
  net->values = adj.observed_values();
  net->missing = adj.missing_dyads();
  net->adjacency = std::move(adj);
  return net;
}

Eigen::MatrixXd completed_values(const ObservedNetwork& net, const VariationalState& state, InferenceMode mode) {
  Eigen::MatrixXd y = net.values;
  if (mode == InferenceMode::Imputed && !net.missing.empty()) {
    if (state.nu.size() != net.missing.size())
      throw InputError("nu has " + std::to_string(state.nu.size()) + " values for " +
                       std::to_string(net.missing.size()) + " missing dyads");
    for (std::size_t k = 0; k < net.missing.size(); ++k) {
      const auto [i, j] = net.missing[k];
      y(i, j) = state.nu[k];
      if (!net.directed()) y(j, i) = state.nu[k];
    }
  }
  return y;
}

Eigen::MatrixXd dyad_weights(const ObservedNetwork& net, InferenceMode mode) {
  if (mode == InferenceMode::ObservedOnly) return net.event.mask;
  const int n = net.size();
  Eigen::MatrixXd w = Eigen::MatrixXd::Ones(n, n);
  w.diagonal().setZero();
  return w;
}

std::vector<int> memberships(const Eigen::MatrixXd& tau) {
  std::vector<int> z(static_cast<std::size_t>(tau.rows()));
  for (Eigen::Index i = 0; i < tau.rows(); ++i) {
    Eigen::Index best = 0;
    tau.row(i).maxCoeff(&best);
    z[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return z;
}

}  // namespace missbm
