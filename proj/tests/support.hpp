#pragma once

// Shared fixtures for the unit tests and the acceptance runner.

#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "missbm/collection.hpp"
#include "missbm/evaluation.hpp"
#include "missbm/rng.hpp"
#include "missbm/sampling.hpp"
#include "missbm/sbm.hpp"
#include "missbm/spectral.hpp"
#include "missbm/vem.hpp"

namespace testsupport {

using namespace missbm;

inline SbmParams planted(int Q, double pin, double pout, bool directed = false) {
  SbmParams p;
  p.Q = Q;
  p.directed = directed;
  p.alpha = Eigen::VectorXd::Constant(Q, 1.0 / Q);
  p.pi = Eigen::MatrixXd::Constant(Q, Q, pout);
  p.pi.diagonal().setConstant(pin);
  return p;
}

inline PartialAdjacency from_rows(const std::vector<std::vector<double>>& rows, bool directed = false) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return PartialAdjacency::from_dense(m, directed);
}

inline FitResult spectral_fit(std::shared_ptr<const ObservedNetwork> net, int Q, SamplingTag tag,
                              const ControlOptions& control, std::uint64_t seed) {
  return fit_single(net, Q, tag, spectral_init(net->adjacency, Q, seed), control);
}

/// Smallest increment of a bound trace.
inline double worst_step(const std::vector<double>& trace) {
  double worst = INFINITY;
  for (std::size_t k = 1; k < trace.size(); ++k) worst = std::min(worst, trace[k] - trace[k - 1]);
  return worst;
}

/// log sum exp of a list of log terms.
inline double log_sum(const std::vector<double>& terms) {
  double top = -INFINITY;
  for (double t : terms) top = std::max(top, t);
  if (!std::isfinite(top)) return top;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - top);
  return top + std::log(s);
}

/// Exact log p(Y^o, R) of an undirected network under an SBM with
/// double-standard sampling, summing over every membership vector and every
/// completion of the missing dyads.
inline double exact_double_standard_loglik(const PartialAdjacency& adj, const Eigen::VectorXd& alpha,
                                           const Eigen::MatrixXd& pi, double rho1, double rho0) {
  const int n = adj.size();
  const int Q = static_cast<int>(alpha.size());
  const auto missing = adj.missing_dyads();
  const std::size_t m = missing.size();
  std::vector<double> terms;
  std::vector<int> z(static_cast<std::size_t>(n), 0);
  long configurations = 1;
  for (int i = 0; i < n; ++i) configurations *= Q;
  for (long code = 0; code < configurations; ++code) {
    long c = code;
    for (int i = 0; i < n; ++i) {
      z[static_cast<std::size_t>(i)] = static_cast<int>(c % Q);
      c /= Q;
    }
    double base = 0.0;
    for (int i = 0; i < n; ++i) base += std::log(alpha(z[static_cast<std::size_t>(i)]));
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const DyadValue v = adj.at(i, j);
        if (v == DyadValue::Missing) continue;
        const double p = pi(z[static_cast<std::size_t>(i)], z[static_cast<std::size_t>(j)]);
        base += v == DyadValue::Present ? std::log(p) + std::log(rho1) : std::log1p(-p) + std::log(rho0);
      }
    for (std::uint64_t fill = 0; fill < (std::uint64_t{1} << m); ++fill) {
      double t = base;
      for (std::size_t k = 0; k < m; ++k) {
        const double p = pi(z[static_cast<std::size_t>(missing[k].i)], z[static_cast<std::size_t>(missing[k].j)]);
        if ((fill >> k) & 1U) t += std::log(p) + std::log1p(-rho1);
        else t += std::log1p(-p) + std::log1p(-rho0);
      }
      terms.push_back(t);
    }
  }
  return log_sum(terms);
}

}  // namespace testsupport
