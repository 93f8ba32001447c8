#include "missbm/sbm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "missbm/errors.hpp"
#include "missbm/rng.hpp"

namespace missbm {

namespace {

bool is_symmetric(const Eigen::MatrixXd& m) { return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12; }

// Free connectivity parameters: the upper triangle (diagonal included) for
// undirected models, every cell for directed ones.
struct BlockPairIndex {
  int Q;
  bool directed;
  int count() const { return directed ? Q * Q : Q * (Q + 1) / 2; }
  int operator()(int q, int l) const {
    if (directed) return q * Q + l;
    if (q > l) std::swap(q, l);
    return q * Q - q * (q - 1) / 2 + (l - q);
  }
};

struct ActiveDyad {
  int i;
  int j;
  double y;
};

std::vector<ActiveDyad> active_dyads(const ObservedNetwork& net, const Eigen::MatrixXd& y,
                                     const Eigen::MatrixXd& w) {
  std::vector<ActiveDyad> out;
  const int n = net.size();
  for (int i = 0; i < n; ++i)
    for (int j = net.directed() ? 0 : i + 1; j < n; ++j)
      if (i != j && w(i, j) > 0.0) out.push_back({i, j, y(i, j)});
  return out;
}

double covariate_objective(const std::vector<ActiveDyad>& dyads, const Eigen::MatrixXd& tau,
                           const Eigen::MatrixXd& gamma, const Eigen::MatrixXd& effect) {
  const Eigen::Index Q = tau.cols();
  double total = 0.0;
  for (const auto& d : dyads) {
    const double e = effect(d.i, d.j);
    for (Eigen::Index q = 0; q < Q; ++q) {
      const double tq = tau(d.i, q);
      if (tq == 0.0) continue;
      double inner = 0.0;
      for (Eigen::Index l = 0; l < Q; ++l) {
        const double eta = gamma(q, l) + e;
        inner += tau(d.j, l) * (d.y * eta - softplus(eta));
      }
      total += tq * inner;
    }
  }
  return total;
}

Eigen::MatrixXd effect_from(const Eigen::VectorXd& beta, const CovariateSet& cov, int n) {
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k < beta.size(); ++k) e += beta(k) * cov.dyadic[static_cast<std::size_t>(k)];
  return e;
}

// Damped Newton ascent of the tau-weighted logistic objective in (gamma, beta).
void covariate_m_step(SbmParams& params, const ObservedNetwork& net, const Eigen::MatrixXd& tau,
                      const std::vector<ActiveDyad>& dyads) {
  const int Q = params.Q;
  const int m = params.covariate_count();
  const BlockPairIndex idx{Q, params.directed};
  const int P = idx.count();
  const int n = net.size();
  const auto& X = net.covariates.dyadic;

  auto unpack = [&](const Eigen::VectorXd& theta, Eigen::MatrixXd& gamma, Eigen::VectorXd& beta) {
    gamma.resize(Q, Q);
    for (int q = 0; q < Q; ++q)
      for (int l = 0; l < Q; ++l) gamma(q, l) = theta(idx(q, l));
    beta = theta.tail(m);
  };
  Eigen::VectorXd theta(P + m);
  for (int q = 0; q < Q; ++q)
    for (int l = 0; l < Q; ++l) theta(idx(q, l)) = params.gamma(q, l);
  theta.tail(m) = params.beta;

  Eigen::MatrixXd gamma;
  Eigen::VectorXd beta;
  unpack(theta, gamma, beta);
  Eigen::MatrixXd effect = effect_from(beta, net.covariates, n);
  double current = covariate_objective(dyads, tau, gamma, effect);
  Eigen::VectorXd x(m);

  for (int iter = 0; iter < 25; ++iter) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(P + m);
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(P + m, P + m);
    for (const auto& d : dyads) {
      for (int k = 0; k < m; ++k) x(k) = X[static_cast<std::size_t>(k)](d.i, d.j);
      const double e = effect(d.i, d.j);
      for (int q = 0; q < Q; ++q) {
        const double tq = tau(d.i, q);
        if (tq == 0.0) continue;
        for (int l = 0; l < Q; ++l) {
          const double w = tq * tau(d.j, l);
          if (w == 0.0) continue;
          const double p = logistic(gamma(q, l) + e);
          const double r = w * (d.y - p);
          const double h = w * p * (1.0 - p);
          const int a = idx(q, l);
          grad(a) += r;
          info(a, a) += h;
          for (int k = 0; k < m; ++k) {
            grad(P + k) += r * x(k);
            info(a, P + k) += h * x(k);
            for (int k2 = 0; k2 <= k; ++k2) info(P + k, P + k2) += h * x(k) * x(k2);
          }
        }
      }
    }
    for (int a = 0; a < P; ++a)
      for (int k = 0; k < m; ++k) info(P + k, a) = info(a, P + k);
    for (int k = 0; k < m; ++k)
      for (int k2 = 0; k2 < k; ++k2) info(k2 + P, k + P) = info(P + k, P + k2);
    if (grad.cwiseAbs().maxCoeff() < 1e-9) break;
    info.diagonal().array() += 1e-10;
    Eigen::VectorXd step = info.ldlt().solve(grad);
    if (!step.allFinite()) step = grad;

    double t = 1.0;
    bool moved = false;
    for (int half = 0; half < 40; ++half, t *= 0.5) {
      const Eigen::VectorXd trial = theta + t * step;
      Eigen::MatrixXd g2;
      Eigen::VectorXd b2;
      unpack(trial, g2, b2);
      Eigen::MatrixXd e2 = effect_from(b2, net.covariates, n);
      const double value = covariate_objective(dyads, tau, g2, e2);
      if (std::isfinite(value) && value >= current) {
        theta = trial;
        gamma = std::move(g2);
        beta = std::move(b2);
        effect = std::move(e2);
        moved = value > current;
        current = value;
        break;
      }
    }
    if (!moved || (t * step).cwiseAbs().maxCoeff() < 1e-8) break;
  }
  params.gamma = gamma;
  params.beta = beta;
}

}  // namespace

void SbmParams::validate() const {
  if (Q < 1) throw InputError("SBM needs at least one block");
  if (alpha.size() != Q) throw InputError("alpha must have Q = " + std::to_string(Q) + " entries");
  if ((alpha.array() < 0.0).any() || std::abs(alpha.sum() - 1.0) > 1e-10)
    throw InputError("alpha must be a probability vector");
  if (variant == SbmVariant::Plain) {
    if (pi.rows() != Q || pi.cols() != Q) throw InputError("pi must be Q x Q");
    if ((pi.array() < 0.0).any() || (pi.array() > 1.0).any()) throw InputError("pi entries must lie in [0, 1]");
    if (!directed && !is_symmetric(pi)) throw InputError("pi of an undirected SBM must be symmetric");
  } else {
    if (gamma.rows() != Q || gamma.cols() != Q) throw InputError("gamma must be Q x Q");
    if (!gamma.allFinite() || !beta.allFinite()) throw InputError("gamma and beta must be finite");
    if (!directed && !is_symmetric(gamma)) throw InputError("gamma of an undirected SBM must be symmetric");
  }
}

std::pair<PartialAdjacency, Partition> sample_network(const SbmParams& params, int n, const CovariateSet* covariates,
                                                      std::uint64_t seed) {
  params.validate();
  if (n < 1) throw InputError("network needs at least one node");
  CovariateSet cov;
  if (params.variant == SbmVariant::Covariate) {
    if (!covariates || covariates->empty()) throw InputError("covariate SBM requires covariates");
    cov = transfer_covariates(*covariates, n, params.directed);
    if (cov.dyadic_count() != params.covariate_count())
      throw InputError("beta has " + std::to_string(params.covariate_count()) + " entries for " +
                       std::to_string(cov.dyadic_count()) + " covariates");
  }
  Rng rng(seed);
  std::vector<int> z(static_cast<std::size_t>(n));
  const std::span<const double> weights(params.alpha.data(), static_cast<std::size_t>(params.Q));
  for (auto& label : z) label = static_cast<int>(rng.categorical(weights));

  PartialAdjacency adj(n, params.directed);
  for (const auto [i, j] : adj.dyads()) {
    const int q = z[static_cast<std::size_t>(i)];
    const int l = z[static_cast<std::size_t>(j)];
    double p;
    if (params.variant == SbmVariant::Plain) {
      p = params.pi(q, l);
    } else {
      double eta = params.gamma(q, l);
      for (int k = 0; k < params.covariate_count(); ++k) eta += params.beta(k) * cov.dyadic[static_cast<std::size_t>(k)](i, j);
      p = logistic(eta);
    }
    if (rng.bernoulli(p)) adj.set(i, j, DyadValue::Present);
  }
  return {std::move(adj), Partition(std::move(z), params.Q)};
}

Eigen::MatrixXd covariate_effect(const SbmParams& params, const CovariateSet& cov, int n) {
  if (params.variant == SbmVariant::Plain) return Eigen::MatrixXd::Zero(n, n);
  if (cov.dyadic_count() != params.covariate_count())
    throw InputError("beta has " + std::to_string(params.covariate_count()) + " entries for " +
                     std::to_string(cov.dyadic_count()) + " covariates");
  return effect_from(params.beta, cov, n);
}

double expected_loglik_sbm(const SbmParams& params, const ObservedNetwork& net, const VariationalState& state,
                           InferenceMode mode) {
  const Eigen::MatrixXd& tau = state.tau;
  double total = 0.0;
  for (int q = 0; q < params.Q; ++q) {
    const double mass = tau.col(q).sum();
    if (mass > 0.0) total += mass * std::log(clamp_probability(params.alpha(q)));
  }
  const Eigen::MatrixXd y = completed_values(net, state, mode);
  const Eigen::MatrixXd w = dyad_weights(net, mode);
  if (params.variant == SbmVariant::Plain) {
    const Eigen::MatrixXd edges = tau.transpose() * y * tau;
    const Eigen::MatrixXd pairs = tau.transpose() * w * tau;
    double sbm = 0.0;
    for (int q = 0; q < params.Q; ++q)
      for (int l = 0; l < params.Q; ++l) {
        const double p = clamp_probability(params.pi(q, l));
        sbm += edges(q, l) * std::log(p) + (pairs(q, l) - edges(q, l)) * std::log1p(-p);
      }
    return total + (net.directed() ? sbm : 0.5 * sbm);
  }
  const auto dyads = active_dyads(net, y, w);
  return total + covariate_objective(dyads, tau, params.gamma, covariate_effect(params, net.covariates, net.size()));
}

Eigen::MatrixXd predict_probabilities(const SbmParams& params, const Eigen::MatrixXd& tau, const CovariateSet& cov) {
  const auto n = tau.rows();
  Eigen::MatrixXd out;
  if (params.variant == SbmVariant::Plain) {
    out = tau * params.pi * tau.transpose();
  } else {
    const Eigen::MatrixXd effect = covariate_effect(params, cov, static_cast<int>(n));
    out.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        double s = 0.0;
        for (int q = 0; q < params.Q; ++q)
          for (int l = 0; l < params.Q; ++l) s += tau(i, q) * tau(j, l) * logistic(params.gamma(q, l) + effect(i, j));
        out(i, j) = s;
      }
  }
  out = out.cwiseMax(0.0).cwiseMin(1.0);
  out.diagonal().setConstant(std::nan(""));
  return out;
}

std::vector<double> missing_dyad_logits(const SbmParams& params, const ObservedNetwork& net,
                                        const Eigen::MatrixXd& tau) {
  std::vector<double> out(net.missing.size());
  if (params.variant == SbmVariant::Plain) {
    Eigen::MatrixXd lg(params.Q, params.Q);
    for (int q = 0; q < params.Q; ++q)
      for (int l = 0; l < params.Q; ++l) lg(q, l) = logit(clamp_probability(params.pi(q, l)));
    for (std::size_t k = 0; k < out.size(); ++k) {
      const auto [i, j] = net.missing[k];
      out[k] = tau.row(i) * lg * tau.row(j).transpose();
    }
    return out;
  }
  const Eigen::MatrixXd effect = covariate_effect(params, net.covariates, net.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto [i, j] = net.missing[k];
    // tau rows sum to one, so the covariate shift factors out of the mixture
    out[k] = tau.row(i) * params.gamma * tau.row(j).transpose() + effect(i, j);
  }
  return out;
}

SbmParams update_sbm(const SbmParams& previous, const ObservedNetwork& net, const VariationalState& state,
                     InferenceMode mode, UpdateFlags* flags) {
  SbmParams next = previous;
  const Eigen::MatrixXd& tau = state.tau;
  const int Q = previous.Q;
  if (tau.cols() != Q || tau.rows() != net.size()) throw InputError("tau has the wrong shape");
  next.alpha = tau.colwise().mean().transpose();
  next.alpha /= next.alpha.sum();

  const Eigen::MatrixXd y = completed_values(net, state, mode);
  const Eigen::MatrixXd w = dyad_weights(net, mode);
  if (previous.variant == SbmVariant::Plain) {
    const Eigen::MatrixXd edges = tau.transpose() * y * tau;
    const Eigen::MatrixXd pairs = tau.transpose() * w * tau;
    for (int q = 0; q < Q; ++q)
      for (int l = 0; l < Q; ++l) {
        if (pairs(q, l) > 1e-12) {
          next.pi(q, l) = std::clamp(edges(q, l) / pairs(q, l), 0.0, 1.0);
        } else if (flags) {
          ++flags->kept_components;
        }
      }
    if (!net.directed()) next.pi = 0.5 * (next.pi + next.pi.transpose()).eval();
    return next;
  }
  if (net.covariates.dyadic_count() != previous.covariate_count())
    throw InputError("covariate SBM and network covariates disagree in number");
  covariate_m_step(next, net, tau, active_dyads(net, y, w));
  if (!next.gamma.allFinite() || !next.beta.allFinite())
    throw NumericalError("covariate M-step produced non-finite parameters");
  return next;
}

double parameter_delta(const SbmParams& a, const SbmParams& b) {
  if (a.variant != b.variant || a.Q != b.Q) throw InputError("parameter_delta: incompatible models");
  if (a.variant == SbmVariant::Plain) return (a.pi - b.pi).cwiseAbs().maxCoeff();
  double d = (a.gamma - b.gamma).cwiseAbs().maxCoeff();
  if (a.beta.size() > 0) d = std::max(d, (a.beta - b.beta).cwiseAbs().maxCoeff());
  return d;
}

}  // namespace missbm
