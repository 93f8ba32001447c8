#include "missbm/vem.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <string>

#include "missbm/errors.hpp"

namespace missbm {

namespace {

double entropy_tau(const Eigen::MatrixXd& tau) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < tau.size(); ++i) {
    const double t = tau.data()[i];
    if (t > 0.0) h -= t * std::log(t);
  }
  return h;
}

double entropy_nu(const std::vector<double>& nu) {
  double h = 0.0;
  for (double v : nu) {
    if (v > 0.0) h -= v * std::log(v);
    if (v < 1.0) h -= (1.0 - v) * std::log1p(-v);
  }
  return h;
}

Eigen::RowVectorXd normalized(const Eigen::VectorXd& s) {
  const double top = s.maxCoeff();
  if (!std::isfinite(top)) throw NumericalError("non-finite membership score");
  const Eigen::VectorXd e = (s.array() - top).exp();
  return (e / e.sum()).transpose();
}

double observed_density(const ObservedNetwork& net) {
  const double observed = net.dyad_count() - static_cast<double>(net.missing.size());
  if (observed <= 0.0) return 0.5;
  return static_cast<double>(net.adjacency.edge_count()) / observed;
}

// E[log p(Y^m | Z)] of a M(C)AR fit, with the missing dyads at their
// predicted probabilities. MNAR fits already carry this term through nu.
double missing_dyad_expectation(const ObservedNetwork& net, const SbmParams& params, const Eigen::MatrixXd& tau,
                                InferenceMode mode) {
  if (mode == InferenceMode::Imputed || net.missing.empty()) return 0.0;
  const Eigen::MatrixXd p = predict_probabilities(params, tau, net.covariates);
  VariationalState st{tau, {}};
  st.nu.reserve(net.missing.size());
  for (const auto [i, j] : net.missing) st.nu.push_back(p(i, j));
  return expected_loglik_sbm(params, net, st, InferenceMode::Imputed) -
         expected_loglik_sbm(params, net, st, InferenceMode::ObservedOnly);
}

}  // namespace

void ControlOptions::validate() const {
  if (!(threshold > 0.0)) throw InputError("threshold must be positive");
  if (max_iter < 1) throw InputError("max-iter must be at least 1");
  if (fixpoint_iter < 1) throw InputError("fixpoint-iter must be at least 1");
  if (iterates < 1) throw InputError("iterates must be at least 1");
  if (threads < 1) throw InputError("threads must be at least 1");
}

void ve_step(const ObservedNetwork& net, const SamplingDesign& design, const SbmParams& params,
             VariationalState& state, int fixpoint_iter, bool sampling_in_objective) {
  const int n = net.size();
  const int Q = params.Q;
  const InferenceMode mode = inference_mode(tag_of(design));
  Eigen::MatrixXd& tau = state.tau;
  if (tau.rows() != n || tau.cols() != Q) throw InputError("tau has the wrong shape");
  if (Q == 1) {
    tau.setOnes();
  }
  Eigen::VectorXd log_alpha(Q);
  for (int q = 0; q < Q; ++q) log_alpha(q) = std::log(clamp_probability(params.alpha(q)));
  const Eigen::MatrixXd w = dyad_weights(net, mode);

  Eigen::MatrixXd lp(Q, Q), l1p(Q, Q);
  if (params.variant == SbmVariant::Plain) {
    for (int q = 0; q < Q; ++q)
      for (int l = 0; l < Q; ++l) {
        const double p = clamp_probability(params.pi(q, l));
        lp(q, l) = std::log(p);
        l1p(q, l) = std::log1p(-p);
      }
  }
  const Eigen::MatrixXd effect = covariate_effect(params, net.covariates, n);

  Eigen::VectorXd s(Q);
  for (int round = 0; round < fixpoint_iter; ++round) {
    const Eigen::MatrixXd y = completed_values(net, state, mode);
    if (Q > 1) {
      for (int i = 0; i < n; ++i) {
        s = log_alpha;
        if (params.variant == SbmVariant::Plain) {
          const Eigen::RowVectorXd a = y.row(i) * tau;
          const Eigen::RowVectorXd b = w.row(i) * tau - a;
          s += lp * a.transpose() + l1p * b.transpose();
          if (net.directed()) {
            const Eigen::RowVectorXd ai = y.col(i).transpose() * tau;
            const Eigen::RowVectorXd bi = w.col(i).transpose() * tau - ai;
            s += lp.transpose() * ai.transpose() + l1p.transpose() * bi.transpose();
          }
        } else {
          for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            if (w(i, j) > 0.0) {
              for (int q = 0; q < Q; ++q)
                for (int l = 0; l < Q; ++l) {
                  const double eta = params.gamma(q, l) + effect(i, j);
                  s(q) += tau(j, l) * (y(i, j) * eta - softplus(eta));
                }
            }
            if (net.directed() && w(j, i) > 0.0) {
              for (int q = 0; q < Q; ++q)
                for (int l = 0; l < Q; ++l) {
                  const double eta = params.gamma(l, q) + effect(j, i);
                  s(q) += tau(j, l) * (y(j, i) * eta - softplus(eta));
                }
            }
          }
        }
        if (sampling_in_objective) add_tau_sampling_term(design, net, tau, i, s);
        tau.row(i) = normalized(s);
      }
    }
    if (mode == InferenceMode::Imputed && !net.missing.empty()) {
      const auto logits = missing_dyad_logits(params, net, tau);
      update_nu(design, net, logits, state.nu);
      for (double v : state.nu)
        if (!std::isfinite(v)) throw NumericalError("non-finite imputed value in VE step");
    }
  }
}

std::pair<SbmParams, SamplingDesign> m_step(const ObservedNetwork& net, const SamplingDesign& design,
                                            const SbmParams& params, const VariationalState& state,
                                            UpdateFlags* flags) {
  const InferenceMode mode = inference_mode(tag_of(design));
  SbmParams next = update_sbm(params, net, state, mode, flags);
  SamplingDesign psi = update_psi(design, net, state, flags);
  return {std::move(next), std::move(psi)};
}

Objective objective(const ObservedNetwork& net, const SamplingDesign& design, const SbmParams& params,
                    const VariationalState& state, bool sampling_in_objective) {
  const InferenceMode mode = inference_mode(tag_of(design));
  Objective o;
  o.sbm = expected_loglik_sbm(params, net, state, mode);
  if (sampling_in_objective) o.sampling = sampling_loglik(design, net, state);
  o.entropy = entropy_tau(state.tau);
  if (mode == InferenceMode::Imputed) o.entropy += entropy_nu(state.nu);
  return o;
}

double elbo(const ObservedNetwork& net, const SamplingDesign& design, const SbmParams& params,
            const VariationalState& state) {
  return objective(net, design, params, state).elbo();
}

Eigen::MatrixXd soften(const Partition& init, double eps) {
  const int Q = init.Q;
  Eigen::MatrixXd tau = Eigen::MatrixXd::Constant(init.size(), Q, Q == 1 ? 1.0 : eps);
  for (int i = 0; i < init.size(); ++i) tau(i, init.labels[static_cast<std::size_t>(i)]) = 1.0 - (Q - 1) * eps;
  return tau;
}

FitResult fit_single(std::shared_ptr<const ObservedNetwork> net, int Q, SamplingTag tag, const Partition& init,
                     const ControlOptions& control) {
  control.validate();
  if (!net) throw InputError("fit_single: no network");
  if (Q < 1) throw InputError("Q must be at least 1");
  if (init.size() != net->size() || init.Q != Q)
    throw InputError("initial partition does not match the network and Q = " + std::to_string(Q));
  const int n = net->size();
  const InferenceMode mode = inference_mode(tag);
  const std::string context = " (Q = " + std::to_string(Q) + ")";

  FitResult fit;
  fit.Q = Q;
  fit.network = net;
  fit.design = initial_design(tag, Q, net->covariates.dyadic_count(), net->covariates.nodal_count());
  fit.state.tau = soften(init);
  if (mode == InferenceMode::Imputed) fit.state.nu.assign(net->missing.size(), observed_density(*net));

  SbmParams& params = fit.sbm;
  params.Q = Q;
  params.directed = net->directed();
  params.alpha = Eigen::VectorXd::Constant(Q, 1.0 / Q);
  params.pi = Eigen::MatrixXd::Constant(Q, Q, observed_density(*net));
  UpdateFlags flags;
  try {
    params = update_sbm(params, *net, fit.state, mode, &flags);
    if (control.use_cov) {
      if (net->covariates.dyadic_count() == 0) throw InputError("use-cov requires covariates");
      params.variant = SbmVariant::Covariate;
      params.gamma = params.pi.unaryExpr([](double p) { return logit(std::clamp(p, 1e-4, 1.0 - 1e-4)); });
      params.beta = Eigen::VectorXd::Zero(net->covariates.dyadic_count());
      params.pi.resize(0, 0);
      params = update_sbm(params, *net, fit.state, mode, &flags);
    }
    fit.design = update_psi(fit.design, *net, fit.state, &flags);

    double current = objective(*net, fit.design, params, fit.state, control.sampling_in_objective).elbo();
    if (!std::isfinite(current)) throw NumericalError("non-finite initial bound");
    fit.elbo_trace.push_back(current);
    fit.monitoring.push_back({0, current, std::numeric_limits<double>::quiet_NaN()});

    for (int iter = 1; iter <= control.max_iter; ++iter) {
      ve_step(*net, fit.design, params, fit.state, control.fixpoint_iter, control.sampling_in_objective);
      auto [next, design] = m_step(*net, fit.design, params, fit.state, &flags);
      const double delta = parameter_delta(params, next);
      params = std::move(next);
      fit.design = std::move(design);
      const double value = objective(*net, fit.design, params, fit.state, control.sampling_in_objective).elbo();
      if (!std::isfinite(value)) throw NumericalError("non-finite bound at iteration " + std::to_string(iter));
      fit.elbo_trace.push_back(value);
      fit.monitoring.push_back({iter, value, delta});
      if (control.trace)
        std::cerr << "Q=" << Q << " iter " << iter << " elbo " << value << " delta " << delta << '\n';
      const bool done = std::abs(value - current) < control.threshold && delta < control.threshold;
      current = value;
      if (done) {
        fit.converged = true;
        break;
      }
    }
  } catch (const NumericalError& e) {
    throw NumericalError(e.what() + context);
  }
  fit.kept_components = flags.kept_components;

  const Objective o = objective(*net, fit.design, params, fit.state, control.sampling_in_objective);
  fit.vexpec = o.expectation() + missing_dyad_expectation(*net, params, fit.state.tau, mode);
  fit.penalty = icl_penalty(n, Q, design_df(fit.design, Q, net->directed()), centering(tag), net->directed(),
                            params.covariate_count());
  fit.icl = -2.0 * fit.vexpec + fit.penalty;
  return fit;
}

double icl_penalty(int n, int Q, int K, Centering c, bool directed, int m) {
  const double nd = static_cast<double>(n);
  const double dyads = directed ? nd * (nd - 1.0) : nd * (nd - 1.0) / 2.0;
  const double connectivity = (directed ? Q * Q : Q * (Q + 1) / 2.0) + m;
  if (c == Centering::Dyad) return (K + connectivity) * std::log(dyads) + (Q - 1) * std::log(nd);
  return connectivity * std::log(dyads) + (K + Q - 1) * std::log(nd);
}

Eigen::MatrixXd impute(const FitResult& fit) {
  const ObservedNetwork& net = *fit.network;
  Eigen::MatrixXd out = net.adjacency.to_dense();
  if (net.missing.empty()) return out;
  if (inference_mode(fit.tag()) == InferenceMode::Imputed) {
    for (std::size_t k = 0; k < net.missing.size(); ++k) {
      const auto [i, j] = net.missing[k];
      out(i, j) = fit.state.nu[k];
      if (!net.directed()) out(j, i) = fit.state.nu[k];
    }
    return out;
  }
  const Eigen::MatrixXd p = predict_probabilities(fit.sbm, fit.state.tau, net.covariates);
  for (const auto [i, j] : net.missing) {
    out(i, j) = p(i, j);
    if (!net.directed()) out(j, i) = p(j, i);
  }
  return out;
}

}  // namespace missbm
