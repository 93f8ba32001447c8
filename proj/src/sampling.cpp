#include "missbm/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "missbm/errors.hpp"
#include "missbm/logistic_regression.hpp"
#include "missbm/rng.hpp"

namespace missbm {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

double log_p(double p) { return std::log(clamp_probability(p)); }
double log_1mp(double p) { return std::log1p(-clamp_probability(p)); }

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw InputError(std::string(what) + " must lie in [0, 1]");
}

double covariate_dot(const CovariateSet& cov, const Eigen::VectorXd& slope, int i, int j) {
  double s = 0.0;
  for (int k = 0; k < slope.size(); ++k) s += slope(k) * cov.dyadic[static_cast<std::size_t>(k)](i, j);
  return s;
}

double nodal_dot(const CovariateSet& cov, const Eigen::VectorXd& slope, int i) {
  double s = 0.0;
  for (int k = 0; k < slope.size(); ++k) s += slope(k) * cov.nodal[static_cast<std::size_t>(k)](i);
  return s;
}

double binomial_loglik(double successes, double trials, double p) {
  return successes * log_p(p) + (trials - successes) * log_1mp(p);
}

// Sum over dyads of (tau^T M tau) as block-pair totals: ordered pairs for
// directed networks, each unordered pair once otherwise.
Eigen::MatrixXd block_totals(const Eigen::MatrixXd& tau, const Eigen::MatrixXd& m, bool directed) {
  Eigen::MatrixXd t = tau.transpose() * m * tau;
  return directed ? t : Eigen::MatrixXd(0.5 * t);
}

Eigen::MatrixXd all_pair_totals(const Eigen::MatrixXd& tau, bool directed) {
  const Eigen::VectorXd s = tau.colwise().sum().transpose();
  Eigen::MatrixXd t = s * s.transpose() - tau.transpose() * tau;
  return directed ? t : Eigen::MatrixXd(0.5 * t);
}

struct DoubleStandardCounts {
  double observed_edges = 0.0;
  double observed_non_edges = 0.0;
  double imputed_edges = 0.0;
  double missing = 0.0;
};

DoubleStandardCounts double_standard_counts(const ObservedNetwork& net, const VariationalState& state) {
  DoubleStandardCounts c;
  const auto& adj = net.adjacency;
  c.observed_edges = static_cast<double>(adj.edge_count());
  c.missing = static_cast<double>(net.missing.size());
  c.observed_non_edges = net.dyad_count() - c.missing - c.observed_edges;
  if (!net.missing.empty() && state.nu.size() != net.missing.size())
    throw InputError("double-standard sampling requires nu for every missing dyad");
  for (double v : state.nu) c.imputed_edges += v;
  return c;
}

Eigen::MatrixXd nodal_design(const CovariateSet& cov, int n) {
  Eigen::MatrixXd X(n, 1 + cov.nodal_count());
  X.col(0).setOnes();
  for (int k = 0; k < cov.nodal_count(); ++k) X.col(k + 1) = cov.nodal[static_cast<std::size_t>(k)];
  return X;
}

void require_nodal(const CovariateSet& cov, Eigen::Index slopes) {
  if (cov.nodal_count() == 0) throw InputError("covar-node sampling requires nodal covariates");
  if (cov.nodal_count() != slopes)
    throw InputError("covar-node sampling has " + std::to_string(slopes) + " slopes for " +
                     std::to_string(cov.nodal_count()) + " nodal covariates");
}

void require_dyadic(const CovariateSet& cov, Eigen::Index slopes) {
  if (cov.dyadic_count() == 0) throw InputError("covar-dyad sampling requires covariates");
  if (cov.dyadic_count() != slopes)
    throw InputError("covar-dyad sampling has " + std::to_string(slopes) + " slopes for " +
                     std::to_string(cov.dyadic_count()) + " covariates");
}

Eigen::MatrixXd dyadic_design(const ObservedNetwork& net, Eigen::VectorXd* response) {
  const auto dyads = net.adjacency.dyads();
  const int m = net.covariates.dyadic_count();
  Eigen::MatrixXd X(static_cast<Eigen::Index>(dyads.size()), 1 + m);
  if (response) response->resize(X.rows());
  for (std::size_t k = 0; k < dyads.size(); ++k) {
    const auto [i, j] = dyads[k];
    const auto row = static_cast<Eigen::Index>(k);
    X(row, 0) = 1.0;
    for (int c = 0; c < m; ++c) X(row, c + 1) = net.covariates.dyadic[static_cast<std::size_t>(c)](i, j);
    if (response) (*response)(row) = net.event.mask(i, j);
  }
  return X;
}

}  // namespace

SamplingTag tag_of(const SamplingDesign& design) {
  return std::visit(Overloaded{
                        [](const DyadSampling&) { return SamplingTag::Dyad; },
                        [](const DoubleStandardSampling&) { return SamplingTag::DoubleStandard; },
                        [](const BlockDyadSampling&) { return SamplingTag::BlockDyad; },
                        [](const CovarDyadSampling&) { return SamplingTag::CovarDyad; },
                        [](const NodeSampling&) { return SamplingTag::Node; },
                        [](const SnowballSampling&) { return SamplingTag::Snowball; },
                        [](const DegreeSampling&) { return SamplingTag::Degree; },
                        [](const BlockNodeSampling&) { return SamplingTag::BlockNode; },
                        [](const CovarNodeSampling&) { return SamplingTag::CovarNode; },
                    },
                    design);
}

std::string_view to_string(SamplingTag tag) {
  switch (tag) {
    case SamplingTag::Dyad: return "dyad";
    case SamplingTag::DoubleStandard: return "double-standard";
    case SamplingTag::BlockDyad: return "block-dyad";
    case SamplingTag::CovarDyad: return "covar-dyad";
    case SamplingTag::Node: return "node";
    case SamplingTag::Snowball: return "snowball";
    case SamplingTag::Degree: return "degree";
    case SamplingTag::BlockNode: return "block-node";
    case SamplingTag::CovarNode: return "covar-node";
  }
  return "?";
}

SamplingTag parse_sampling_tag(std::string_view token) {
  for (SamplingTag t : kAllSamplings)
    if (to_string(t) == token) return t;
  throw InputError("unknown sampling design '" + std::string(token) + "'");
}

Missingness missingness_class(SamplingTag tag) {
  switch (tag) {
    case SamplingTag::Dyad:
    case SamplingTag::Node: return Missingness::MCAR;
    case SamplingTag::CovarDyad:
    case SamplingTag::CovarNode:
    case SamplingTag::Snowball: return Missingness::MAR;
    default: return Missingness::MNAR;
  }
}

Centering centering(SamplingTag tag) {
  switch (tag) {
    case SamplingTag::Dyad:
    case SamplingTag::DoubleStandard:
    case SamplingTag::BlockDyad:
    case SamplingTag::CovarDyad: return Centering::Dyad;
    default: return Centering::Node;
  }
}

InferenceMode inference_mode(SamplingTag tag) {
  return missingness_class(tag) == Missingness::MNAR ? InferenceMode::Imputed : InferenceMode::ObservedOnly;
}

int design_df(const SamplingDesign& design, int Q, bool directed) {
  return std::visit(Overloaded{
                        [](const DyadSampling&) { return 1; },
                        [](const DoubleStandardSampling&) { return 2; },
                        [&](const BlockDyadSampling&) { return directed ? Q * Q : Q * (Q + 1) / 2; },
                        [](const CovarDyadSampling& d) { return 1 + static_cast<int>(d.kappa.size()); },
                        [](const NodeSampling&) { return 1; },
                        [](const SnowballSampling&) { return 1; },
                        [](const DegreeSampling&) { return 2; },
                        [&](const BlockNodeSampling&) { return Q; },
                        [](const CovarNodeSampling& d) { return 1 + static_cast<int>(d.eta.size()); },
                    },
                    design);
}

std::vector<double> flat_parameters(const SamplingDesign& design) {
  return std::visit(Overloaded{
                        [](const DyadSampling& d) { return std::vector<double>{d.psi}; },
                        [](const DoubleStandardSampling& d) { return std::vector<double>{d.rho1, d.rho0}; },
                        [](const BlockDyadSampling& d) {
                          std::vector<double> v;
                          for (Eigen::Index q = 0; q < d.psi.rows(); ++q)
                            for (Eigen::Index l = 0; l < d.psi.cols(); ++l) v.push_back(d.psi(q, l));
                          return v;
                        },
                        [](const CovarDyadSampling& d) {
                          std::vector<double> v{d.intercept};
                          v.insert(v.end(), d.kappa.data(), d.kappa.data() + d.kappa.size());
                          return v;
                        },
                        [](const NodeSampling& d) { return std::vector<double>{d.psi}; },
                        [](const SnowballSampling& d) { return std::vector<double>{d.rate}; },
                        [](const DegreeSampling& d) { return std::vector<double>{d.a, d.b}; },
                        [](const BlockNodeSampling& d) {
                          return std::vector<double>(d.psi.data(), d.psi.data() + d.psi.size());
                        },
                        [](const CovarNodeSampling& d) {
                          std::vector<double> v{d.intercept};
                          v.insert(v.end(), d.eta.data(), d.eta.data() + d.eta.size());
                          return v;
                        },
                    },
                    design);
}

SamplingDesign make_design(SamplingTag tag, std::span<const double> p, double intercept) {
  auto need = [&](std::size_t k) {
    if (p.size() != k)
      throw InputError(std::string(to_string(tag)) + " sampling expects " + std::to_string(k) + " parameter(s), got " +
                       std::to_string(p.size()));
  };
  switch (tag) {
    case SamplingTag::Dyad:
      need(1);
      check_probability(p[0], "dyad sampling rate");
      return DyadSampling{p[0]};
    case SamplingTag::Node:
      need(1);
      check_probability(p[0], "node sampling rate");
      return NodeSampling{p[0]};
    case SamplingTag::DoubleStandard:
      need(2);
      check_probability(p[0], "rho1");
      check_probability(p[1], "rho0");
      return DoubleStandardSampling{p[0], p[1]};
    case SamplingTag::BlockDyad: {
      const auto q = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(p.size()))));
      if (q < 1 || static_cast<std::size_t>(q * q) != p.size())
        throw InputError("block-dyad sampling expects Q*Q parameters");
      BlockDyadSampling d{Eigen::MatrixXd(q, q)};
      for (Eigen::Index a = 0; a < q; ++a)
        for (Eigen::Index b = 0; b < q; ++b) {
          d.psi(a, b) = p[static_cast<std::size_t>(a * q + b)];
          check_probability(d.psi(a, b), "block-dyad sampling rate");
        }
      return d;
    }
    case SamplingTag::BlockNode: {
      if (p.empty()) throw InputError("block-node sampling expects one rate per block");
      BlockNodeSampling d{Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()))};
      for (double v : p) check_probability(v, "block-node sampling rate");
      return d;
    }
    case SamplingTag::CovarDyad:
      if (p.empty()) throw InputError("covar-dyad sampling expects one slope per covariate");
      return CovarDyadSampling{intercept,
                               Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()))};
    case SamplingTag::CovarNode:
      if (p.empty()) throw InputError("covar-node sampling expects one slope per covariate");
      return CovarNodeSampling{intercept,
                               Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()))};
    case SamplingTag::Degree:
      need(2);
      return DegreeSampling{p[0], p[1]};
    case SamplingTag::Snowball: {
      if (p.empty() || p.size() > 2) throw InputError("snowball sampling expects rate[,waves]");
      check_probability(p[0], "snowball first-batch rate");
      int waves = 2;
      if (p.size() == 2) {
        if (p[1] < 1.0 || p[1] != std::floor(p[1])) throw InputError("snowball wave count must be an integer >= 1");
        waves = static_cast<int>(p[1]);
      }
      return SnowballSampling{p[0], waves};
    }
  }
  throw InputError("unknown sampling design");
}

SamplingDesign initial_design(SamplingTag tag, int Q, int dyadic_covariates, int nodal_covariates) {
  switch (tag) {
    case SamplingTag::Dyad: return DyadSampling{};
    case SamplingTag::DoubleStandard: return DoubleStandardSampling{};
    case SamplingTag::BlockDyad: return BlockDyadSampling{Eigen::MatrixXd::Constant(Q, Q, 0.5)};
    case SamplingTag::CovarDyad:
      if (dyadic_covariates == 0) throw InputError("covar-dyad sampling requires covariates");
      return CovarDyadSampling{0.0, Eigen::VectorXd::Zero(dyadic_covariates)};
    case SamplingTag::Node: return NodeSampling{};
    case SamplingTag::Snowball: return SnowballSampling{};
    case SamplingTag::Degree: return DegreeSampling{};
    case SamplingTag::BlockNode: return BlockNodeSampling{Eigen::VectorXd::Constant(Q, 0.5)};
    case SamplingTag::CovarNode:
      if (nodal_covariates == 0) throw InputError("covar-node sampling requires nodal covariates");
      return CovarNodeSampling{0.0, Eigen::VectorXd::Zero(nodal_covariates)};
  }
  throw InputError("unknown sampling design");
}

PartialAdjacency observe_network(const PartialAdjacency& adj, const SamplingDesign& design,
                                 const Partition* clusters, const CovariateSet* covariates, std::uint64_t seed) {
  if (!adj.fully_observed()) throw InputError("observe_network requires a fully observed network");
  const int n = adj.size();
  const SamplingTag tag = tag_of(design);
  if ((tag == SamplingTag::BlockDyad || tag == SamplingTag::BlockNode)) {
    if (!clusters) throw InputError(std::string(to_string(tag)) + " sampling requires clusters");
    if (clusters->size() != n) throw InputError("clusters must have one label per node");
  }
  CovariateSet cov;
  if (tag == SamplingTag::CovarDyad || tag == SamplingTag::CovarNode) {
    if (!covariates || covariates->empty())
      throw InputError(std::string(to_string(tag)) + " sampling requires covariates");
    cov = transfer_covariates(*covariates, n, adj.directed());
  }

  Rng rng(seed);
  PartialAdjacency out = adj;

  if (centering(tag) == Centering::Dyad) {
    auto observe_prob = [&](int i, int j) -> double {
      return std::visit(Overloaded{
                            [](const DyadSampling& d) { return d.psi; },
                            [&](const DoubleStandardSampling& d) {
                              return adj.at(i, j) == DyadValue::Present ? d.rho1 : d.rho0;
                            },
                            [&](const BlockDyadSampling& d) {
                              return d.psi(clusters->labels[static_cast<std::size_t>(i)],
                                           clusters->labels[static_cast<std::size_t>(j)]);
                            },
                            [&](const CovarDyadSampling& d) {
                              return logistic(d.intercept + covariate_dot(cov, d.kappa, i, j));
                            },
                            [](const auto&) -> double { throw InputError("not a dyad-centered design"); },
                        },
                        design);
    };
    if (const auto* d = std::get_if<BlockDyadSampling>(&design)) {
      if (d->psi.rows() != clusters->Q || d->psi.cols() != clusters->Q)
        throw InputError("block-dyad sampling needs a QxQ parameter matrix matching the clusters");
    }
    if (const auto* d = std::get_if<CovarDyadSampling>(&design)) require_dyadic(cov, d->kappa.size());
    for (const auto [i, j] : adj.dyads())
      if (!rng.bernoulli(observe_prob(i, j))) out.set(i, j, DyadValue::Missing);
    return out;
  }

  std::vector<char> sampled(static_cast<std::size_t>(n), 0);
  std::visit(Overloaded{
                 [&](const NodeSampling& d) {
                   for (int i = 0; i < n; ++i) sampled[static_cast<std::size_t>(i)] = rng.bernoulli(d.psi);
                 },
                 [&](const SnowballSampling& d) {
                   if (d.waves < 1) throw InputError("snowball wave count must be >= 1");
                   for (int i = 0; i < n; ++i) sampled[static_cast<std::size_t>(i)] = rng.bernoulli(d.rate);
                   for (int w = 1; w < d.waves; ++w) {
                     std::vector<char> next = sampled;
                     for (int i = 0; i < n; ++i) {
                       if (!sampled[static_cast<std::size_t>(i)]) continue;
                       for (int j = 0; j < n; ++j) {
                         if (j == i) continue;
                         const bool linked = adj.at(i, j) == DyadValue::Present ||
                                             (adj.directed() && adj.at(j, i) == DyadValue::Present);
                         if (linked) next[static_cast<std::size_t>(j)] = 1;
                       }
                     }
                     sampled = std::move(next);
                   }
                 },
                 [&](const DegreeSampling& d) {
                   const Eigen::VectorXd deg = degrees(adj);
                   for (int i = 0; i < n; ++i)
                     sampled[static_cast<std::size_t>(i)] = rng.bernoulli(logistic(d.a + d.b * deg(i)));
                 },
                 [&](const BlockNodeSampling& d) {
                   if (d.psi.size() != clusters->Q)
                     throw InputError("block-node sampling needs one rate per cluster");
                   for (int i = 0; i < n; ++i)
                     sampled[static_cast<std::size_t>(i)] =
                         rng.bernoulli(d.psi(clusters->labels[static_cast<std::size_t>(i)]));
                 },
                 [&](const CovarNodeSampling& d) {
                   require_nodal(cov, d.eta.size());
                   for (int i = 0; i < n; ++i)
                     sampled[static_cast<std::size_t>(i)] = rng.bernoulli(logistic(d.intercept + nodal_dot(cov, d.eta, i)));
                 },
                 [](const auto&) { throw InputError("not a node-centered design"); },
             },
             design);
  for (const auto [i, j] : adj.dyads())
    if (!sampled[static_cast<std::size_t>(i)] && !sampled[static_cast<std::size_t>(j)]) out.set(i, j, DyadValue::Missing);
  return out;
}

double sampling_loglik(const SamplingDesign& design, const ObservedNetwork& net, const VariationalState& state) {
  const double total = net.dyad_count();
  const double missing = static_cast<double>(net.missing.size());
  const double n = static_cast<double>(net.size());
  const Eigen::VectorXd& V = net.event.node_observed;
  return std::visit(
      Overloaded{
          [&](const DyadSampling& d) { return binomial_loglik(total - missing, total, d.psi); },
          [&](const DoubleStandardSampling& d) {
            const auto c = double_standard_counts(net, state);
            return c.observed_edges * log_p(d.rho1) + c.observed_non_edges * log_p(d.rho0) +
                   c.imputed_edges * log_1mp(d.rho1) + (c.missing - c.imputed_edges) * log_1mp(d.rho0);
          },
          [&](const BlockDyadSampling& d) {
            const Eigen::MatrixXd seen = block_totals(state.tau, net.event.mask, net.directed());
            const Eigen::MatrixXd unseen = all_pair_totals(state.tau, net.directed()) - seen;
            double ll = 0.0;
            for (Eigen::Index q = 0; q < d.psi.rows(); ++q)
              for (Eigen::Index l = 0; l < d.psi.cols(); ++l)
                ll += seen(q, l) * log_p(d.psi(q, l)) + unseen(q, l) * log_1mp(d.psi(q, l));
            return ll;
          },
          [&](const CovarDyadSampling& d) {
            require_dyadic(net.covariates, d.kappa.size());
            Eigen::VectorXd r;
            const Eigen::MatrixXd X = dyadic_design(net, &r);
            Eigen::VectorXd coef(1 + d.kappa.size());
            coef << d.intercept, d.kappa;
            return logistic_loglik(X, r, Eigen::VectorXd::Ones(X.rows()), coef);
          },
          [&](const NodeSampling& d) { return binomial_loglik(V.sum(), n, d.psi); },
          [&](const SnowballSampling& d) { return binomial_loglik(V.sum(), n, d.rate); },
          [&](const DegreeSampling& d) {
            const Eigen::VectorXd deg = degrees(net.adjacency, std::span<const double>(state.nu));
            double ll = 0.0;
            for (Eigen::Index i = 0; i < deg.size(); ++i) {
              const double eta = d.a + d.b * deg(i);
              ll += V(i) * eta - softplus(eta);
            }
            return ll;
          },
          [&](const BlockNodeSampling& d) {
            double ll = 0.0;
            for (Eigen::Index i = 0; i < state.tau.rows(); ++i)
              for (Eigen::Index q = 0; q < d.psi.size(); ++q)
                ll += state.tau(i, q) * (V(i) * log_p(d.psi(q)) + (1.0 - V(i)) * log_1mp(d.psi(q)));
            return ll;
          },
          [&](const CovarNodeSampling& d) {
            require_nodal(net.covariates, d.eta.size());
            Eigen::VectorXd coef(1 + d.eta.size());
            coef << d.intercept, d.eta;
            return logistic_loglik(nodal_design(net.covariates, net.size()), V, Eigen::VectorXd::Ones(net.size()),
                                   coef);
          },
      },
      design);
}

SamplingDesign update_psi(const SamplingDesign& design, const ObservedNetwork& net, const VariationalState& state,
                          UpdateFlags* flags) {
  constexpr double kTiny = 1e-12;
  auto keep = [&] {
    if (flags) ++flags->kept_components;
  };
  const double total = net.dyad_count();
  const double missing = static_cast<double>(net.missing.size());
  const Eigen::VectorXd& V = net.event.node_observed;
  return std::visit(
      Overloaded{
          [&](const DyadSampling&) -> SamplingDesign { return DyadSampling{(total - missing) / total}; },
          [&](const DoubleStandardSampling& d) -> SamplingDesign {
            const auto c = double_standard_counts(net, state);
            DoubleStandardSampling out = d;
            const double den1 = c.observed_edges + c.imputed_edges;
            const double den0 = c.observed_non_edges + (c.missing - c.imputed_edges);
            if (den1 > kTiny) out.rho1 = c.observed_edges / den1; else keep();
            if (den0 > kTiny) out.rho0 = c.observed_non_edges / den0; else keep();
            return out;
          },
          [&](const BlockDyadSampling& d) -> SamplingDesign {
            const Eigen::MatrixXd seen = block_totals(state.tau, net.event.mask, net.directed());
            const Eigen::MatrixXd all = all_pair_totals(state.tau, net.directed());
            BlockDyadSampling out = d;
            if (out.psi.rows() != seen.rows()) out.psi = Eigen::MatrixXd::Constant(seen.rows(), seen.cols(), 0.5);
            for (Eigen::Index q = 0; q < seen.rows(); ++q)
              for (Eigen::Index l = 0; l < seen.cols(); ++l) {
                if (all(q, l) > kTiny) out.psi(q, l) = std::clamp(seen(q, l) / all(q, l), 0.0, 1.0);
                else keep();
              }
            return out;
          },
          [&](const CovarDyadSampling& d) -> SamplingDesign {
            require_dyadic(net.covariates, d.kappa.size());
            Eigen::VectorXd r;
            const Eigen::MatrixXd X = dyadic_design(net, &r);
            Eigen::VectorXd start(1 + d.kappa.size());
            start << d.intercept, d.kappa;
            const auto fit = fit_logistic(X, r, Eigen::VectorXd::Ones(X.rows()), start);
            return CovarDyadSampling{fit.coef(0), fit.coef.tail(d.kappa.size())};
          },
          [&](const NodeSampling&) -> SamplingDesign { return NodeSampling{V.mean()}; },
          [&](const SnowballSampling& d) -> SamplingDesign { return SnowballSampling{V.mean(), d.waves}; },
          [&](const DegreeSampling& d) -> SamplingDesign {
            const Eigen::VectorXd deg = degrees(net.adjacency, std::span<const double>(state.nu));
            Eigen::MatrixXd X(deg.size(), 2);
            X.col(0).setOnes();
            X.col(1) = deg;
            const auto fit = fit_logistic(X, V, Eigen::VectorXd::Ones(deg.size()), Eigen::Vector2d(d.a, d.b));
            return DegreeSampling{fit.coef(0), fit.coef(1)};
          },
          [&](const BlockNodeSampling& d) -> SamplingDesign {
            BlockNodeSampling out = d;
            const Eigen::Index Q = state.tau.cols();
            if (out.psi.size() != Q) out.psi = Eigen::VectorXd::Constant(Q, 0.5);
            const Eigen::VectorXd mass = state.tau.colwise().sum().transpose();
            const Eigen::VectorXd seen = state.tau.transpose() * V;
            for (Eigen::Index q = 0; q < Q; ++q) {
              if (mass(q) > kTiny) out.psi(q) = std::clamp(seen(q) / mass(q), 0.0, 1.0);
              else keep();
            }
            return out;
          },
          [&](const CovarNodeSampling& d) -> SamplingDesign {
            require_nodal(net.covariates, d.eta.size());
            Eigen::VectorXd start(1 + d.eta.size());
            start << d.intercept, d.eta;
            const auto fit = fit_logistic(nodal_design(net.covariates, net.size()), V,
                                          Eigen::VectorXd::Ones(net.size()), start);
            return CovarNodeSampling{fit.coef(0), fit.coef.tail(d.eta.size())};
          },
      },
      design);
}

void add_tau_sampling_term(const SamplingDesign& design, const ObservedNetwork& net, const Eigen::MatrixXd& tau,
                           int i, Eigen::Ref<Eigen::VectorXd> log_tau) {
  if (const auto* d = std::get_if<BlockNodeSampling>(&design)) {
    const double v = net.event.node_observed(i);
    for (Eigen::Index q = 0; q < d->psi.size(); ++q)
      log_tau(q) += v * log_p(d->psi(q)) + (1.0 - v) * log_1mp(d->psi(q));
    return;
  }
  const auto* d = std::get_if<BlockDyadSampling>(&design);
  if (!d) return;
  const Eigen::Index Q = tau.cols();
  Eigen::MatrixXd l1(Q, Q), l0(Q, Q);
  for (Eigen::Index q = 0; q < Q; ++q)
    for (Eigen::Index l = 0; l < Q; ++l) {
      l1(q, l) = log_p(d->psi(q, l));
      l0(q, l) = log_1mp(d->psi(q, l));
    }
  const Eigen::RowVectorXd others = tau.colwise().sum() - tau.row(i);
  const Eigen::RowVectorXd seen_out = net.event.mask.row(i) * tau;
  log_tau += l1 * seen_out.transpose() + l0 * (others - seen_out).transpose();
  if (net.directed()) {
    const Eigen::RowVectorXd seen_in = net.event.mask.col(i).transpose() * tau;
    log_tau += l1.transpose() * seen_in.transpose() + l0.transpose() * (others - seen_in).transpose();
  }
}

void update_nu(const SamplingDesign& design, const ObservedNetwork& net, const std::vector<double>& sbm_logits,
               std::vector<double>& nu) {
  if (sbm_logits.size() != net.missing.size() || nu.size() != net.missing.size())
    throw InputError("update_nu: size mismatch");
  if (const auto* d = std::get_if<DoubleStandardSampling>(&design)) {
    const double correction = log_1mp(d->rho1) - log_1mp(d->rho0);
    for (std::size_t k = 0; k < nu.size(); ++k) nu[k] = logistic(sbm_logits[k] + correction);
    return;
  }
  if (std::holds_alternative<BlockDyadSampling>(design) || std::holds_alternative<BlockNodeSampling>(design)) {
    for (std::size_t k = 0; k < nu.size(); ++k) nu[k] = logistic(sbm_logits[k]);
    return;
  }
  const auto* d = std::get_if<DegreeSampling>(&design);
  if (!d) return;  // M(C)AR designs carry no nu

  // Coordinate ascent per dyad: the objective is strictly concave in
  // u = logit(nu), so the root of its derivative is bracketed and unique.
  const Eigen::VectorXd& V = net.event.node_observed;
  Eigen::VectorXd deg = degrees(net.adjacency, std::span<const double>(nu));
  const bool undirected = !net.directed();
  for (std::size_t k = 0; k < nu.size(); ++k) {
    const auto [i, j] = net.missing[k];
    const double base_i = deg(i) - nu[k];
    const double base_j = undirected ? deg(j) - nu[k] : 0.0;
    const double c = sbm_logits[k];
    auto slope = [&](double u) {
      const double v = logistic(u);
      double h = c - u + d->b * (V(i) - logistic(d->a + d->b * (base_i + v)));
      if (undirected) h += d->b * (V(j) - logistic(d->a + d->b * (base_j + v)));
      return h;
    };
    double lo = c - 2.0 * std::abs(d->b) - 1.0;
    double hi = c + 2.0 * std::abs(d->b) + 1.0;
    double u = std::clamp(logit(clamp_probability(nu[k])), lo, hi);
    for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + std::abs(u)); ++it) {
      const double h = slope(u);
      if (h == 0.0) break;
      if (h > 0.0) lo = u; else hi = u;
      const double v = logistic(u);
      double curv = -1.0;
      const double gi = logistic(d->a + d->b * (base_i + v));
      curv -= d->b * d->b * gi * (1.0 - gi) * v * (1.0 - v);
      if (undirected) {
        const double gj = logistic(d->a + d->b * (base_j + v));
        curv -= d->b * d->b * gj * (1.0 - gj) * v * (1.0 - v);
      }
      const double newton = u - h / curv;
      u = (newton > lo && newton < hi) ? newton : 0.5 * (lo + hi);
    }
    const double updated = logistic(u);
    deg(i) = base_i + updated;
    if (undirected) deg(j) = base_j + updated;
    nu[k] = updated;
  }
}

}  // namespace missbm
