#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "missbm/network.hpp"
#include "missbm/observed_network.hpp"

namespace missbm {

enum class SamplingTag { Dyad, DoubleStandard, BlockDyad, CovarDyad, Node, Snowball, Degree, BlockNode, CovarNode };
enum class Missingness { MCAR, MAR, MNAR };
enum class Centering { Dyad, Node };

inline constexpr SamplingTag kAllSamplings[] = {
    SamplingTag::Dyad,     SamplingTag::CovarDyad, SamplingTag::Node,           SamplingTag::CovarNode,
    SamplingTag::BlockNode, SamplingTag::BlockDyad, SamplingTag::DoubleStandard, SamplingTag::Degree,
    SamplingTag::Snowball};

// One parameter struct per design.

struct DyadSampling {
  double psi = 0.5;
};
struct DoubleStandardSampling {
  double rho1 = 0.5;
  double rho0 = 0.5;
};
struct BlockDyadSampling {
  Eigen::MatrixXd psi;  ///< Q x Q, symmetric for undirected networks
};
struct CovarDyadSampling {
  double intercept = 0.0;
  Eigen::VectorXd kappa;  ///< one slope per dyadic covariate
};
struct NodeSampling {
  double psi = 0.5;
};
struct SnowballSampling {
  double rate = 0.5;  ///< first-batch node sampling rate
  int waves = 2;      ///< first batch plus (waves - 1) neighbour waves
};
struct DegreeSampling {
  double a = 0.0;
  double b = 0.0;
};
struct BlockNodeSampling {
  Eigen::VectorXd psi;  ///< length Q
};
struct CovarNodeSampling {
  double intercept = 0.0;
  Eigen::VectorXd eta;  ///< one slope per nodal covariate
};

using SamplingDesign = std::variant<DyadSampling, DoubleStandardSampling, BlockDyadSampling, CovarDyadSampling,
                                    NodeSampling, SnowballSampling, DegreeSampling, BlockNodeSampling,
                                    CovarNodeSampling>;

SamplingTag tag_of(const SamplingDesign& design);
std::string_view to_string(SamplingTag tag);
/// Accepts the CLI tokens (`dyad`, `covar-dyad`, `node`, ...). Throws InputError.
SamplingTag parse_sampling_tag(std::string_view token);
Missingness missingness_class(SamplingTag tag);
Centering centering(SamplingTag tag);
/// MNAR designs are fitted on all dyads through nu; M(C)AR ones on observed dyads.
InferenceMode inference_mode(SamplingTag tag);

/// Number of free sampling parameters K used by the ICL penalty.
int design_df(const SamplingDesign& design, int Q, bool directed);

/// Flat parameter vector (block-dyad psi in row-major order; snowball reports
/// the rate only).
std::vector<double> flat_parameters(const SamplingDesign& design);

/// Design from a flat parameter vector, as given on the command line.
/// block-dyad expects Q*Q values (row-major), block-node Q values, covar-* one
/// slope per covariate with the intercept passed separately, snowball
/// `rate[,waves]`.
SamplingDesign make_design(SamplingTag tag, std::span<const double> params, double intercept = 0.0);

/// Starting point of the estimation for Q blocks.
SamplingDesign initial_design(SamplingTag tag, int Q, int dyadic_covariates, int nodal_covariates);

/// Draws an observation mask from a fully observed network. `clusters` is
/// required by block designs and `covariates` by covar designs.
PartialAdjacency observe_network(const PartialAdjacency& adj, const SamplingDesign& design,
                                 const Partition* clusters, const CovariateSet* covariates, std::uint64_t seed);

/// Variational expectation of log p(R | Y, Z; psi).
double sampling_loglik(const SamplingDesign& design, const ObservedNetwork& net, const VariationalState& state);

/// M-step for psi given (tau, nu).
SamplingDesign update_psi(const SamplingDesign& design, const ObservedNetwork& net, const VariationalState& state,
                          UpdateFlags* flags = nullptr);

/// Adds the design's contribution to the unnormalized log tau of node i. Only
/// block designs contribute; `tau` holds the current memberships of the other
/// nodes.
void add_tau_sampling_term(const SamplingDesign& design, const ObservedNetwork& net, const Eigen::MatrixXd& tau,
                           int i, Eigen::Ref<Eigen::VectorXd> log_tau);

/// Updates nu in place. `sbm_logits` holds, per missing dyad, the SBM part
/// sum_{q,l} tau_iq tau_jl logit p_ql(X_ij). The design adds its correction:
/// log((1-rho1)/(1-rho0)) for double-standard, the mean-field degree term for
/// degree sampling (solved per dyad), nothing for block designs.
void update_nu(const SamplingDesign& design, const ObservedNetwork& net, const std::vector<double>& sbm_logits,
               std::vector<double>& nu);

}  // namespace missbm
