#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace missbm {

enum class DyadValue : std::uint8_t { Absent = 0, Present = 1, Missing = 2 };

/// Ordered pair of distinct nodes, 0-based. Undirected dyads are stored with i < j.
struct Dyad {
  int i;
  int j;
  friend bool operator==(const Dyad&, const Dyad&) = default;
};

/// Tri-state adjacency of a partially observed network.
///
/// Entries are kept once per dyad: the upper triangle for undirected networks,
/// every off-diagonal cell for directed ones. The diagonal is structurally
/// undefined and any access to it throws.
class PartialAdjacency {
 public:
  PartialAdjacency() = default;
  PartialAdjacency(int n, bool directed, DyadValue fill = DyadValue::Absent);

  /// Builds from a dense matrix where NaN marks a missing dyad. Undirected input
  /// must be symmetric (NaN pattern included); the diagonal is ignored.
  static PartialAdjacency from_dense(const Eigen::MatrixXd& m, bool directed);

  int size() const { return n_; }
  bool directed() const { return directed_; }

  DyadValue at(int i, int j) const { return entries_[index(i, j)]; }
  void set(int i, int j, DyadValue v) { entries_[index(i, j)] = v; }
  bool is_missing(int i, int j) const { return at(i, j) == DyadValue::Missing; }

  /// |D|: n(n-1)/2 undirected, n(n-1) directed.
  std::size_t dyad_count() const { return entries_.size(); }
  std::size_t missing_count() const;
  std::size_t edge_count() const;
  bool fully_observed() const { return missing_count() == 0; }

  /// All dyads in canonical (row-major) order.
  std::vector<Dyad> dyads() const;
  std::vector<Dyad> missing_dyads() const;

  /// 1 on present dyads, 0 on absent, missing and diagonal cells.
  Eigen::MatrixXd observed_values() const;
  /// R: 1 on observed dyads, 0 on missing dyads and on the diagonal.
  Eigen::MatrixXd observed_mask() const;
  /// Dense view with NaN on missing dyads and on the diagonal.
  Eigen::MatrixXd to_dense() const;

  friend bool operator==(const PartialAdjacency&, const PartialAdjacency&) = default;

 private:
  std::size_t index(int i, int j) const;

  int n_ = 0;
  bool directed_ = false;
  std::vector<DyadValue> entries_;
};

/// Hard assignment of nodes to blocks. Labels are 0-based in memory and
/// 1-based in every file format.
struct Partition {
  std::vector<int> labels;
  int Q = 1;

  Partition() = default;
  Partition(std::vector<int> labels, int Q);
  int size() const { return static_cast<int>(labels.size()); }
};

/// g(x) = 1 / (1 + exp(-x)), evaluated without overflow. NaN propagates.
double logistic(double x);
/// log(1 + exp(x)) without overflow.
double softplus(double x);
double logit(double p);

/// Probabilities entering logarithms are clamped to [kProbFloor, 1 - kProbFloor].
inline constexpr double kProbFloor = 1e-12;
double clamp_probability(double p);

/// Componentwise -|x_k - y_k|. Throws InputError on length mismatch.
std::vector<double> l1_similarity(std::span<const double> x, std::span<const double> y);

enum class CovariateKind { Nodal, Dyadic };

using Similarity = std::function<double(double, double)>;

/// External covariates. Each nodal covariate is one scalar per node; nodal
/// covariates are moved to the dyad level with `similarity`, one dyadic matrix
/// per nodal covariate. Nodal vectors are kept after transfer because
/// node-centered samplings regress on them directly.
struct CovariateSet {
  CovariateKind kind = CovariateKind::Dyadic;
  std::vector<Eigen::VectorXd> nodal;
  std::vector<Eigen::MatrixXd> dyadic;
  Similarity similarity;

  bool empty() const { return nodal.empty() && dyadic.empty(); }
  /// m, the number of dyadic covariates (after transfer).
  int dyadic_count() const { return static_cast<int>(dyadic.size()); }
  int nodal_count() const { return static_cast<int>(nodal.size()); }
};

/// Scalar l1 similarity, the default transfer function.
double l1_similarity_scalar(double x, double y);

/// Returns the dyadic form of `cov` for a network of n nodes. Dyadic input is
/// returned unchanged (after shape checks). The diagonal of transferred
/// matrices is zero.
CovariateSet transfer_covariates(const CovariateSet& cov, int n, bool directed);

/// Whether degrees(...) may silently treat missing dyads as absent.
enum class DegreeMode { RequireImputation, ObservedOnly };

/// D_i = sum_j of observed Y_ij, or of nu for missing dyads. `nu` is aligned
/// with adj.missing_dyads(). Directed networks use out-degrees.
Eigen::VectorXd degrees(const PartialAdjacency& adj,
                        std::optional<std::span<const double>> nu = std::nullopt,
                        DegreeMode mode = DegreeMode::RequireImputation);

}  // namespace missbm
