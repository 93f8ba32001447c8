#include "missbm/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "missbm/errors.hpp"

namespace missbm {

PartialAdjacency::PartialAdjacency(int n, bool directed, DyadValue fill) : n_(n), directed_(directed) {
  if (n < 0) throw InputError("node count must be non-negative");
  const std::size_t nn = static_cast<std::size_t>(n);
  const std::size_t count = nn < 2 ? 0 : (directed ? nn * (nn - 1) : nn * (nn - 1) / 2);
  entries_.assign(count, fill);
}

std::size_t PartialAdjacency::index(int i, int j) const {
  if (i < 0 || j < 0 || i >= n_ || j >= n_)
    throw InputError("dyad (" + std::to_string(i) + "," + std::to_string(j) + ") out of range");
  if (i == j) throw InputError("self-dyad (" + std::to_string(i) + "," + std::to_string(i) + ") is undefined");
  const std::size_t n = static_cast<std::size_t>(n_);
  if (directed_) {
    const std::size_t col = static_cast<std::size_t>(j < i ? j : j - 1);
    return static_cast<std::size_t>(i) * (n - 1) + col;
  }
  std::size_t a = static_cast<std::size_t>(std::min(i, j));
  std::size_t b = static_cast<std::size_t>(std::max(i, j));
  // offset of row a in the packed strict upper triangle
  return a * (2 * n - a - 1) / 2 + (b - a - 1);
}

PartialAdjacency PartialAdjacency::from_dense(const Eigen::MatrixXd& m, bool directed) {
  if (m.rows() != m.cols()) throw InputError("adjacency matrix must be square");
  const int n = static_cast<int>(m.rows());
  PartialAdjacency adj(n, directed);
  auto decode = [](double v, int i, int j) {
    if (std::isnan(v)) return DyadValue::Missing;
    if (v == 0.0) return DyadValue::Absent;
    if (v == 1.0) return DyadValue::Present;
    throw InputError("adjacency entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                     ") is not 0, 1 or NA");
  };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const DyadValue v = decode(m(i, j), i, j);
      if (!directed) {
        if (j < i) {
          if (adj.at(i, j) != v)
            throw InputError("undirected adjacency is not symmetric at (" + std::to_string(j + 1) + "," +
                             std::to_string(i + 1) + ")");
          continue;
        }
      }
      adj.set(i, j, v);
    }
  }
  return adj;
}

std::size_t PartialAdjacency::missing_count() const {
  return static_cast<std::size_t>(std::count(entries_.begin(), entries_.end(), DyadValue::Missing));
}

std::size_t PartialAdjacency::edge_count() const {
  return static_cast<std::size_t>(std::count(entries_.begin(), entries_.end(), DyadValue::Present));
}

std::vector<Dyad> PartialAdjacency::dyads() const {
  std::vector<Dyad> out;
  out.reserve(entries_.size());
  for (int i = 0; i < n_; ++i)
    for (int j = directed_ ? 0 : i + 1; j < n_; ++j)
      if (i != j) out.push_back({i, j});
  return out;
}

std::vector<Dyad> PartialAdjacency::missing_dyads() const {
  std::vector<Dyad> out;
  for (int i = 0; i < n_; ++i)
    for (int j = directed_ ? 0 : i + 1; j < n_; ++j)
      if (i != j && at(i, j) == DyadValue::Missing) out.push_back({i, j});
  return out;
}

Eigen::MatrixXd PartialAdjacency::observed_values() const {
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      if (i != j && at(i, j) == DyadValue::Present) y(i, j) = 1.0;
  return y;
}

Eigen::MatrixXd PartialAdjacency::observed_mask() const {
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      if (i != j && at(i, j) != DyadValue::Missing) r(i, j) = 1.0;
  return r;
}

Eigen::MatrixXd PartialAdjacency::to_dense() const {
  const double nan = std::nan("");
  Eigen::MatrixXd m(n_, n_);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      if (i == j) {
        m(i, j) = nan;
        continue;
      }
      switch (at(i, j)) {
        case DyadValue::Absent: m(i, j) = 0.0; break;
        case DyadValue::Present: m(i, j) = 1.0; break;
        case DyadValue::Missing: m(i, j) = nan; break;
      }
    }
  }
  return m;
}

Partition::Partition(std::vector<int> l, int q) : labels(std::move(l)), Q(q) {
  if (Q < 1) throw InputError("partition needs at least one block");
  for (int z : labels)
    if (z < 0 || z >= Q) throw InputError("block label " + std::to_string(z + 1) + " outside 1.." + std::to_string(Q));
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

double clamp_probability(double p) { return std::clamp(p, kProbFloor, 1.0 - kProbFloor); }

double l1_similarity_scalar(double x, double y) { return -std::abs(x - y); }

std::vector<double> l1_similarity(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw InputError("l1_similarity: length mismatch (" + std::to_string(x.size()) + " vs " +
                     std::to_string(y.size()) + ")");
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = l1_similarity_scalar(x[k], y[k]);
  return out;
}

CovariateSet transfer_covariates(const CovariateSet& cov, int n, bool directed) {
  CovariateSet out = cov;
  if (cov.kind == CovariateKind::Dyadic) {
    for (const auto& x : cov.dyadic) {
      if (x.rows() != n || x.cols() != n)
        throw InputError("dyadic covariate must be " + std::to_string(n) + "x" + std::to_string(n));
      if (!x.allFinite()) throw InputError("dyadic covariate has non-finite entries");
      if (!directed) {
        for (int i = 0; i < n; ++i)
          for (int j = i + 1; j < n; ++j)
            if (x(i, j) != x(j, i)) throw InputError("dyadic covariate of an undirected network must be symmetric");
      }
    }
    return out;
  }
  const Similarity phi = cov.similarity ? cov.similarity : Similarity(l1_similarity_scalar);
  out.kind = CovariateKind::Dyadic;
  out.dyadic.clear();
  for (const auto& x : cov.nodal) {
    if (x.size() != n)
      throw InputError("nodal covariate has length " + std::to_string(x.size()) + ", expected " + std::to_string(n));
    if (!x.allFinite()) throw InputError("nodal covariate has non-finite entries");
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) d(i, j) = phi(x(i), x(j));
    if (!d.allFinite()) throw InputError("similarity produced non-finite values");
    out.dyadic.push_back(std::move(d));
  }
  return out;
}

Eigen::VectorXd degrees(const PartialAdjacency& adj, std::optional<std::span<const double>> nu, DegreeMode mode) {
  const int n = adj.size();
  const std::size_t missing = adj.missing_count();
  if (missing > 0 && !nu && mode == DegreeMode::RequireImputation)
    throw InputError("degrees: missing dyads present but no imputation supplied");
  if (nu && nu->size() != missing)
    throw InputError("degrees: imputation has " + std::to_string(nu->size()) + " values for " +
                     std::to_string(missing) + " missing dyads");
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  std::size_t k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = adj.directed() ? 0 : i + 1; j < n; ++j) {
      if (i == j) continue;
      double v = 0.0;
      switch (adj.at(i, j)) {
        case DyadValue::Present: v = 1.0; break;
        case DyadValue::Absent: break;
        case DyadValue::Missing:
          v = nu ? (*nu)[k] : 0.0;
          ++k;
          break;
      }
      d(i) += v;
      if (!adj.directed()) d(j) += v;
    }
  }
  return d;
}

}  // namespace missbm
