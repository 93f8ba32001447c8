#include "missbm/spectral.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "missbm/errors.hpp"
#include "missbm/rng.hpp"

namespace missbm {

namespace {

KMeansResult lloyd(const Eigen::MatrixXd& x, int k, Rng& rng, int max_iter) {
  const Eigen::Index n = x.rows();
  KMeansResult res;
  res.centers.resize(k, x.cols());
  // k-means++ seeding
  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  res.centers.row(0) = x.row(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n))));
  for (int c = 1; c < k; ++c) {
    for (Eigen::Index i = 0; i < n; ++i)
      d2[static_cast<std::size_t>(i)] =
          std::min(d2[static_cast<std::size_t>(i)], (x.row(i) - res.centers.row(c - 1)).squaredNorm());
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    const std::size_t pick = total > 0.0 ? rng.categorical(d2) : rng.index(static_cast<std::size_t>(n));
    res.centers.row(c) = x.row(static_cast<Eigen::Index>(pick));
  }

  res.labels.assign(static_cast<std::size_t>(n), -1);
  std::vector<double> dist(static_cast<std::size_t>(n));
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (x.row(i) - res.centers.row(c)).squaredNorm();
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      dist[static_cast<std::size_t>(i)] = bd;
      if (res.labels[static_cast<std::size_t>(i)] != best) {
        res.labels[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    std::vector<int> size(static_cast<std::size_t>(k), 0);
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = res.labels[static_cast<std::size_t>(i)];
      sums.row(c) += x.row(i);
      ++size[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c) {
      if (size[static_cast<std::size_t>(c)] > 0) {
        res.centers.row(c) = sums.row(c) / size[static_cast<std::size_t>(c)];
        continue;
      }
      // empty cluster: move its center to the worst-fitted point
      const auto far = std::max_element(dist.begin(), dist.end()) - dist.begin();
      res.centers.row(c) = x.row(far);
      res.labels[static_cast<std::size_t>(far)] = c;
      dist[static_cast<std::size_t>(far)] = 0.0;
      changed = true;
    }
    if (!changed) break;
  }
  res.inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    res.inertia += (x.row(i) - res.centers.row(res.labels[static_cast<std::size_t>(i)])).squaredNorm();
  return res;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int restarts, int max_iter) {
  if (k < 1) throw InputError("k-means needs k >= 1");
  if (points.rows() < k)
    throw InputError("k-means: " + std::to_string(k) + " clusters for " + std::to_string(points.rows()) + " points");
  Rng rng(seed);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(restarts, 1); ++r) {
    KMeansResult run = lloyd(points, k, rng, max_iter);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

Partition spectral_init(const PartialAdjacency& adj, int Q, std::uint64_t seed) {
  const int n = adj.size();
  if (Q < 1) throw InputError("spectral init needs Q >= 1");
  if (Q > n) throw InputError("cannot form " + std::to_string(Q) + " blocks from " + std::to_string(n) + " nodes");
  if (Q == 1) return Partition(std::vector<int>(static_cast<std::size_t>(n), 0), 1);

  Eigen::MatrixXd a = adj.observed_values();
  a = 0.5 * (a + a.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed in spectral init");
  const Eigen::VectorXd& values = eig.eigenvalues();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index u, Eigen::Index v) {
    return std::abs(values(u)) > std::abs(values(v));
  });
  Eigen::MatrixXd embedding(n, Q);
  for (int c = 0; c < Q; ++c) {
    Eigen::VectorXd v = eig.eigenvectors().col(order[static_cast<std::size_t>(c)]);
    // fix the sign so that the embedding does not depend on the solver's choice
    Eigen::Index pivot = 0;
    v.cwiseAbs().maxCoeff(&pivot);
    if (v(pivot) < 0.0) v = -v;
    embedding.col(c) = v;
  }
  return Partition(kmeans(embedding, Q, seed).labels, Q);
}

}  // namespace missbm
