#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "missbm/network.hpp"

namespace missbm {

struct KMeansResult {
  std::vector<int> labels;
  Eigen::MatrixXd centers;
  double inertia = 0.0;
};

/// Lloyd's algorithm with k-means++ seeding on the rows of `points`; the run
/// with the lowest inertia out of `restarts` is returned.
KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int restarts = 10,
                    int max_iter = 100);

/// Absolute-eigenvalue spectral clustering. Missing dyads count as absent and
/// directed networks are symmetrized before the eigendecomposition.
Partition spectral_init(const PartialAdjacency& adj, int Q, std::uint64_t seed);

}  // namespace missbm
