#pragma once

#include <map>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "missbm/vem.hpp"

namespace missbm {

/// Fits over a range of block counts, sorted by Q.
struct FitCollection {
  std::vector<int> blocks;
  std::vector<FitResult> models;

  Eigen::VectorXd icl() const;
  /// Index of the lowest ICL; ties go to the smallest Q.
  std::size_t best_index() const;
  const FitResult& best() const { return models.at(best_index()); }
  const FitResult& at_q(int Q) const;
};

/// Block-count grid from a list; duplicates removed, sorted, each >= 1.
std::vector<int> normalize_blocks(std::vector<int> blocks);

/// One fit per Q from spectral initializations (or the partition given in
/// `inits` for that Q), followed by the exploration set in `control`.
FitCollection estimate_miss_sbm(std::shared_ptr<const ObservedNetwork> net, std::vector<int> blocks, SamplingTag tag,
                                const ControlOptions& control, const std::map<int, Partition>* inits = nullptr);

enum class Direction { Forward, Backward };

/// Split (forward) or merge (backward) re-initializations; each entry is only
/// ever replaced by a fit with a strictly lower ICL.
void explore(FitCollection& collection, Direction direction, const ControlOptions& control);

/// Runs the passes requested by control.exploration.
void run_exploration(FitCollection& collection, const ControlOptions& control);

}  // namespace missbm
