#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "missbm/collection.hpp"
#include "missbm/sampling.hpp"
#include "missbm/sbm.hpp"

namespace missbm {

/// Adjusted Rand index between two labelings of the same nodes.
double ari(std::span<const int> a, std::span<const int> b);

/// Probability that a random positive outscores a random negative, ties
/// counting one half. Throws InputError unless both classes are present.
double auc(std::span<const int> truth, std::span<const double> scores);

/// Simulation protocol for the imputation sweep: per replicate a network is
/// drawn from `generator`, observed under `tag` with sampling parameters drawn
/// uniformly in [psi_low, psi_high] (one per block for block-node), fitted at
/// Q = `fit_q` and imputed. The reported rate is the realized fraction of
/// observed dyads.
struct ExperimentSpec {
  SbmParams generator;
  int n = 100;
  SamplingTag tag = SamplingTag::BlockNode;
  double psi_low = 0.0;
  double psi_high = 1.0;
  int replicates = 1;
  int fit_q = 0;  ///< 0: use generator.Q
  ControlOptions control;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SweepRow {
  int replicate = 0;
  double rate = 0.0;  ///< observed fraction of dyads
  std::size_t missing = 0;
  double auc = 0.0;   ///< NaN when the row is flagged
  std::string status; ///< "ok", "no-missing", "single-class" or an error message
};

std::vector<SweepRow> run_auc_sweep(const ExperimentSpec& spec);

struct DesignIclRow {
  SamplingTag tag;
  int Q = 0;
  double icl = 0.0;
};

struct DesignComparison {
  std::vector<DesignIclRow> rows;
  std::vector<std::pair<SamplingTag, std::string>> failures;
  std::vector<std::optional<FitCollection>> collections;  ///< aligned with the requested designs

  /// Design of the overall lowest ICL (first design on ties).
  std::optional<SamplingTag> best() const;
};

/// One estimate per design on the same observed network; a design that fails
/// is reported and skipped.
DesignComparison compare_designs(std::shared_ptr<const ObservedNetwork> net, const std::vector<SamplingTag>& designs,
                                 const std::vector<int>& blocks, const ControlOptions& control);

}  // namespace missbm
