#include "missbm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "missbm/errors.hpp"
#include "missbm/parallel.hpp"
#include "missbm/rng.hpp"
#include "missbm/spectral.hpp"

namespace missbm {

namespace {

double choose2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

double ari(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size())
    throw InputError("ari: partitions have " + std::to_string(a.size()) + " and " + std::to_string(b.size()) + " labels");
  const std::size_t n = a.size();
  std::map<std::pair<int, int>, double> cells;
  std::map<int, double> rows, cols;
  for (std::size_t k = 0; k < n; ++k) {
    cells[{a[k], b[k]}] += 1.0;
    rows[a[k]] += 1.0;
    cols[b[k]] += 1.0;
  }
  double index = 0.0, sa = 0.0, sb = 0.0;
  for (const auto& [key, c] : cells) index += choose2(c);
  for (const auto& [key, c] : rows) sa += choose2(c);
  for (const auto& [key, c] : cols) sb += choose2(c);
  const double pairs = choose2(static_cast<double>(n));
  if (pairs == 0.0) return 1.0;
  const double expected = sa * sb / pairs;
  const double top = 0.5 * (sa + sb);
  if (top == expected) return cells.size() == rows.size() && cells.size() == cols.size() ? 1.0 : 0.0;
  return (index - expected) / (top - expected);
}

double auc(std::span<const int> truth, std::span<const double> scores) {
  if (truth.size() != scores.size()) throw InputError("auc: truth and scores differ in length");
  std::vector<std::size_t> order(truth.size());
  std::iota(order.begin(), order.end(), 0);
  for (double s : scores)
    if (std::isnan(s)) throw InputError("auc: NaN score");
  std::stable_sort(order.begin(), order.end(), [&](std::size_t u, std::size_t v) { return scores[u] < scores[v]; });
  double positives = 0.0, negatives = 0.0, rank_sum = 0.0;
  for (std::size_t k = 0; k < order.size();) {
    std::size_t end = k;
    while (end < order.size() && scores[order[end]] == scores[order[k]]) ++end;
    const double mid_rank = 0.5 * static_cast<double>(k + 1 + end);
    for (std::size_t t = k; t < end; ++t) {
      const int y = truth[order[t]];
      if (y != 0 && y != 1) throw InputError("auc: truth must be 0/1");
      if (y == 1) {
        positives += 1.0;
        rank_sum += mid_rank;
      } else {
        negatives += 1.0;
      }
    }
    k = end;
  }
  if (positives == 0.0 || negatives == 0.0) throw InputError("auc needs both classes in the truth");
  return (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

void ExperimentSpec::validate() const {
  generator.validate();
  control.validate();
  if (replicates < 1) throw InputError("replicate count must be at least 1");
  if (n < 2) throw InputError("sweep networks need at least two nodes");
  if (!(psi_low >= 0.0 && psi_low <= psi_high && psi_high <= 1.0))
    throw InputError("sampling parameter range must satisfy 0 <= low <= high <= 1");
  if (tag != SamplingTag::BlockNode && tag != SamplingTag::Node && tag != SamplingTag::Dyad)
    throw InputError("sweeps support block-node, node and dyad sampling");
  if (generator.variant != SbmVariant::Plain) throw InputError("sweeps use a plain SBM generator");
}

std::vector<SweepRow> run_auc_sweep(const ExperimentSpec& spec) {
  spec.validate();
  const int fit_q = spec.fit_q > 0 ? spec.fit_q : spec.generator.Q;
  std::vector<SweepRow> rows(static_cast<std::size_t>(spec.replicates));
  ControlOptions inner = spec.control;
  inner.threads = 1;
  parallel_for(rows.size(), spec.control.threads, [&](std::size_t r) {
    SweepRow& row = rows[r];
    row.replicate = static_cast<int>(r) + 1;
    row.auc = std::numeric_limits<double>::quiet_NaN();
    const std::uint64_t base = derive_seed(spec.seed, r);
    try {
      auto [full, truth] = sample_network(spec.generator, spec.n, nullptr, derive_seed(base, 1));
      Rng rng(derive_seed(base, 2));
      auto draw = [&] { return spec.psi_low + (spec.psi_high - spec.psi_low) * rng.uniform(); };
      SamplingDesign design;
      if (spec.tag == SamplingTag::BlockNode) {
        Eigen::VectorXd psi(spec.generator.Q);
        for (int q = 0; q < spec.generator.Q; ++q) psi(q) = draw();
        design = BlockNodeSampling{psi};
      } else if (spec.tag == SamplingTag::Node) {
        design = NodeSampling{draw()};
      } else {
        design = DyadSampling{draw()};
      }
      PartialAdjacency seen = observe_network(full, design, &truth, nullptr, derive_seed(base, 3));
      row.missing = seen.missing_count();
      row.rate = 1.0 - static_cast<double>(row.missing) / static_cast<double>(seen.dyad_count());
      if (row.missing == 0) {
        row.status = "no-missing";
        return;
      }
      auto net = ObservedNetwork::make(std::move(seen));
      const Partition init = spectral_init(net->adjacency, fit_q, derive_seed(base, 4));
      const FitResult fit = fit_single(net, fit_q, spec.tag, init, inner);
      const Eigen::MatrixXd imputed = impute(fit);
      std::vector<int> labels;
      std::vector<double> scores;
      for (const auto [i, j] : net->missing) {
        labels.push_back(full.at(i, j) == DyadValue::Present ? 1 : 0);
        scores.push_back(imputed(i, j));
      }
      const auto pos = std::count(labels.begin(), labels.end(), 1);
      if (pos == 0 || pos == static_cast<long>(labels.size())) {
        row.status = "single-class";
        return;
      }
      row.auc = auc(labels, scores);
      row.status = "ok";
    } catch (const std::exception& e) {
      row.status = std::string("error: ") + e.what();
    }
  });
  return rows;
}

std::optional<SamplingTag> DesignComparison::best() const {
  std::optional<SamplingTag> tag;
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& c : collections) {
    if (!c) continue;
    const double v = c->best().icl;
    if (v < lowest) {
      lowest = v;
      tag = c->best().tag();
    }
  }
  return tag;
}

DesignComparison compare_designs(std::shared_ptr<const ObservedNetwork> net, const std::vector<SamplingTag>& designs,
                                 const std::vector<int>& blocks, const ControlOptions& control) {
  control.validate();
  DesignComparison out;
  out.collections.resize(designs.size());
  std::vector<std::string> errors(designs.size());
  ControlOptions inner = control;
  inner.threads = 1;
  parallel_for(designs.size(), control.threads, [&](std::size_t k) {
    try {
      out.collections[k] = estimate_miss_sbm(net, blocks, designs[k], inner);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  });
  for (std::size_t k = 0; k < designs.size(); ++k) {
    if (!out.collections[k]) {
      out.failures.emplace_back(designs[k], errors[k]);
      continue;
    }
    const auto& c = *out.collections[k];
    for (std::size_t m = 0; m < c.models.size(); ++m) out.rows.push_back({designs[k], c.blocks[m], c.models[m].icl});
  }
  return out;
}

}  // namespace missbm
