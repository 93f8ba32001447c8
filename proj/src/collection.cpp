#include "missbm/collection.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <tuple>

#include "missbm/errors.hpp"
#include "missbm/parallel.hpp"
#include "missbm/rng.hpp"
#include "missbm/spectral.hpp"

namespace missbm {

namespace {

constexpr std::uint64_t kSplitStream = 0x5b11;

std::vector<int> split_block(const FitResult& fit, int block, std::uint64_t seed) {
  std::vector<int> labels = fit.memberships();
  std::vector<int> members;
  for (int i = 0; i < static_cast<int>(labels.size()); ++i)
    if (labels[static_cast<std::size_t>(i)] == block) members.push_back(i);
  const int newcomer = fit.Q;
  const auto s = static_cast<Eigen::Index>(members.size());

  Eigen::MatrixXd y = impute(fit);
  y.diagonal().setZero();
  Eigen::MatrixXd rows(s, s);
  for (Eigen::Index a = 0; a < s; ++a)
    for (Eigen::Index b = 0; b < s; ++b)
      rows(a, b) = y(members[static_cast<std::size_t>(a)], members[static_cast<std::size_t>(b)]);

  std::vector<int> side(static_cast<std::size_t>(s), 0);
  bool degenerate = true;
  for (Eigen::Index a = 1; a < s && degenerate; ++a) degenerate = rows.row(a) == rows.row(0);
  if (!degenerate) {
    side = kmeans(rows, 2, seed).labels;
    const auto ones = std::count(side.begin(), side.end(), 1);
    degenerate = ones == 0 || ones == s;
  }
  if (degenerate)
    for (Eigen::Index a = 0; a < s; ++a) side[static_cast<std::size_t>(a)] = static_cast<int>(a % 2);
  for (Eigen::Index a = 0; a < s; ++a)
    if (side[static_cast<std::size_t>(a)] == 1) labels[static_cast<std::size_t>(members[static_cast<std::size_t>(a)])] = newcomer;
  return labels;
}

Eigen::MatrixXd connectivity(const SbmParams& p) {
  return p.variant == SbmVariant::Plain ? p.pi : p.gamma;
}

std::vector<std::pair<int, int>> merge_order(const FitResult& fit, int budget) {
  const Eigen::MatrixXd c = connectivity(fit.sbm);
  std::vector<std::tuple<double, int, int>> pairs;
  for (int a = 0; a < fit.Q; ++a)
    for (int b = a + 1; b < fit.Q; ++b) pairs.emplace_back((c.row(a) - c.row(b)).norm(), a, b);
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const auto& u, const auto& v) { return std::get<0>(u) < std::get<0>(v); });
  std::vector<std::pair<int, int>> out;
  for (const auto& [d, a, b] : pairs) {
    if (static_cast<int>(out.size()) >= budget) break;
    out.emplace_back(a, b);
  }
  return out;
}

std::vector<int> merge_blocks(std::vector<int> labels, int a, int b) {
  for (int& z : labels) {
    if (z == b) z = a;
    else if (z > b) --z;
  }
  return labels;
}

// Fits every candidate and installs the best one if it beats the current ICL.
void try_candidates(FitCollection& collection, std::size_t slot, const std::vector<std::vector<int>>& candidates,
                    SamplingTag tag, const ControlOptions& control) {
  if (candidates.empty()) return;
  const int Q = collection.blocks[slot];
  std::vector<std::optional<FitResult>> fits(candidates.size());
  parallel_for(candidates.size(), control.threads, [&](std::size_t k) {
    fits[k] = fit_single(collection.models[slot].network, Q, tag, Partition(candidates[k], Q), control);
  });
  std::size_t best = candidates.size();
  double best_icl = collection.models[slot].icl;
  for (std::size_t k = 0; k < fits.size(); ++k) {
    if (fits[k]->icl < best_icl) {
      best_icl = fits[k]->icl;
      best = k;
    }
  }
  if (best < fits.size()) collection.models[slot] = std::move(*fits[best]);
}

}  // namespace

Eigen::VectorXd FitCollection::icl() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(models.size()));
  for (std::size_t k = 0; k < models.size(); ++k) v(static_cast<Eigen::Index>(k)) = models[k].icl;
  return v;
}

std::size_t FitCollection::best_index() const {
  if (models.empty()) throw InputError("empty model collection");
  std::size_t best = 0;
  for (std::size_t k = 1; k < models.size(); ++k)
    if (models[k].icl < models[best].icl) best = k;
  return best;
}

const FitResult& FitCollection::at_q(int Q) const {
  for (std::size_t k = 0; k < blocks.size(); ++k)
    if (blocks[k] == Q) return models[k];
  throw InputError("no model with Q = " + std::to_string(Q));
}

std::vector<int> normalize_blocks(std::vector<int> blocks) {
  if (blocks.empty()) throw InputError("block grid is empty");
  for (int q : blocks)
    if (q < 1) throw InputError("block counts must be at least 1");
  std::sort(blocks.begin(), blocks.end());
  blocks.erase(std::unique(blocks.begin(), blocks.end()), blocks.end());
  return blocks;
}

FitCollection estimate_miss_sbm(std::shared_ptr<const ObservedNetwork> net, std::vector<int> blocks, SamplingTag tag,
                                const ControlOptions& control, const std::map<int, Partition>* inits) {
  control.validate();
  if (!net) throw InputError("no network");
  FitCollection out;
  out.blocks = normalize_blocks(std::move(blocks));
  if (out.blocks.back() > net->size())
    throw InputError("Q = " + std::to_string(out.blocks.back()) + " exceeds the number of nodes");
  // fail early on covariate requirements rather than once per Q
  (void)initial_design(tag, 1, net->covariates.dyadic_count(), net->covariates.nodal_count());

  std::vector<std::optional<FitResult>> fits(out.blocks.size());
  parallel_for(out.blocks.size(), control.threads, [&](std::size_t k) {
    const int Q = out.blocks[k];
    Partition init;
    if (inits && inits->count(Q)) init = inits->at(Q);
    else init = spectral_init(net->adjacency, Q, derive_seed(control.seed, static_cast<std::uint64_t>(Q)));
    fits[k] = fit_single(net, Q, tag, init, control);
  });
  for (auto& f : fits) out.models.push_back(std::move(*f));
  run_exploration(out, control);
  return out;
}

void explore(FitCollection& collection, Direction direction, const ControlOptions& control) {
  if (collection.models.empty()) return;
  const SamplingTag tag = collection.models.front().tag();
  const std::size_t count = collection.blocks.size();
  auto index_of = [&](int Q) -> std::optional<std::size_t> {
    for (std::size_t k = 0; k < count; ++k)
      if (collection.blocks[k] == Q) return k;
    return std::nullopt;
  };

  if (direction == Direction::Forward) {
    for (std::size_t slot = 0; slot < count; ++slot) {
      const int Q = collection.blocks[slot];
      const auto source = index_of(Q - 1);
      if (!source) continue;
      const FitResult& smaller = collection.models[*source];
      const std::vector<int> labels = smaller.memberships();
      std::vector<std::vector<int>> candidates;
      for (int b = 0; b < smaller.Q; ++b) {
        if (std::count(labels.begin(), labels.end(), b) < 2) continue;
        const std::uint64_t seed =
            derive_seed(derive_seed(control.seed, static_cast<std::uint64_t>(Q)), kSplitStream + static_cast<std::uint64_t>(b));
        candidates.push_back(split_block(smaller, b, seed));
      }
      try_candidates(collection, slot, candidates, tag, control);
    }
    return;
  }
  for (std::size_t slot = count; slot-- > 0;) {
    const int Q = collection.blocks[slot];
    const auto source = index_of(Q + 1);
    if (!source) continue;
    const FitResult& larger = collection.models[*source];
    const int budget = control.merge_budget < 0 ? Q + 1 : control.merge_budget;
    std::vector<std::vector<int>> candidates;
    for (const auto& [a, b] : merge_order(larger, budget)) candidates.push_back(merge_blocks(larger.memberships(), a, b));
    try_candidates(collection, slot, candidates, tag, control);
  }
}

void run_exploration(FitCollection& collection, const ControlOptions& control) {
  switch (control.exploration) {
    case Exploration::None: return;
    case Exploration::Forward: explore(collection, Direction::Forward, control); return;
    case Exploration::Backward: explore(collection, Direction::Backward, control); return;
    case Exploration::Both:
      for (int r = 0; r < control.iterates; ++r) {
        explore(collection, Direction::Forward, control);
        explore(collection, Direction::Backward, control);
      }
      return;
  }
}

}  // namespace missbm
