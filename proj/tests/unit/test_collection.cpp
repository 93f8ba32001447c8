#include <doctest.h>

#include <map>

#include "missbm/errors.hpp"
#include "support.hpp"

using namespace missbm;
using namespace testsupport;

TEST_CASE("block grids") {
  CHECK(normalize_blocks({4, 2, 2, 3}) == std::vector<int>{2, 3, 4});
  CHECK_THROWS_AS(normalize_blocks({0, 1}), InputError);
  CHECK_THROWS_AS(normalize_blocks({}), InputError);
}

TEST_CASE("single block count") {
  auto net = ObservedNetwork::make(sample_network(planted(2, 0.5, 0.1), 30, nullptr, 1).first);
  ControlOptions c;
  const FitCollection col = estimate_miss_sbm(net, {1}, SamplingTag::Dyad, c);
  REQUIRE(col.models.size() == 1);
  CHECK(&col.best() == &col.models[0]);
}

TEST_CASE("exploration never raises an ICL and none leaves the fits alone") {
  const auto [g, z] = sample_network(planted(3, 0.4, 0.05), 60, nullptr, 2);
  auto net = ObservedNetwork::make(observe_network(g, NodeSampling{0.8}, nullptr, nullptr, 3));
  ControlOptions none;
  none.exploration = Exploration::None;
  const FitCollection before = estimate_miss_sbm(net, {1, 2, 3, 4}, SamplingTag::Node, none);
  FitCollection after = before;
  run_exploration(after, none);
  CHECK(after.icl() == before.icl());
  ControlOptions both;
  run_exploration(after, both);
  CHECK(((after.icl() - before.icl()).array() <= 0.0).all());
}

TEST_CASE("exploration repairs a bad initialization") {
  const auto [g, z] = sample_network(planted(3, 0.5, 0.05), 90, nullptr, 4);
  auto net = ObservedNetwork::make(g);
  std::map<int, Partition> inits;
  std::vector<int> bad(90);
  for (int i = 0; i < 90; ++i) bad[static_cast<std::size_t>(i)] = i % 3;
  inits.emplace(3, Partition(bad, 3));
  ControlOptions none;
  none.exploration = Exploration::None;
  const FitCollection before = estimate_miss_sbm(net, {2, 3, 4}, SamplingTag::Dyad, none, &inits);
  FitCollection after = before;
  ControlOptions both;
  run_exploration(after, both);
  CHECK(after.at_q(3).icl < before.at_q(3).icl);
}

TEST_CASE("bound after exploration grows with the number of blocks") {
  const auto [g, z] = sample_network(planted(3, 0.4, 0.05), 80, nullptr, 5);
  auto net = ObservedNetwork::make(g);
  const FitCollection col = estimate_miss_sbm(net, {1, 2, 3, 4, 5}, SamplingTag::Dyad, ControlOptions{});
  for (std::size_t k = 1; k < col.models.size(); ++k)
    CHECK(col.models[k].elbo_trace.back() >= col.models[k - 1].elbo_trace.back() - 1e-6);
}

TEST_CASE("collections do not depend on the worker count") {
  const auto [g, z] = sample_network(planted(3, 0.4, 0.05), 60, nullptr, 6);
  auto net = ObservedNetwork::make(observe_network(g, DoubleStandardSampling{0.8, 0.4}, nullptr, nullptr, 7));
  ControlOptions one, four;
  four.threads = 4;
  const FitCollection a = estimate_miss_sbm(net, {1, 2, 3, 4}, SamplingTag::DoubleStandard, one);
  const FitCollection b = estimate_miss_sbm(net, {1, 2, 3, 4}, SamplingTag::DoubleStandard, four);
  CHECK(a.icl() == b.icl());
  for (std::size_t k = 0; k < a.models.size(); ++k) CHECK(a.models[k].state.tau == b.models[k].state.tau);
}

TEST_CASE("ties go to the smallest block count") {
  FitCollection c;
  for (int q : {1, 2, 3}) {
    FitResult f;
    f.Q = q;
    f.icl = q == 1 ? 5.0 : 4.0;
    c.blocks.push_back(q);
    c.models.push_back(f);
  }
  CHECK(c.best().Q == 2);
}

TEST_CASE("spectral initialization") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(8, 8);
  m.topLeftCorner(4, 4).setOnes();
  m.bottomRightCorner(4, 4).setOnes();
  const PartialAdjacency cliques = PartialAdjacency::from_dense(m, false);
  const Partition p = spectral_init(cliques, 2, 1);
  CHECK(ari(p.labels, std::vector<int>{0, 0, 0, 0, 1, 1, 1, 1}) == 1.0);
  CHECK(spectral_init(cliques, 1, 1).labels == std::vector<int>(8, 0));
  CHECK_THROWS_AS(spectral_init(cliques, 9, 1), InputError);

  int good = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto [g, z] = sample_network(planted(3, 0.5, 0.03), 150, nullptr, s);
    good += ari(spectral_init(g, 3, s).labels, z.labels) >= 0.95;
  }
  CHECK(good >= 19);
}
