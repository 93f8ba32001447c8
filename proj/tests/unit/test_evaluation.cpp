#include <doctest.h>

#include <cmath>

#include "missbm/errors.hpp"
#include "support.hpp"

using namespace missbm;
using namespace testsupport;

namespace {

// Adjusted Rand index from explicit pair agreement counts.
double pair_count_ari(const std::vector<int>& a, const std::vector<int>& b) {
  double both = 0, only_a = 0, only_b = 0, pairs = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const bool sa = a[i] == a[j], sb = b[i] == b[j];
      both += sa && sb;
      only_a += sa;
      only_b += sb;
      pairs += 1;
    }
  const double expected = only_a * only_b / pairs;
  return (both - expected) / (0.5 * (only_a + only_b) - expected);
}

}  // namespace

TEST_CASE("adjusted rand index") {
  const std::vector<int> a{1, 1, 2, 2, 3}, b{1, 1, 1, 2, 2};
  CHECK(ari(a, b) == doctest::Approx(pair_count_ari(a, b)).epsilon(1e-14));
  CHECK(ari(a, a) == 1.0);
  CHECK(ari(a, std::vector<int>{7, 7, 0, 0, 4}) == doctest::Approx(1.0));
  CHECK(ari(std::vector<int>{0, 0, 0, 0, 0}, a) == 0.0);
  CHECK(ari(a, b) == ari(b, a));
  CHECK_THROWS_AS(ari(a, std::vector<int>{1, 2}), InputError);

  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    std::vector<int> x(30), y(30);
    for (int i = 0; i < 30; ++i) {
      x[static_cast<std::size_t>(i)] = static_cast<int>(rng.index(4));
      y[static_cast<std::size_t>(i)] = static_cast<int>(rng.index(3));
    }
    CHECK(ari(x, y) == doctest::Approx(pair_count_ari(x, y)).epsilon(1e-12));
  }
}

TEST_CASE("area under the curve") {
  const std::vector<int> truth{1, 0, 1, 0};
  CHECK(auc(truth, std::vector<double>{0.9, 0.8, 0.4, 0.1}) == 0.75);
  CHECK(auc(truth, std::vector<double>{0.9, 0.1, 0.8, 0.2}) == 1.0);
  CHECK(auc(truth, std::vector<double>{0.3, 0.3, 0.3, 0.3}) == 0.5);
  CHECK_THROWS_AS(auc(std::vector<int>{1, 1}, std::vector<double>{0.1, 0.2}), InputError);

  Rng rng(5);
  std::vector<int> t(40);
  std::vector<double> s(40), neg(40);
  for (int i = 0; i < 40; ++i) {
    t[static_cast<std::size_t>(i)] = i % 2;
    s[static_cast<std::size_t>(i)] = rng.uniform();
    neg[static_cast<std::size_t>(i)] = -s[static_cast<std::size_t>(i)];
  }
  CHECK(auc(t, s) + auc(t, neg) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("sweep flags replicates with nothing to impute") {
  ExperimentSpec spec;
  spec.generator = planted(2, 0.5, 0.1);
  spec.n = 30;
  spec.tag = SamplingTag::BlockNode;
  spec.psi_low = 1.0;
  spec.psi_high = 1.0;
  spec.replicates = 2;
  const auto rows = run_auc_sweep(spec);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.status == "no-missing");
    CHECK(r.rate == 1.0);
    CHECK(std::isnan(r.auc));
  }
}

TEST_CASE("sweeps are reproducible") {
  ExperimentSpec spec;
  spec.generator = planted(2, 0.5, 0.05);
  spec.n = 40;
  spec.replicates = 4;
  spec.seed = 9;
  ExperimentSpec threaded = spec;
  threaded.control.threads = 3;
  const auto a = run_auc_sweep(spec);
  const auto b = run_auc_sweep(threaded);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].rate == b[k].rate);
    CHECK(a[k].status == b[k].status);
    if (a[k].status == "ok") CHECK(a[k].auc == b[k].auc);
  }
  ExperimentSpec bad = spec;
  bad.replicates = 0;
  CHECK_THROWS_AS(bad.validate(), InputError);
}

TEST_CASE("design comparison") {
  const auto [g, z] = sample_network(planted(2, 0.5, 0.05), 50, nullptr, 1);
  auto net = ObservedNetwork::make(observe_network(g, DyadSampling{0.7}, nullptr, nullptr, 2));
  ControlOptions c;
  const DesignComparison one = compare_designs(net, {SamplingTag::Dyad}, {2}, c);
  CHECK(one.rows.size() == 1);

  // Two MCAR designs share the SBM part of the fit.
  ControlOptions none;
  none.exploration = Exploration::None;
  const DesignComparison two = compare_designs(net, {SamplingTag::Dyad, SamplingTag::Node}, {2}, none);
  REQUIRE(two.rows.size() == 2);
  const FitResult& d = two.collections[0]->models[0];
  const FitResult& n = two.collections[1]->models[0];
  const Objective od = objective(*net, d.design, d.sbm, d.state);
  const Objective on = objective(*net, n.design, n.sbm, n.state);
  CHECK(od.sbm == doctest::Approx(on.sbm).epsilon(1e-12));
  CHECK(two.rows[0].icl - two.rows[1].icl ==
        doctest::Approx(-2 * (od.sampling - on.sampling) + d.penalty - n.penalty).epsilon(1e-10));

  const DesignComparison failing = compare_designs(net, {SamplingTag::CovarNode, SamplingTag::Dyad}, {1}, c);
  CHECK(failing.failures.size() == 1);
  CHECK(failing.best() == SamplingTag::Dyad);
}

TEST_CASE("heterogeneous block-node sampling is preferred") {
  int wins = 0;
  SbmParams gen = planted(2, 0.5, 0.05);
  ControlOptions c;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto [g, z] = sample_network(gen, 80, nullptr, derive_seed(20, s));
    auto net = ObservedNetwork::make(
        observe_network(g, BlockNodeSampling{Eigen::Vector2d(0.9, 0.2)}, &z, nullptr, derive_seed(21, s)));
    const DesignComparison cmp =
        compare_designs(net, {SamplingTag::Dyad, SamplingTag::Node, SamplingTag::BlockNode}, {1, 2, 3}, c);
    wins += cmp.best() == SamplingTag::BlockNode;
  }
  CHECK(wins >= 7);
}
