#include <doctest.h>

#include <cmath>

#include "missbm/errors.hpp"
#include "support.hpp"

using namespace missbm;
using namespace testsupport;

TEST_CASE("penalty formulas") {
  CHECK(icl_penalty(100, 2, 1, Centering::Dyad, false, 0) == doctest::Approx(4 * std::log(4950.0) + std::log(100.0)));
  CHECK(icl_penalty(100, 2, 1, Centering::Dyad, false, 0) == doctest::Approx(38.634).epsilon(1e-4));
  CHECK(icl_penalty(100, 1, 1, Centering::Node, false, 0) == doctest::Approx(std::log(4950.0) + std::log(100.0)));
  CHECK(icl_penalty(50, 3, 2, Centering::Dyad, true, 0) == doctest::Approx(11 * std::log(2450.0) + 2 * std::log(50.0)));
  CHECK(icl_penalty(50, 2, 1, Centering::Dyad, false, 2) -
            icl_penalty(50, 2, 1, Centering::Dyad, false, 0) ==
        doctest::Approx(2 * std::log(1225.0)));
}

TEST_CASE("softened initialization") {
  const Eigen::MatrixXd tau = soften(Partition({0, 2, 1}, 3));
  CHECK(tau(0, 0) == doctest::Approx(1 - 2e-3));
  CHECK(tau(0, 1) == doctest::Approx(1e-3));
  CHECK((tau.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-15);
  CHECK(soften(Partition({0, 0}, 1)).isOnes());
}

TEST_CASE("one block sets tau to one") {
  auto net = ObservedNetwork::make(sample_network(planted(1, 0.3, 0.3), 10, nullptr, 1).first);
  VariationalState st{Eigen::MatrixXd::Constant(10, 1, 0.2), {}};
  ve_step(*net, DyadSampling{0.5}, planted(1, 0.3, 0.3), st, 3);
  CHECK(st.tau.isOnes());
}

TEST_CASE("double standard posterior with one block") {
  PartialAdjacency g = sample_network(planted(1, 0.5, 0.5), 10, nullptr, 3).first;
  const auto all = g.dyads();
  for (std::size_t k = 0; k < all.size(); k += 3) g.set(all[k].i, all[k].j, DyadValue::Missing);
  auto net = ObservedNetwork::make(g);
  VariationalState st{Eigen::MatrixXd::Ones(10, 1), std::vector<double>(net->missing.size(), 0.9)};
  ve_step(*net, DoubleStandardSampling{0.8, 0.2}, planted(1, 0.5, 0.5), st, 1);
  for (double v : st.nu) CHECK(v == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("one block converges at once to the observed density") {
  const auto [g, z] = sample_network(planted(1, 0.2, 0.2), 40, nullptr, 5);
  auto net = ObservedNetwork::make(g);
  const FitResult fit = fit_single(net, 1, SamplingTag::Dyad, Partition(std::vector<int>(40, 0), 1), ControlOptions{});
  CHECK(fit.converged);
  CHECK(fit.monitoring.size() - 1 <= 2);
  CHECK(fit.sbm.pi(0, 0) == doctest::Approx(static_cast<double>(g.edge_count()) / 780.0).epsilon(1e-12));
  CHECK(fit.sbm.alpha(0) == 1.0);
  const double p = fit.sbm.pi(0, 0);
  const double e = static_cast<double>(g.edge_count());
  // Erdos-Renyi likelihood plus the log 1 of certain observation.
  CHECK(fit.elbo_trace.back() == doctest::Approx(e * std::log(p) + (780 - e) * std::log1p(-p)).epsilon(1e-10));
}

TEST_CASE("well separated planted blocks are recovered exactly") {
  const auto [g, z] = sample_network(planted(2, 0.9, 0.1), 100, nullptr, 6);
  auto net = ObservedNetwork::make(g);
  const FitResult fit = spectral_fit(net, 2, SamplingTag::Dyad, ControlOptions{}, 7);
  CHECK(ari(fit.memberships(), z.labels) == 1.0);
}

TEST_CASE("bound increases and fits are reproducible for every design") {
  for (auto tag : kAllSamplings) {
    CAPTURE(to_string(tag));
    const auto [g, z] = sample_network(planted(2, 0.4, 0.05), 40, nullptr, 8);
    CovariateSet cov;
    if (tag == SamplingTag::CovarDyad || tag == SamplingTag::CovarNode) {
      cov.kind = CovariateKind::Nodal;
      Eigen::VectorXd x(40);
      for (int i = 0; i < 40; ++i) x(i) = i % 3;
      cov.nodal.push_back(x);
    }
    SamplingDesign d = initial_design(tag, 2, 1, 1);
    if (auto* s = std::get_if<SnowballSampling>(&d)) s->rate = 0.1;
    const PartialAdjacency seen = observe_network(g, d, &z, cov.empty() ? nullptr : &cov, 9);
    auto net = ObservedNetwork::make(seen, cov);
    ControlOptions c;
    c.threshold = 1e-6;
    const FitResult a = spectral_fit(net, 2, tag, c, 10);
    const FitResult b = spectral_fit(net, 2, tag, c, 10);
    CHECK(worst_step(a.elbo_trace) >= -1e-8);
    CHECK(a.elbo_trace == b.elbo_trace);
    CHECK(a.state.tau == b.state.tau);
    CHECK(a.icl == doctest::Approx(-2 * a.vexpec + a.penalty));
  }
}

TEST_CASE("relabelling the initialization permutes the fit") {
  const auto [g, z] = sample_network(planted(3, 0.4, 0.08), 60, nullptr, 11);
  PartialAdjacency seen = observe_network(g, DoubleStandardSampling{0.8, 0.5}, nullptr, nullptr, 12);
  auto net = ObservedNetwork::make(seen);
  const Partition init = spectral_init(net->adjacency, 3, 13);
  const std::vector<int> perm{2, 0, 1};
  std::vector<int> relabelled(init.labels.size());
  for (std::size_t i = 0; i < relabelled.size(); ++i) relabelled[i] = perm[static_cast<std::size_t>(init.labels[i])];
  ControlOptions c;
  const FitResult a = fit_single(net, 3, SamplingTag::DoubleStandard, init, c);
  const FitResult b = fit_single(net, 3, SamplingTag::DoubleStandard, Partition(relabelled, 3), c);
  CHECK(a.elbo_trace.back() == doctest::Approx(b.elbo_trace.back()).epsilon(1e-12));
  CHECK(std::abs(a.icl - b.icl) < 1e-9);
  for (int q = 0; q < 3; ++q)
    CHECK(a.sbm.alpha(q) == doctest::Approx(b.sbm.alpha(perm[static_cast<std::size_t>(q)])).epsilon(1e-9));
}

TEST_CASE("tau rows are locally optimal at convergence") {
  const auto [g, z] = sample_network(planted(2, 0.5, 0.1), 40, nullptr, 14);
  auto net = ObservedNetwork::make(observe_network(g, NodeSampling{0.8}, nullptr, nullptr, 15));
  ControlOptions c;
  c.threshold = 1e-10;
  c.max_iter = 500;
  FitResult fit = spectral_fit(net, 2, SamplingTag::Node, c, 16);
  ve_step(*net, fit.design, fit.sbm, fit.state, 5);
  const double base = elbo(*net, fit.design, fit.sbm, fit.state);
  for (int i = 0; i < 40; ++i)
    for (int q = 0; q < 2; ++q) {
      VariationalState moved = fit.state;
      Eigen::RowVectorXd row = moved.tau.row(i);
      row(q) += 1e-3;
      moved.tau.row(i) = row / row.sum();
      CHECK(elbo(*net, fit.design, fit.sbm, moved) <= base + 1e-9);
    }
}

TEST_CASE("imputation") {
  const auto [g, z] = sample_network(planted(2, 0.5, 0.1), 30, nullptr, 17);
  auto full = ObservedNetwork::make(g);
  const FitResult whole = spectral_fit(full, 2, SamplingTag::Dyad, ControlOptions{}, 1);
  const Eigen::MatrixXd same = impute(whole);
  const Eigen::MatrixXd dense = g.to_dense();
  for (int i = 0; i < 30; ++i)
    for (int j = 0; j < 30; ++j)
      if (i != j) CHECK(same(i, j) == dense(i, j));

  const PartialAdjacency seen = observe_network(g, DyadSampling{0.7}, nullptr, nullptr, 18);
  auto net = ObservedNetwork::make(seen);
  const FitResult one = fit_single(net, 1, SamplingTag::Dyad, Partition(std::vector<int>(30, 0), 1), ControlOptions{});
  const Eigen::MatrixXd imp = impute(one);
  for (const Dyad d : net->missing) CHECK(imp(d.i, d.j) == doctest::Approx(one.sbm.pi(0, 0)));

  const PartialAdjacency mnar = observe_network(g, DoubleStandardSampling{0.9, 0.5}, nullptr, nullptr, 19);
  auto mnet = ObservedNetwork::make(mnar);
  const FitResult mfit = spectral_fit(mnet, 2, SamplingTag::DoubleStandard, ControlOptions{}, 2);
  const Eigen::MatrixXd mi = impute(mfit);
  const Eigen::MatrixXd md = mnar.to_dense();
  for (int i = 0; i < 30; ++i)
    for (int j = 0; j < 30; ++j)
      if (i != j && !std::isnan(md(i, j))) CHECK(mi(i, j) == md(i, j));
  for (std::size_t k = 0; k < mnet->missing.size(); ++k)
    CHECK(mi(mnet->missing[k].i, mnet->missing[k].j) == mfit.state.nu[k]);
}

TEST_CASE("control validation") {
  ControlOptions c;
  c.threshold = 0;
  CHECK_THROWS_AS(c.validate(), InputError);
  auto net = ObservedNetwork::make(sample_network(planted(1, 0.3, 0.3), 5, nullptr, 1).first);
  CHECK_THROWS_AS(fit_single(net, 2, SamplingTag::Dyad, Partition({0, 0, 0}, 2), ControlOptions{}), InputError);
}
