#include <doctest.h>

#include <cmath>

#include "missbm/errors.hpp"
#include "support.hpp"

using namespace missbm;
using namespace testsupport;

namespace {

Eigen::MatrixXd hard_tau(const Partition& p) {
  Eigen::MatrixXd tau = Eigen::MatrixXd::Zero(p.size(), p.Q);
  for (int i = 0; i < p.size(); ++i) tau(i, p.labels[static_cast<std::size_t>(i)]) = 1.0;
  return tau;
}

// Complete-data log-likelihood by direct counting over dyads.
double counting_loglik(const PartialAdjacency& adj, const Partition& z, const SbmParams& p) {
  double ll = 0.0;
  for (int i = 0; i < z.size(); ++i) ll += std::log(p.alpha(z.labels[static_cast<std::size_t>(i)]));
  for (const Dyad d : adj.dyads()) {
    const double pr = p.pi(z.labels[static_cast<std::size_t>(d.i)], z.labels[static_cast<std::size_t>(d.j)]);
    ll += adj.at(d.i, d.j) == DyadValue::Present ? std::log(pr) : std::log1p(-pr);
  }
  return ll;
}

}  // namespace

TEST_CASE("degenerate generators") {
  CHECK(sample_network(planted(1, 1.0, 1.0), 12, nullptr, 1).first.edge_count() == 66);
  CHECK(sample_network(planted(1, 0.0, 0.0), 12, nullptr, 1).first.edge_count() == 0);
  CHECK(sample_network(planted(2, 0.5, 0.1, true), 10, nullptr, 1).first.directed());
}

TEST_CASE("empirical block frequencies match the generator") {
  SbmParams p = planted(2, 0.9, 0.1);
  const auto [g, z] = sample_network(p, 200, nullptr, 17);
  double in = 0, in_edges = 0, out = 0, out_edges = 0;
  for (const Dyad d : g.dyads()) {
    const bool same = z.labels[static_cast<std::size_t>(d.i)] == z.labels[static_cast<std::size_t>(d.j)];
    const double y = g.at(d.i, d.j) == DyadValue::Present ? 1.0 : 0.0;
    (same ? in : out) += 1.0;
    (same ? in_edges : out_edges) += y;
  }
  CHECK(std::abs(in_edges / in - 0.9) < 3.0 * std::sqrt(0.09 / in));
  CHECK(std::abs(out_edges / out - 0.1) < 3.0 * std::sqrt(0.09 / out));
}

TEST_CASE("parameter validation") {
  SbmParams p = planted(2, 0.5, 0.1);
  p.alpha << 0.7, 0.7;
  CHECK_THROWS_AS(p.validate(), InputError);
  SbmParams q = planted(2, 0.5, 0.1);
  q.pi(0, 1) = 0.3;
  CHECK_THROWS_AS(q.validate(), InputError);
  CHECK_NOTHROW(planted(2, 0.5, 0.1).validate());
}

TEST_CASE("expected log-likelihood, one block fully observed") {
  const auto [g, z] = sample_network(planted(1, 0.3, 0.3), 25, nullptr, 4);
  auto net = ObservedNetwork::make(g);
  const double p = 0.27;
  SbmParams params = planted(1, p, p);
  VariationalState st{Eigen::MatrixXd::Ones(25, 1), {}};
  const double e = static_cast<double>(g.edge_count());
  const double expected = e * std::log(p) + (300.0 - e) * std::log1p(-p);
  CHECK(expected_loglik_sbm(params, *net, st, InferenceMode::ObservedOnly) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("expected log-likelihood with nu equal to pi") {
  PartialAdjacency g = sample_network(planted(1, 0.4, 0.4), 12, nullptr, 8).first;
  const auto all = g.dyads();
  for (std::size_t k = 0; k < all.size(); k += 5) g.set(all[k].i, all[k].j, DyadValue::Missing);
  auto net = ObservedNetwork::make(g);
  const double p = 0.35;
  VariationalState st{Eigen::MatrixXd::Ones(12, 1), std::vector<double>(net->missing.size(), p)};
  const double e = static_cast<double>(g.edge_count());
  const double obs = static_cast<double>(g.dyad_count() - g.missing_count());
  const double m = static_cast<double>(g.missing_count());
  const double expected = (e + m * p) * std::log(p) + (obs - e + m * (1 - p)) * std::log1p(-p);
  CHECK(expected_loglik_sbm(planted(1, p, p), *net, st, InferenceMode::Imputed) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("hard memberships give the counting likelihood and counting estimates") {
  SbmParams gen = planted(3, 0.5, 0.1);
  gen.alpha << 0.2, 0.3, 0.5;
  const auto [g, z] = sample_network(gen, 40, nullptr, 21);
  auto net = ObservedNetwork::make(g);
  VariationalState st{hard_tau(z), {}};
  const SbmParams fitted = update_sbm(planted(3, 0.5, 0.5), *net, st, InferenceMode::ObservedOnly);
  for (int q = 0; q < 3; ++q)
    for (int l = 0; l < 3; ++l) {
      double pairs = 0, edges = 0;
      for (const Dyad d : g.dyads()) {
        const int a = z.labels[static_cast<std::size_t>(d.i)], b = z.labels[static_cast<std::size_t>(d.j)];
        if ((a == q && b == l) || (a == l && b == q)) {
          pairs += 1;
          edges += g.at(d.i, d.j) == DyadValue::Present;
        }
      }
      if (pairs > 0) CHECK(fitted.pi(q, l) == doctest::Approx(edges / pairs).epsilon(1e-12));
    }
  CHECK(expected_loglik_sbm(fitted, *net, st, InferenceMode::ObservedOnly) ==
        doctest::Approx(counting_loglik(g, z, fitted)).epsilon(1e-10));
}

TEST_CASE("uniform memberships give the global density") {
  const auto [g, z] = sample_network(planted(2, 0.6, 0.1), 30, nullptr, 2);
  auto net = ObservedNetwork::make(g);
  VariationalState st{Eigen::MatrixXd::Constant(30, 2, 0.5), {}};
  const SbmParams fitted = update_sbm(planted(2, 0.5, 0.5), *net, st, InferenceMode::ObservedOnly);
  const double density = static_cast<double>(g.edge_count()) / static_cast<double>(g.dyad_count());
  CHECK((fitted.pi.array() - density).abs().maxCoeff() < 1e-12);

  SbmParams p = planted(2, 0.2, 0.5);
  p.pi(1, 1) = 0.9;
  const Eigen::MatrixXd pred = predict_probabilities(p, st.tau, CovariateSet{});
  CHECK(pred(0, 1) == doctest::Approx((0.2 + 2 * 0.5 + 0.9) / 4));
  CHECK(std::isnan(pred(0, 0)));
}

TEST_CASE("predictions under hard memberships") {
  SbmParams p = planted(2, 0.7, 0.2);
  const Partition z({0, 0, 1, 1}, 2);
  const Eigen::MatrixXd pred = predict_probabilities(p, hard_tau(z), CovariateSet{});
  CHECK(pred(0, 1) == doctest::Approx(0.7));
  CHECK(pred(0, 2) == doctest::Approx(0.2));
  CHECK(pred(2, 3) == doctest::Approx(0.7));
}

TEST_CASE("covariate effect") {
  CovariateSet cov;
  cov.kind = CovariateKind::Nodal;
  cov.nodal.push_back(Eigen::Vector3d(0, 1, 3));
  const CovariateSet dy = transfer_covariates(cov, 3, false);
  SbmParams p = planted(1, 0.5, 0.5);
  p.variant = SbmVariant::Covariate;
  p.gamma = Eigen::MatrixXd::Zero(1, 1);
  p.beta = Eigen::VectorXd::Constant(1, 2.0);
  const Eigen::MatrixXd e = covariate_effect(p, dy, 3);
  CHECK(e(0, 2) == doctest::Approx(-6.0));
  CHECK(predict_probabilities(p, Eigen::MatrixXd::Ones(3, 1), dy)(0, 1) == doctest::Approx(logistic(-2.0)));
}
