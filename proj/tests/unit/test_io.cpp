#include <doctest.h>

#include <cmath>
#include <sstream>

#include "missbm/errors.hpp"
#include "missbm/io.hpp"
#include "missbm/serialization.hpp"
#include "support.hpp"

using namespace missbm;
using namespace testsupport;

TEST_CASE("real formatting") {
  CHECK(format_real(std::nan("")) == "NA");
  CHECK(format_real(0.5) == "0.5");
  CHECK(std::stod(format_real(0.1)) == 0.1);
  CHECK(std::stod(format_real(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(split_fields("1, 2 ,NA") == std::vector<std::string>{"1", "2", "NA"});
}

TEST_CASE("dense csv round trip") {
  PartialAdjacency a = sample_network(planted(2, 0.5, 0.1), 9, nullptr, 1).first;
  a.set(0, 3, DyadValue::Missing);
  std::stringstream s;
  write_dense_csv(s, a);
  CHECK(read_dense_csv(s, false) == a);

  std::stringstream bad("0,1\n1,0,1\n");
  CHECK_THROWS_AS(read_dense_csv(bad, false), InputError);
  std::stringstream value("0,2\n2,0\n");
  CHECK_THROWS_AS(read_dense_csv(value, false), InputError);
}

TEST_CASE("triplet round trip") {
  PartialAdjacency a = sample_network(planted(2, 0.5, 0.1, true), 7, nullptr, 2).first;
  a.set(2, 1, DyadValue::Missing);
  std::stringstream s;
  write_triplets(s, a);
  CHECK(read_triplets(s, true, false) == a);

  std::stringstream sparse("1 2 1\n3 4 0\n");
  const PartialAdjacency m = read_triplets(sparse, false, true);
  CHECK(m.size() == 4);
  CHECK(m.at(0, 1) == DyadValue::Present);
  CHECK(m.at(2, 3) == DyadValue::Absent);
  CHECK(m.is_missing(0, 2));
}

TEST_CASE("graphml with labels and isolated nodes") {
  std::stringstream s(R"(<?xml version="1.0"?>
<graphml xmlns="http://graphml.graphdrawing.org/xmlns">
  <key id="d0" for="node" attr.name="party" attr.type="string"/>
  <graph edgedefault="undirected">
    <node id="a"><data key="d0">left</data></node>
    <node id="b"><data key="d0">right</data></node>
    <node id="c"><data key="d0">left</data></node>
    <node id="lonely"><data key="d0">right</data></node>
    <edge source="a" target="b"/>
    <edge source="b" target="c"/>
  </graph>
</graphml>)");
  const GraphMLData g = read_graphml(s, "party", true);
  CHECK(g.adjacency.size() == 3);
  CHECK(g.adjacency.edge_count() == 2);
  REQUIRE(g.labels.has_value());
  CHECK(g.labels->labels == std::vector<int>{0, 1, 0});
  CHECK(g.label_values == std::vector<std::string>{"left", "right"});
}

TEST_CASE("labels and matrices") {
  std::stringstream s;
  write_labels(s, {0, 2, 1});
  CHECK(s.str() == "1\n3\n2\n");
  CHECK(read_labels(s) == std::vector<int>{0, 2, 1});

  Eigen::MatrixXd m(2, 2);
  m << 0.25, std::nan(""), 1e-300, -3;
  std::stringstream t;
  write_real_matrix(t, m);
  const Eigen::MatrixXd back = read_real_matrix(t);
  CHECK(back(0, 0) == 0.25);
  CHECK(std::isnan(back(0, 1)));
  CHECK(back(1, 0) == 1e-300);
}

TEST_CASE("matrix and list parsing") {
  CHECK(parse_number_list("0.2, 0.4,0.6") == std::vector<double>{0.2, 0.4, 0.6});
  const Eigen::MatrixXd a = parse_matrix_text("[[0.5, 0.1], [0.1, 0.4]]");
  const Eigen::MatrixXd b = parse_matrix_text("0.5,0.1;0.1,0.4");
  CHECK(a == b);
  CHECK_THROWS_AS(parse_matrix_text("1,2;3"), InputError);
}

TEST_CASE("parameter and fit serialization round trip") {
  for (auto tag : kAllSamplings) {
    const SamplingDesign d = initial_design(tag, 3, 1, 1);
    const SamplingDesign back = design_from_json(design_to_json(d));
    CHECK(tag_of(back) == tag);
    CHECK(flat_parameters(back) == flat_parameters(d));
  }
  SbmParams p = planted(2, 0.6, 0.2);
  const SbmParams q = sbm_from_json(sbm_to_json(p));
  CHECK(q.pi == p.pi);
  CHECK(q.alpha == p.alpha);

  const auto [g, z] = sample_network(planted(2, 0.5, 0.05), 30, nullptr, 3);
  auto net = ObservedNetwork::make(observe_network(g, DoubleStandardSampling{0.8, 0.5}, nullptr, nullptr, 4));
  const FitCollection col = estimate_miss_sbm(net, {1, 2}, SamplingTag::DoubleStandard, ControlOptions{});
  const nlohmann::json j = collection_to_json(col);
  const FitCollection back = collection_from_json(j, net);
  CHECK(back.icl() == col.icl());
  CHECK(back.best().Q == col.best().Q);
  for (std::size_t k = 0; k < col.models.size(); ++k) {
    CHECK(back.models[k].state.tau == col.models[k].state.tau);
    CHECK(back.models[k].state.nu == col.models[k].state.nu);
    const Eigen::MatrixXd a = impute(back.models[k]), b = impute(col.models[k]);
    CHECK(((a.array() == b.array()) || (a.array().isNaN() && b.array().isNaN())).all());
  }
  CHECK(collection_to_json(back).dump() == j.dump());
  std::stringstream mon;
  write_monitoring_csv(mon, col);
  std::string header;
  std::getline(mon, header);
  CHECK(header == "iter,Q,elbo,delta");
}
