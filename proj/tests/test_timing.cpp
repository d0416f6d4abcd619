#include <doctest.h>

#include <cmath>
#include <numeric>

#include "agx/timing.hpp"
#include "support.hpp"

using namespace agx;
using namespace agx::testing;

namespace {

Netlist chain3() {
  NetlistBuilder b("chain");
  const auto x = b.add_input("x", 2);
  const NetId t = b.add_gate(GateKind::Nand2, std::vector<NetId>{x[0], x[1]}, "t", "g0");
  const NetId u = b.add_gate(GateKind::Inv, std::vector<NetId>{t}, "u", "g1");
  const NetId v = b.add_gate(GateKind::Xor2, std::vector<NetId>{u, x[1]}, "v", "g2");
  const NetId w = b.add_gate(GateKind::Buf, std::vector<NetId>{x[0]}, "w", "g3");
  b.add_output("y", {v, w});
  return std::move(b).build();
}

}  // namespace

TEST_CASE("default library and aged corner") {
  const auto m = CellTimingModel::default_library();
  CHECK(m.fresh(GateKind::Nand2) == doctest::Approx(0.020));
  CHECK(m.aged(GateKind::Nand2) == doctest::Approx(0.020 * 1.1215));
  CHECK(m.delay(GateKind::Input, Corner::Aged) == 0.0);
  CHECK(m.delay(GateKind::Const1, Corner::Fresh) == 0.0);
  CellTimingModel empty;
  CHECK_THROWS_AS(empty.delay(GateKind::And2, Corner::Fresh), Error);
  CHECK_THROWS_AS(derive_aged_model(m, 0.9), Error);
  CHECK_THROWS_AS(empty.set(GateKind::And2, 0.02, 0.01), Error);
}

TEST_CASE("hand-computed arrivals on a small chain") {
  const Netlist n = chain3();
  const auto m = CellTimingModel::default_library();
  const AnnotatedDag fresh = annotate(n, m, Corner::Fresh);
  const double t = 0.020, u = t + 0.015, v = u + 0.045;
  CHECK(fresh.arrival[*n.find_net("t")] == doctest::Approx(t));
  CHECK(fresh.arrival[*n.find_net("v")] == doctest::Approx(v));
  CHECK(fresh.cpd == doctest::Approx(v));
  REQUIRE(fresh.critical_path.size() == 3);
  CHECK(n.node(fresh.critical_path[0]).name == "g0");
  CHECK(n.node(fresh.critical_path[2]).name == "g2");
  const auto nets = critical_nets(fresh);
  REQUIRE(nets.size() == 4);
  CHECK(n.net(nets[1]).name == "t");
  CHECK(n.net(nets[3]).name == "v");

  const AnnotatedDag aged = annotate(n, m, Corner::Aged);
  CHECK(aged.cpd == doctest::Approx(v * 1.1215));
  CHECK(critical_path_delay(n, m, Corner::Aged) == aged.cpd);

  const AnnotatedDag slower = restatic(fresh, std::map<NodeId, double>{{*n.find_node("g3"), 1.0}});
  CHECK(slower.cpd == doctest::Approx(1.0));
  CHECK(slower.corner == Corner::Custom);
  CHECK_THROWS_AS(restatic(fresh, std::map<NodeId, double>{{999u, 1.0}}), Error);
}

TEST_CASE("STA equals exhaustive path enumeration on random DAGs") {
  Rng rng(77);
  for (int i = 0; i < 200; ++i) {
    const int gates = 5 + static_cast<int>(uniform_below(rng, 46));
    const Netlist n = random_netlist(rng, 2 + static_cast<int>(uniform_below(rng, 6)), gates,
                                     1 + static_cast<int>(uniform_below(rng, 4)));
    std::vector<double> delay(n.node_count());
    for (auto& d : delay) d = 0.01 + uniform01(rng);
    const AnnotatedDag base = annotate(n, CellTimingModel::default_library(), Corner::Fresh);
    const AnnotatedDag dag = restatic(base, delay);
    CHECK(dag.cpd == enumerate_longest_path(n, delay));
  }
}

TEST_CASE("timing file parse and format") {
  const auto m = parse_timing_model("# cells\nAND2 0.03 0.04\nINV 0.01\n", 1.5);
  CHECK(m.aged(GateKind::And2) == doctest::Approx(0.04));
  CHECK(m.aged(GateKind::Inv) == doctest::Approx(0.015));
  CHECK_FALSE(m.has(GateKind::Or2));
  const auto back = parse_timing_model(format_timing_model(m));
  CHECK(back.aged(GateKind::Inv) == m.aged(GateKind::Inv));
  try {
    parse_timing_model("AND2 0.03\nFOO 1\n");
    FAIL("no error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.code() == ErrorCode::UnknownCell);
  }
  CHECK_THROWS_AS(parse_timing_model("AND2 0.03 0.01\n"), Error);
  CHECK_THROWS_AS(read_timing_file("/nonexistent/timing.txt"), Error);
}

TEST_CASE("variation sampling statistics") {
  NetlistBuilder b("one");
  const auto x = b.add_input("x", 1);
  b.add_output("y", {b.add_gate(GateKind::Inv, {x[0]})});
  const Netlist n = std::move(b).build();
  const AnnotatedDag dag = annotate(n, CellTimingModel::default_library(), Corner::Aged);
  const double delta = dag.delay[0];
  std::vector<double> draws;
  for (std::uint64_t s = 0; s < 100000; ++s) draws.push_back(sample_variation(dag, 0.10, s).delays[0]);
  const double mean = std::accumulate(draws.begin(), draws.end(), 0.0) / static_cast<double>(draws.size());
  double var = 0.0;
  for (double d : draws) var += (d - mean) * (d - mean);
  const double sd = std::sqrt(var / static_cast<double>(draws.size() - 1));
  CHECK(std::abs(mean - delta) < 0.01 * delta);
  CHECK(std::abs(sd - 0.10 * delta) < 0.05 * 0.10 * delta);
  CHECK(sample_variation(dag, 0.10, 5).delays == sample_variation(dag, 0.10, 5).delays);
  CHECK(sample_variation(dag, 0.0, 5).delays == dag.delay);
}
