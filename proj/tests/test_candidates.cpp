#include <doctest.h>

#include <set>

#include "agx/bench.hpp"
#include "agx/candidates.hpp"
#include "fixtures.hpp"

using namespace agx;
using namespace agx::testing;

namespace {

void check_same(const std::vector<ApproximationCandidate>& a,
                const std::vector<ApproximationCandidate>& b) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].target == b[i].target);
    CHECK(a[i].replacement == b[i].replacement);
    CHECK(a[i].gamma == doctest::Approx(b[i].gamma).epsilon(1e-12));
  }
}

}  // namespace

TEST_CASE("candidate selection table") {
  struct Row {
    const char* name;
    std::vector<std::string> patterns;  // net 0 is the target
    std::vector<double> arrivals;
    Replacement expect;
    double gamma;
  };
  const std::vector<Row> rows = {
      {"strict-max constant", {"1111111110", "1010101010"}, {5, 1}, Replacement::constant(true), 0.9},
      {"strict-max constant zero", {"0000000100", "1010101010"}, {5, 1}, Replacement::constant(false), 0.9},
      {"strict-max wire", {"1100110011", "1100110010"}, {5, 1}, Replacement::net(1), 0.9},
      {"constant ties wire: constant wins", {"1111111100", "1111111001"}, {5, 1}, Replacement::constant(true), 0.8},
      {"T0 equals T1: Const0", {"1111100000", "0101010101"}, {5, 1}, Replacement::constant(false), 0.5},
      {"wire-vs-wire arrival tie: earlier wins", {"1100110000", "1100110001", "1100110010"}, {5, 3, 2},
       Replacement::net(2), 0.9},
      {"later source is not eligible", {"1100110000", "1100110000"}, {5, 6}, Replacement::constant(false), 0.6},
      {"equal arrival is not eligible", {"1100110000", "1100110000"}, {5, 5}, Replacement::constant(false), 0.6},
  };
  for (const Row& r : rows) {
    CAPTURE(r.name);
    const Synthetic s(r.patterns, r.arrivals);
    const auto a = s.by_map();
    const auto b = s.fused();
    check_same(a, b);
    CHECK(a[0].target == s.netlist->input_nets()[0]);
    CHECK(a[0].replacement == r.expect);
    CHECK(a[0].gamma == doctest::Approx(r.gamma));
  }
}

TEST_CASE("random tie between equally early wires is seeded") {
  // Target 0; sources 1 and 2 identical similarity and arrival.
  const Synthetic s({"1100110000", "1100110001", "1100110010"}, {5, 2, 2});
  std::set<NetId> seen;
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    const auto a = s.by_map(seed);
    const auto b = s.fused(seed);
    check_same(a, b);
    CHECK(a[0].replacement == s.by_map(seed)[0].replacement);
    REQUIRE(a[0].replacement.kind == Replacement::Kind::Net);
    seen.insert(a[0].replacement.source);
  }
  CHECK(seen == std::set<NetId>{1, 2});
}

TEST_CASE("both routes agree on generated circuits") {
  const auto model = CellTimingModel::default_library();
  for (auto spec : {BenchmarkSpec::rca(8), BenchmarkSpec::multiplier(6), BenchmarkSpec::adder_tree(4, 4)}) {
    CAPTURE(spec.name());
    auto n = std::make_shared<const Netlist>(generate_benchmark(spec));
    const AnnotatedDag aged = annotate(n, model, Corner::Aged);
    const TraceSet t = functional_simulate(*n, generate_stimuli(input_layout(*n), 3000, 4));
    for (bool pis : {true, false}) {
      CandidateOptions o;
      o.include_primary_inputs = pis;
      o.seed = 99;
      const auto a = select_candidates(compute_activity(t), compute_similarity(t, aged), aged, o);
      const auto b = extract_candidates(t, aged, o);
      check_same(a, b);
      CHECK(a.size() == eligible_nets(*n, o).size());
      o.threads = 3;
      check_same(extract_candidates(t, aged, o), b);
    }
    const auto cands = extract_candidates(t, aged);
    for (const auto& c : cands)
      if (c.replacement.kind == Replacement::Kind::Net) CHECK(aged.arrival[c.replacement.source] < aged.arrival[c.target]);
    const CandidateMix m = candidate_mix(cands);
    CHECK(m.const0 + m.const1 + m.wire == doctest::Approx(1.0));
  }
}

TEST_CASE("activity and similarity values") {
  const Synthetic s({"1100", "1000", "0110"}, {3, 2, 1});
  const WireActivity a = compute_activity(s.traces);
  CHECK(a.t1[0] == 0.5);
  CHECK(a.t0[1] == 0.75);
  const SimilarityMap m = compute_similarity(s.traces, s.aged);
  CHECK(m.at({0, 1}) == 0.75);
  CHECK(m.at({0, 2}) == 0.5);
  CHECK(m.at({1, 2}) == 0.25);
  CHECK(m.count({2, 0}) == 0);
  CHECK_THROWS_AS(compute_activity(TraceSet()), Error);
}
