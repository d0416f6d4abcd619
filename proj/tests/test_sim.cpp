#include <doctest.h>

#include "agx/bench.hpp"
#include "agx/sim.hpp"
#include "support.hpp"

using namespace agx;
using namespace agx::testing;

namespace {

CellTimingModel unit_model() {
  CellTimingModel m;
  m.set(GateKind::Inv, 1.0, 1.0);
  m.set(GateKind::And2, 2.0, 2.0);
  m.set(GateKind::Buf, 1.0, 1.5);
  return m;
}

/// y = AND2(a, INV(a)): a rising edge produces a pulse on y during [2, 3).
Netlist glitch() {
  NetlistBuilder b("glitch");
  const auto a = b.add_input("a", 1);
  const NetId na = b.add_gate(GateKind::Inv, {a[0]});
  b.add_output("y", {b.add_gate(GateKind::And2, {a[0], na})});
  return std::move(b).build();
}

StimulusSet sequence(const Netlist& n, const std::vector<int>& bits) {
  StimulusSet s(input_layout(n), bits.size());
  for (std::size_t v = 0; v < bits.size(); ++v) s.set_bit(0, v, bits[v] != 0);
  return s;
}

}  // namespace

TEST_CASE("packed simulation equals the recursive evaluator exhaustively") {
  Rng rng(5);
  std::vector<Netlist> circuits;
  for (int i = 0; i < 50; ++i)
    circuits.push_back(random_netlist(rng, 1 + static_cast<int>(uniform_below(rng, 10)),
                                      1 + static_cast<int>(uniform_below(rng, 60)),
                                      1 + static_cast<int>(uniform_below(rng, 5))));
  circuits.push_back(generate_benchmark(BenchmarkSpec::rca(4)));
  circuits.push_back(generate_benchmark(BenchmarkSpec::rca(5)));
  circuits.push_back(generate_benchmark(BenchmarkSpec::multiplier(3)));
  circuits.push_back(generate_benchmark(BenchmarkSpec::multiplier(5)));
  circuits.push_back(generate_benchmark(BenchmarkSpec::adder_tree(3, 3)));
  for (const Netlist& n : circuits) CHECK(truth_table_sim(n) == truth_table(n));
}

TEST_CASE("threaded simulation is identical to single-threaded") {
  const Netlist n = generate_benchmark(BenchmarkSpec::multiplier(6));
  const StimulusSet s = generate_stimuli(input_layout(n), 70001, 9);
  const TraceSet one = functional_simulate(n, s, TraceScope::AllNets, 1);
  const TraceSet four = functional_simulate(n, s, TraceScope::AllNets, 4);
  for (NetId i = 0; i < n.net_count(); ++i) {
    const auto a = one.trace(i), b = four.trace(i);
    CHECK(std::equal(a.begin(), a.end(), b.begin(), b.end()));
  }
  const TraceSet outs = functional_simulate(n, s, TraceScope::OutputsOnly);
  CHECK_FALSE(outs.has(n.input_nets()[0]));
  for (std::size_t k = 0; k < outs.output_nets().size(); ++k) {
    const auto a = outs.output_trace(k), b = one.output_trace(k);
    CHECK(std::equal(a.begin(), a.end(), b.begin(), b.end()));
  }
  // Lanes past the last vector stay zero.
  CHECK((one.trace(n.output_nets()[0]).back() & ~one.tail_mask()) == 0);
}

TEST_CASE("stimulus generation and file round trip") {
  const std::vector<BusLayout> layout{{"a", 8}, {"b", 3}};
  const StimulusSet s = generate_stimuli(layout, 100000, 42);
  double sum = 0.0;
  for (std::size_t v = 0; v < s.count(); ++v) {
    sum += static_cast<double>(s.bus_value(0, v));
    CHECK(s.bus_value(1, v) < 8);
  }
  CHECK(std::abs(sum / 100000.0 - 127.5) < 0.01 * 127.5);

  const StimulusSet small = generate_stimuli(layout, 300, 1);
  const StimulusSet back = parse_stimuli(format_stimuli(small), layout);
  REQUIRE(back.count() == small.count());
  for (std::size_t v = 0; v < small.count(); ++v) {
    CHECK(back.bus_value(0, v) == small.bus_value(0, v));
    CHECK(back.bus_value(1, v) == small.bus_value(1, v));
  }
  // First bus occupies the high bits: a = 0xab, b = 5 -> 0xab * 8 + 5.
  const StimulusSet one = parse_stimuli("# comment\n0x55d\n", layout);
  CHECK(one.bus_value(0, 0) == 0xab);
  CHECK(one.bus_value(1, 0) == 5);
  CHECK_THROWS_AS(parse_stimuli("fffff\n", layout), Error);
  CHECK_THROWS_AS(parse_stimuli("zz\n", layout), Error);
  CHECK(generate_stimuli(layout, 10, 3).bus_value(0, 7) == generate_stimuli(layout, 10, 3).bus_value(0, 7));
}

TEST_CASE("layout mismatch is rejected") {
  const Netlist n = glitch();
  const StimulusSet s = generate_stimuli({{"q", 2}}, 4, 1);
  CHECK_THROWS_AS(functional_simulate(n, s), Error);
  CHECK_THROWS_AS(timing_simulate(annotate(n, unit_model(), Corner::Fresh), s, 1.0), Error);
}

TEST_CASE("event trace of a glitching AND matches a hand-derived waveform") {
  const Netlist n = glitch();
  const AnnotatedDag dag = annotate(n, unit_model(), Corner::Fresh);
  const StimulusSet s = sequence(n, {0, 1, 1, 0});
  // vector 1: a rises at 0; y rises at 2 (AND sees a=1, ~a still 1) and falls at 3.
  auto sampled = [&](double clock) {
    const TimedOutcome t = timing_simulate(dag, s, clock);
    std::vector<int> y;
    for (std::size_t v = 0; v < s.count(); ++v) y.push_back(t.sample(0, v));
    return y;
  };
  CHECK(sampled(1.9) == std::vector<int>{0, 0, 0, 0});
  CHECK(sampled(2.0) == std::vector<int>{0, 1, 0, 0});
  CHECK(sampled(2.5) == std::vector<int>{0, 1, 0, 0});
  CHECK(sampled(3.0) == std::vector<int>{0, 0, 0, 0});

  TimingSimOptions opts;
  opts.collect_late_nets = true;
  const TimedOutcome t = timing_simulate(dag, s, 2.5, opts);
  CHECK(t.is_settled(0));
  CHECK_FALSE(t.is_settled(1));
  CHECK(t.is_settled(2));
  CHECK(t.late_nets[1] == std::vector<NetId>{n.output_nets()[0]});
  CHECK(timing_simulate(dag, s, 3.0).settled_count() == 4);
}

TEST_CASE("late transitions keep the previous vector's value") {
  NetlistBuilder b("bufs");
  const auto a = b.add_input("a", 1);
  const NetId m = b.add_gate(GateKind::Buf, {a[0]});
  b.add_output("y", {b.add_gate(GateKind::Buf, {m})});
  const Netlist n = std::move(b).build();
  const StimulusSet s = sequence(n, {1, 0, 1, 1, 0});
  const AnnotatedDag fresh = annotate(n, unit_model(), Corner::Fresh);  // 2.0 total
  const AnnotatedDag aged = annotate(n, unit_model(), Corner::Aged);    // 3.0 total
  auto run = [&](const AnnotatedDag& d, double clock) {
    const TimedOutcome t = timing_simulate(d, s, clock);
    std::vector<int> y;
    for (std::size_t v = 0; v < s.count(); ++v) y.push_back(t.sample(0, v));
    return y;
  };
  CHECK(run(fresh, 2.0) == std::vector<int>{1, 0, 1, 1, 0});
  CHECK(run(aged, 2.0) == std::vector<int>{1, 1, 0, 1, 1});
  CHECK(run(aged, 3.0) == std::vector<int>{1, 0, 1, 1, 0});
}

TEST_CASE("timing simulation at the settled clock equals functional simulation") {
  Rng rng(8);
  for (int i = 0; i < 20; ++i) {
    const Netlist n = random_netlist(rng, 6, 40, 4);
    const auto model = CellTimingModel::default_library();
    const AnnotatedDag dag = annotate(n, model, Corner::Aged);
    const StimulusSet s = generate_stimuli(input_layout(n), 500, static_cast<std::uint64_t>(i));
    const TimedOutcome t = timing_simulate(dag, s, dag.cpd);
    const TraceSet f = functional_simulate(n, s, TraceScope::OutputsOnly);
    CHECK(t.settled_count() == s.count());
    for (std::size_t k = 0; k < f.output_nets().size(); ++k) {
      const auto ft = f.output_trace(k);
      CHECK(std::equal(ft.begin(), ft.end(), t.sampled[k].begin(), t.sampled[k].end()));
    }
  }
}
