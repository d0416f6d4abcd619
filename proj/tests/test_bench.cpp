#include <doctest.h>

#include "agx/bench.hpp"
#include "support.hpp"

using namespace agx;
using namespace agx::testing;

namespace {

void check_reference(const BenchmarkSpec& spec) {
  CAPTURE(spec.name());
  const Netlist n = generate_benchmark(spec);
  const StimulusSet s = generate_stimuli(input_layout(n), 3000, 21);
  const auto out = decode_outputs(functional_simulate(n, s, TraceScope::OutputsOnly), make_decoding(n));
  for (std::size_t v = 0; v < s.count(); ++v) {
    std::vector<std::uint64_t> ops;
    for (std::size_t b = 0; b < s.layout().size(); ++b) ops.push_back(s.bus_value(b, v));
    REQUIRE(out[v] == benchmark_reference(spec, ops));
  }
}

}  // namespace

TEST_CASE("generated circuits compute their reference function") {
  for (int w : {2, 3, 4, 8, 16, 32}) check_reference(BenchmarkSpec::rca(w));
  for (int w : {2, 3, 6, 8, 12}) check_reference(BenchmarkSpec::multiplier(w));
  check_reference(BenchmarkSpec::adder_tree(2, 5));
  check_reference(BenchmarkSpec::adder_tree(5, 6));
  check_reference(BenchmarkSpec::adder_tree(8, 8));
  check_reference(BenchmarkSpec::conv3x3(3, 2));
  check_reference(BenchmarkSpec::conv3x3(4, 4));
}

TEST_CASE("exhaustive check of small adders and multipliers") {
  CHECK(truth_table_sim(generate_benchmark(BenchmarkSpec::rca(4))) ==
        truth_table(generate_benchmark(BenchmarkSpec::rca(4))));
  const Netlist m = generate_benchmark(BenchmarkSpec::multiplier(4));
  const auto tt = truth_table(m);
  for (std::uint64_t a = 0; a < 16; ++a)
    for (std::uint64_t b = 0; b < 16; ++b) {
      std::uint64_t p = 0;
      const auto& row = tt[a | (b << 4)];
      for (std::size_t k = 0; k < row.size(); ++k) p |= std::uint64_t{row[k]} << k;
      CHECK(p == a * b);
    }
}

TEST_CASE("names, sizes, validation") {
  CHECK(generate_benchmark(BenchmarkSpec::rca(8)).gate_count() == 37);
  CHECK(generate_benchmark(BenchmarkSpec::multiplier(8)).gate_count() == 320);
  for (const auto& spec : {BenchmarkSpec::rca(8), BenchmarkSpec::multiplier(16),
                           BenchmarkSpec::adder_tree(4, 8), BenchmarkSpec::conv3x3(6, 6)}) {
    const BenchmarkSpec back = BenchmarkSpec::from_name(spec.name());
    CHECK(back.name() == spec.name());
    CHECK(back.kind == spec.kind);
  }
  CHECK(BenchmarkSpec::rca(8).name() == "rca8");
  CHECK(BenchmarkSpec::conv3x3(8, 8).name() == "conv3x3_8x8");
  CHECK_THROWS_AS(BenchmarkSpec::from_name("alu8"), Error);
  CHECK_THROWS_AS(BenchmarkSpec::multiplier(40).validate(), Error);
  CHECK_THROWS_AS(BenchmarkSpec::rca(0).validate(), Error);
  CHECK(generate_benchmark(BenchmarkSpec::conv3x3(6, 6)).gate_count() >= 1500);
}

TEST_CASE("quartiles interpolate linearly") {
  const Quartiles q = quartiles({4, 1, 3, 2, 5});
  CHECK(q == Quartiles{1, 2, 3, 4, 5});
  const Quartiles h = quartiles({1, 2, 3, 4});
  CHECK(h.q1 == 1.75);
  CHECK(h.median == 2.5);
  CHECK(h.q3 == 3.25);
  CHECK_THROWS_AS(quartiles({}), Error);
}

TEST_CASE("small experiment end to end") {
  BenchmarkSpec spec = BenchmarkSpec::rca(8);
  spec.opt_vectors = 4000;
  spec.eval_vectors = 4000;
  GaConfig c;
  c.population_size = 16;
  c.generations = 10;
  const auto model = CellTimingModel::default_library();
  const ExperimentRecord r = run_experiment(spec, c, model);
  CHECK(r.gates == 37);
  CHECK(r.aged_cpd == doctest::Approx(r.fresh_cpd * kDefaultAgingFactor));
  CHECK(r.baseline_aged_nmed > 0.0);
  if (r.feasible) {
    CHECK(r.approx_aged_cpd <= r.fresh_cpd);
    CHECK(r.timing_matches_functional);
    CHECK(r.approx_timed_nmed == r.approx_nmed);
    CHECK(r.selected == r.ga.best.count());
  }
  CHECK(r.eligible == r.ga.best.size());
  const auto cols = [](const std::string& line) { return std::count(line.begin(), line.end(), ','); };
  CHECK(cols(experiment_csv_header()) == cols(experiment_csv_row(r)));

  const ExperimentRecord again = run_experiment(spec, c, model, {NmedVariant::Standard, 2});
  CHECK(again.ga.best == r.ga.best);
  CHECK(again.approx_nmed == r.approx_nmed);

  MonteCarloOptions mc;
  mc.samples = 8;
  mc.sigma_ratio = 0.0;
  mc.subsample = 0;
  const MonteCarloSummary zero = run_montecarlo(*r.baseline, *r.approximate, model, r.eval_stimuli,
                                                make_decoding(*r.baseline), r.fresh_cpd, mc);
  CHECK(zero.baseline.min == doctest::Approx(r.baseline_aged_nmed));
  CHECK(zero.baseline.max == zero.baseline.min);
  CHECK(zero.approximate.median == doctest::Approx(r.approx_timed_nmed));
  mc.sigma_ratio = 0.1;
  mc.subsample = 1000;
  const MonteCarloSummary a = run_montecarlo(*r.baseline, *r.approximate, model, r.eval_stimuli,
                                             make_decoding(*r.baseline), r.fresh_cpd, mc);
  mc.threads = 3;
  const MonteCarloSummary b = run_montecarlo(*r.baseline, *r.approximate, model, r.eval_stimuli,
                                             make_decoding(*r.baseline), r.fresh_cpd, mc);
  CHECK(a.baseline_nmed == b.baseline_nmed);
  CHECK(a.approximate_nmed == b.approximate_nmed);
  const std::string csv = montecarlo_csv("rca8", a);
  CHECK(csv.find("rca8") != std::string::npos);
}
