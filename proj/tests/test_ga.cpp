#include <doctest.h>

#include <bit>
#include <cmath>
#include <set>

#include "agx/bench.hpp"
#include "agx/ga.hpp"
#include "fixtures.hpp"

using namespace agx;
using namespace agx::testing;

namespace {

GaConfig small_config(std::uint64_t seed) {
  GaConfig c;
  c.population_size = 16;
  c.generations = 20;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("toy circuit has three eligible nets") {
  Toy toy;
  CHECK(toy.candidates.size() == 3);
}

TEST_CASE("fitness of every toy chromosome matches the exhaustive oracle") {
  Toy toy;
  CHECK(calc_fitness(toy.chromosome(0), toy.ctx).fitness == 0.0);
  for (unsigned mask = 0; mask < 8; ++mask) {
    CAPTURE(mask);
    const FitnessResult got = calc_fitness(toy.chromosome(mask), toy.ctx);
    const FitnessResult want = toy_oracle(toy, toy.chromosome(mask));
    CHECK(got.feasible == want.feasible);
    CHECK(got.aged_cpd == doctest::Approx(want.aged_cpd).epsilon(1e-12));
    if (want.feasible) {
      CHECK(got.nmed == doctest::Approx(want.nmed).epsilon(1e-12));
      CHECK(got.fitness == doctest::Approx(want.fitness).epsilon(1e-9));
    } else {
      CHECK(got.fitness == 0.0);
    }
    const FitnessResult again = calc_fitness(toy.chromosome(mask), toy.ctx);
    CHECK(again.fitness == got.fitness);
    CHECK(again.nmed == got.nmed);
  }
}

TEST_CASE("exact-match approximation is capped at 1/epsilon") {
  NetlistBuilder b("bufs");
  const auto x = b.add_input("x", 2);
  const NetId m1 = b.add_gate(GateKind::Buf, {x[0]});
  const NetId m2 = b.add_gate(GateKind::Buf, {m1});
  b.add_output("y", {b.add_gate(GateKind::Xor2, {m2, x[1]})});
  auto n = std::make_shared<const Netlist>(std::move(b).build());
  const auto model = CellTimingModel::default_library();
  const std::vector<ApproximationCandidate> cands{{m2, Replacement::net(x[0]), 1.0}};
  const auto ctx = FitnessContext::make(n, cands, model, critical_path_delay(*n, model, Corner::Fresh),
                                        exhaustive_stimuli(*n), make_decoding(*n));
  const FitnessResult f = calc_fitness(Chromosome{{1}}, ctx);
  CHECK(f.feasible);
  CHECK(f.nmed == 0.0);
  CHECK(f.fitness == doctest::Approx(1e12));
  CHECK(calc_fitness(Chromosome{{0}}, ctx).fitness == 0.0);
  CHECK_THROWS_AS(decode_chromosome(Chromosome{{1, 0}}, cands), Error);
}

TEST_CASE("evolve finds the exhaustive optimum on the toy circuit") {
  Toy toy;
  // Best by the ranking rule: fitness, then fewer set bits, then lower delay.
  unsigned best = 0;
  FitnessResult best_f = toy_oracle(toy, toy.chromosome(0));
  for (unsigned mask = 1; mask < 8; ++mask) {
    const FitnessResult f = toy_oracle(toy, toy.chromosome(mask));
    const auto bits = [](unsigned m) { return std::popcount(m); };
    if (f.fitness > best_f.fitness ||
        (f.fitness == best_f.fitness && bits(mask) < bits(best))) {
      best = mask;
      best_f = f;
    }
  }
  REQUIRE(best_f.feasible);
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const GaResult r = evolve(small_config(seed), toy.ctx);
    if (r.best == toy.chromosome(best)) ++hits;
    CHECK(r.feasible);
    CHECK(r.history.size() == 20);
  }
  CHECK(hits >= 95);
}

TEST_CASE("best fitness never decreases and runs are reproducible across threads") {
  const auto spec = BenchmarkSpec::rca(8);
  auto n = std::make_shared<const Netlist>(generate_benchmark(spec));
  const auto model = CellTimingModel::default_library();
  const StimulusSet s = generate_stimuli(input_layout(*n), 4000, 3);
  const auto cands = extract_candidates(functional_simulate(*n, s), annotate(n, model, Corner::Aged));
  const auto ctx = FitnessContext::make(n, cands, model, critical_path_delay(*n, model, Corner::Fresh),
                                        s, make_decoding(*n));
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    GaConfig c = small_config(seed);
    c.generations = 15;
    const GaResult a = evolve(c, ctx, 1);
    const GaResult b = evolve(c, ctx, 4);
    for (std::size_t g = 1; g < a.history.size(); ++g)
      CHECK(a.history[g].best_fitness >= a.history[g - 1].best_fitness);
    CHECK(a.best == b.best);
    CHECK(a.best_fitness == b.best_fitness);
    CHECK(a.best_nmed == b.best_nmed);
    CHECK(a.evaluations == b.evaluations);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t g = 0; g < a.history.size(); ++g) {
      CHECK(a.history[g].mean_fitness == b.history[g].mean_fitness);
      CHECK(a.history[g].diversity == b.history[g].diversity);
      CHECK(a.history[g].mutation_probability == b.history[g].mutation_probability);
    }
    if (a.feasible) {
      const Netlist approx = apply_chromosome(*n, a.best, cands);
      CHECK(critical_path_delay(parse_netlist(emit_netlist(approx)), model, Corner::Aged) <= ctx.delay_target);
    }
  }
}

TEST_CASE("no aging: the exact circuit is returned") {
  Toy toy;
  const auto fresh_only = derive_aged_model(toy.model, 1.0);
  const auto ctx = FitnessContext::make(toy.netlist, toy.candidates, fresh_only, toy.ctx.delay_target,
                                        exhaustive_stimuli(*toy.netlist), make_decoding(*toy.netlist));
  const GaResult r = evolve(small_config(1), ctx);
  CHECK(r.feasible);
  CHECK(r.best.count() == 0);
  CHECK(r.best_nmed == 0.0);
  CHECK(r.history.empty());
}

TEST_CASE("initial population") {
  const auto n = std::make_shared<const Netlist>(generate_benchmark(BenchmarkSpec::rca(8)));
  const auto model = CellTimingModel::default_library();
  const AnnotatedDag aged = annotate(n, model, Corner::Aged);
  const auto cands = extract_candidates(functional_simulate(*n, generate_stimuli(input_layout(*n), 2000, 1)), aged);
  std::set<NetId> crit;
  for (NetId id : critical_nets(aged)) crit.insert(id);

  GaConfig all;
  all.init_base_prob = 0.0;
  all.init_critical_prob = 1.0;
  for (const Chromosome& c : initialize_population(all, cands, aged))
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(c.bits[i] == (crit.count(cands[i].target) ? 1 : 0));

  GaConfig def;
  const auto pop = initialize_population(def, cands, aged);
  CHECK(pop == initialize_population(def, cands, aged));
  CHECK(pop.size() == def.population_size);
  double mean = 0.0, var = 0.0, total = 0.0;
  for (const auto& c : cands) {
    const double p = crit.count(c.target) ? def.init_critical_prob : def.init_base_prob;
    mean += p;
    var += p * (1 - p);
  }
  for (const Chromosome& c : pop) {
    CHECK(c.count() >= 1);
    bool any = false;
    for (std::size_t i = 0; i < c.size(); ++i) any = any || (c.bits[i] && crit.count(cands[i].target));
    CHECK(any);
    total += static_cast<double>(c.count());
  }
  const double k = static_cast<double>(pop.size());
  CHECK(std::abs(total - k * mean) <= 3.0 * std::sqrt(k * var));

  try {
    initialize_population(def, {}, aged);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoCriticalPathCandidates);
  }
}

TEST_CASE("configuration validation") {
  GaConfig c;
  c.validate();
  auto bad = [](auto mutate) {
    GaConfig g;
    mutate(g);
    try {
      g.validate();
    } catch (const Error& e) {
      return e.code() == ErrorCode::InvalidConfig;
    }
    return false;
  };
  CHECK(bad([](GaConfig& g) { g.elite_count = g.population_size; }));
  CHECK(bad([](GaConfig& g) { g.elite_count = 0; }));
  CHECK(bad([](GaConfig& g) { g.crossover_probability = 1.5; }));
  CHECK(bad([](GaConfig& g) { g.mutation_probability_max = -0.1; }));
  CHECK(bad([](GaConfig& g) { g.tournament_size = 1; }));
  CHECK(bad([](GaConfig& g) { g.epsilon = 0.0; }));
  CHECK(GaConfig::for_circuit(301).population_size == 128);
  CHECK(GaConfig::for_circuit(300).generations == 100);
}

TEST_CASE("history csv") {
  GaResult r;
  r.history.push_back({1, 2.0, 1.0, 0.5, 0.01, 0.5, 0.3});
  const std::string csv = format_history_csv(r);
  CHECK(csv.rfind("generation,best_fitness,mean_fitness,diversity,mutation_probability,best_nmed,best_aged_cpd\n", 0) == 0);
  CHECK(csv.find("\n1,2,1,0.5,0.01,0.5,0.3\n") != std::string::npos);
}
