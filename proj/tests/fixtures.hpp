#pragma once

#include "agx/candidates.hpp"
#include "agx/ga.hpp"
#include "support.hpp"

namespace agx::testing {

/// Nets are bare primary inputs; traces and arrivals are injected directly.
struct Synthetic {
  std::shared_ptr<const Netlist> netlist;
  TraceSet traces;
  AnnotatedDag aged;

  Synthetic(const std::vector<std::string>& patterns, const std::vector<double>& arrivals) {
    NetlistBuilder b("syn");
    const auto x = b.add_input("x", static_cast<int>(patterns.size()));
    b.add_output("y", x);
    netlist = std::make_shared<const Netlist>(std::move(b).build());
    const std::size_t count = patterns.front().size();
    std::vector<NetId> kept(x.begin(), x.end());
    traces = TraceSet(count, netlist->net_count(), kept, x);
    for (std::size_t i = 0; i < patterns.size(); ++i) {
      auto t = traces.mutable_trace(x[i]);
      for (std::size_t v = 0; v < count; ++v)
        if (patterns[i][v] == '1') t[v / kLanes] |= std::uint64_t{1} << (v % kLanes);
    }
    aged.base = netlist;
    aged.corner = Corner::Aged;
    aged.arrival = arrivals;
  }

  std::vector<ApproximationCandidate> by_map(std::uint64_t seed = 0) const {
    CandidateOptions o;
    o.seed = seed;
    return select_candidates(compute_activity(traces), compute_similarity(traces, aged), aged, o);
  }
  std::vector<ApproximationCandidate> fused(std::uint64_t seed = 0) const {
    CandidateOptions o;
    o.seed = seed;
    return extract_candidates(traces, aged, o);
  }
};

struct Toy {
  std::shared_ptr<const Netlist> netlist = std::make_shared<const Netlist>(toy_circuit());
  CellTimingModel model = CellTimingModel::default_library();
  std::vector<ApproximationCandidate> candidates;
  FitnessContext ctx;

  Toy() {
    const StimulusSet s = exhaustive_stimuli(*netlist);
    CandidateOptions o;
    o.include_primary_inputs = false;
    candidates = extract_candidates(functional_simulate(*netlist, s),
                                    annotate(netlist, model, Corner::Aged), o);
    ctx = FitnessContext::make(netlist, candidates, model,
                               critical_path_delay(*netlist, model, Corner::Fresh), s,
                               make_decoding(*netlist));
  }

  Chromosome chromosome(unsigned mask) const {
    Chromosome c = Chromosome::zeros(candidates.size());
    for (std::size_t i = 0; i < c.size(); ++i) c.bits[i] = (mask >> i) & 1U;
    return c;
  }
};

/// Exhaustive hand evaluation: substitution semantics, explicit path
/// enumeration at the aged corner, integer error sum.
inline FitnessResult toy_oracle(const Toy& toy, const Chromosome& c) {
  const Netlist& n = *toy.netlist;
  std::map<NetId, Replacement> plan;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c.bits[i]) plan[toy.candidates[i].target] = toy.candidates[i].replacement;
  const auto exact = truth_table(n);
  RewirePlan rp;
  rp.assignments = plan;
  const auto approx = substitution_table(n, rp);
  auto word = [](const std::vector<bool>& bits) {
    std::uint64_t v = 0;
    for (std::size_t k = 0; k < bits.size(); ++k) v |= std::uint64_t{bits[k]} << k;
    return v;
  };
  std::uint64_t sum = 0;
  for (std::size_t v = 0; v < exact.size(); ++v) {
    const auto a = word(exact[v]), b = word(approx[v]);
    sum += a > b ? a - b : b - a;
  }
  const Netlist r = apply_rewiring(n, rp);
  std::vector<double> aged(r.node_count());
  for (NodeId g = 0; g < r.node_count(); ++g) aged[g] = toy.model.delay(r.node(g).kind, Corner::Aged);
  FitnessResult f;
  f.aged_cpd = enumerate_longest_path(r, aged);
  f.nmed = static_cast<double>(sum) / (static_cast<double>(exact.size()) * 3.0);
  f.feasible = f.aged_cpd <= toy.ctx.delay_target;
  f.fitness = f.feasible ? 1.0 / (f.nmed + 1e-12) : 0.0;
  return f;
}

}  // namespace agx::testing
