#include "agx/baselines.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <tuple>

#include "agx/parallel.hpp"

namespace agx {

namespace {

void require_inputs(const BaselineInputs& in) {
  if (!in.baseline || !in.model || !in.opt || !in.eval)
    throw Error(ErrorCode::InvalidArgument, "baseline inputs incomplete");
}

std::vector<std::uint64_t> golden_of(const Netlist& n, const StimulusSet& s,
                                     const OutputDecoding& d) {
  return decode_outputs(functional_simulate(n, s, TraceScope::OutputsOnly), d);
}

ErrorMetrics measure(const Netlist& approx, const StimulusSet& s,
                     const std::vector<std::uint64_t>& golden, const BaselineInputs& in) {
  return nmed(golden, golden_of(approx, s, in.decoding), in.decoding, in.metric);
}

}  // namespace

SapScore compute_sap(const Netlist& n, const TraceSet& traces, const OutputDecoding& decoding) {
  const std::size_t nets = n.net_count();
  // Reachable decoded output bits per net as a bit mask, whose value is the significance.
  std::vector<std::uint64_t> reach(nets, 0);
  for (std::size_t k = 0; k < decoding.bits.size(); ++k)
    reach[n.output_nets().at(decoding.bits[k])] |= std::uint64_t{1} << k;
  const auto& topo = n.topo_order();
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    const Node& node = n.node(*it);
    for (NetId in : node.inputs()) reach[in] |= reach[node.out];
  }

  SapScore s;
  s.significance.assign(nets, 0.0);
  s.activity.assign(nets, 0.0);
  s.sap.assign(nets, 0.0);
  const std::size_t count = traces.count();
  for (NetId i = 0; i < nets; ++i) {
    s.significance[i] = static_cast<double>(reach[i]);
    if (!traces.has(i) || count < 2) continue;
    const auto t = traces.trace(i);
    std::uint64_t toggles = 0;
    std::uint64_t carry = 0;  // previous vector's bit
    for (std::size_t w = 0; w < t.size(); ++w) {
      const std::uint64_t prev = (t[w] << 1) | carry;
      std::uint64_t diff = t[w] ^ prev;
      if (w == 0) diff &= ~std::uint64_t{1};
      if (w + 1 == t.size()) diff &= traces.tail_mask();
      toggles += static_cast<std::uint64_t>(std::popcount(diff));
      carry = t[w] >> 63;
    }
    s.activity[i] = static_cast<double>(toggles) / static_cast<double>(count - 1);
    s.sap[i] = s.significance[i] * s.activity[i];
  }
  return s;
}

GlpResult glp(const BaselineInputs& in) {
  require_inputs(in);
  GlpResult r;
  r.netlist = *in.baseline;
  for (;;) {
    r.aged_cpd = critical_path_delay(r.netlist, *in.model, Corner::Aged);
    if (r.aged_cpd <= in.delay_target) break;
    const TraceSet traces = functional_simulate(r.netlist, *in.opt);
    const SapScore sap = compute_sap(r.netlist, traces, in.decoding);
    std::optional<NetId> pick;
    for (NetId i = 0; i < r.netlist.net_count(); ++i) {
      if (r.netlist.is_constant_net(i) || !traces.has(i) || sap.significance[i] == 0.0) continue;
      if (!pick || sap.sap[i] < sap.sap[*pick]) pick = i;
    }
    if (!pick) throw Error(ErrorCode::Stuck, "no net left to prune, aged delay still above target");
    std::uint64_t ones = 0;
    for (std::uint64_t w : traces.trace(*pick)) ones += static_cast<std::uint64_t>(std::popcount(w));
    const bool one = ones * 2 > traces.count();
    RewirePlan plan;
    plan.assignments.emplace(*pick, Replacement::constant(one));
    r.pruned.emplace_back(r.netlist.net(*pick).name, one);
    r.netlist = apply_rewiring(r.netlist, plan);
  }
  r.metrics = measure(r.netlist, *in.eval, golden_of(*in.baseline, *in.eval, in.decoding), in);
  return r;
}

Netlist truncate_inputs(const Netlist& n, const PrecisionConfig& config) {
  if (config.truncated.size() != n.inputs().size())
    throw Error(ErrorCode::InvalidArgument, "one truncation per input bus required");
  RewirePlan plan;
  for (std::size_t b = 0; b < n.inputs().size(); ++b) {
    const Port& p = n.inputs()[b];
    const int t = config.truncated[b];
    if (t < 0 || t > p.width())
      throw Error(ErrorCode::InvalidArgument, "truncation of " + p.name + " exceeds its width");
    for (int k = 0; k < t; ++k) plan.assignments.emplace(p.bits[k], Replacement::constant(false));
  }
  return apply_rewiring(n, plan);
}

ApsResult aps(const BaselineInputs& in) {
  require_inputs(in);
  const Netlist& base = *in.baseline;
  std::vector<int> radix;
  std::size_t tuples = 1;
  for (const Port& p : base.inputs()) {
    radix.push_back(p.width() + 1);
    tuples *= static_cast<std::size_t>(p.width() + 1);
  }
  auto tuple_of = [&](std::size_t idx) {
    PrecisionConfig c;
    for (int r : radix) {
      c.truncated.push_back(static_cast<int>(idx % static_cast<std::size_t>(r)));
      idx /= static_cast<std::size_t>(r);
    }
    return c;
  };

  struct Outcome {
    bool feasible = false;
    double nmed = 0.0;
    double cpd = 0.0;
  };
  const auto golden = golden_of(base, *in.opt, in.decoding);
  std::vector<Outcome> outcomes(tuples);
  parallel_for(tuples, in.threads, [&](std::size_t idx) {
    const Netlist t = truncate_inputs(base, tuple_of(idx));
    Outcome& o = outcomes[idx];
    o.cpd = critical_path_delay(t, *in.model, Corner::Aged);
    if (o.cpd > in.delay_target) return;
    o.feasible = true;
    o.nmed = measure(t, *in.opt, golden, in).nmed;
  });

  ApsResult r;
  r.tuples = tuples;
  std::optional<std::size_t> best;
  auto key = [&](std::size_t idx) {
    const auto c = tuple_of(idx);
    int bits = 0;
    for (int t : c.truncated) bits += t;
    return std::make_tuple(outcomes[idx].nmed, bits, c.truncated);
  };
  for (std::size_t idx = 0; idx < tuples; ++idx) {
    if (!outcomes[idx].feasible) continue;
    ++r.feasible_tuples;
    if (!best || key(idx) < key(*best)) best = idx;
  }
  if (!best) throw Error(ErrorCode::Infeasible, "no truncation meets the aged delay target");
  r.config = tuple_of(*best);
  r.netlist = truncate_inputs(base, r.config);
  r.opt_nmed = outcomes[*best].nmed;
  r.aged_cpd = outcomes[*best].cpd;
  r.metrics = measure(r.netlist, *in.eval, golden_of(base, *in.eval, in.decoding), in);
  return r;
}

}  // namespace agx
