#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <map>
#include <vector>

#include "agx/netlist.hpp"
#include "agx/rng.hpp"
#include "agx/sim.hpp"
#include "agx/timing.hpp"

namespace agx::testing {

inline constexpr GateKind kLogicKinds[] = {
    GateKind::Buf,   GateKind::Inv,  GateKind::And2, GateKind::Nand2, GateKind::Or2,
    GateKind::Nor2,  GateKind::Xor2, GateKind::Xnor2, GateKind::And3, GateKind::Nand3,
    GateKind::Or3,   GateKind::Nor3, GateKind::Mux2,
};

/// Random DAG: `pis`-bit input bus x, `gates` cells drawing inputs from the
/// last `window` nets, output bus y of `pos` distinct nets (gate outputs first).
inline Netlist random_netlist(Rng& rng, int pis, int gates, int pos, int window = 12) {
  NetlistBuilder b("rand");
  std::vector<NetId> nets = b.add_input("x", pis);
  std::vector<NetId> outs;
  for (int g = 0; g < gates; ++g) {
    const GateKind kind = kLogicKinds[uniform_below(rng, std::size(kLogicKinds))];
    std::vector<NetId> in;
    const std::size_t lo = nets.size() > static_cast<std::size_t>(window)
                               ? nets.size() - static_cast<std::size_t>(window)
                               : 0;
    for (int k = 0; k < arity(kind); ++k)
      in.push_back(nets[lo + uniform_below(rng, nets.size() - lo)]);
    const NetId out = b.add_gate(kind, in);
    nets.push_back(out);
    outs.push_back(out);
  }
  std::vector<NetId> y;
  for (int k = 0; k < pos && !outs.empty(); ++k) {
    const std::size_t pick = outs.size() - 1 - uniform_below(rng, std::min<std::size_t>(outs.size(), 6));
    y.push_back(outs[pick]);
    outs.erase(outs.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  b.add_output("y", y);
  return std::move(b).build();
}

/// Recursive per-vector evaluation from the outputs, memoised per call;
/// `override_of` substitutes a net's value before its driver is consulted.
class NaiveEvaluator {
 public:
  using Override = std::function<std::optional<bool>(NetId, const std::function<bool(NetId)>&)>;

  NaiveEvaluator(const Netlist& n, Override override_of = {}) : n_(n), override_(std::move(override_of)) {}

  std::vector<bool> outputs(const std::vector<bool>& pi_bits) {
    memo_.assign(n_.net_count(), -1);
    pi_ = &pi_bits;
    std::vector<bool> out;
    for (NetId po : n_.output_nets()) out.push_back(value(po));
    return out;
  }

  bool value(NetId id) {
    if (memo_[id] >= 0) return memo_[id] != 0;
    bool v = false;
    std::optional<bool> forced;
    if (override_) forced = override_(id, [this](NetId j) { return value(j); });
    if (forced) {
      v = *forced;
    } else if (n_.net(id).driver == kNoDriver) {
      const auto& ins = n_.input_nets();
      const auto it = std::find(ins.begin(), ins.end(), id);
      v = (*pi_)[static_cast<std::size_t>(it - ins.begin())];
    } else {
      const Node& node = n_.node(n_.net(id).driver);
      bool a = false, b = false, c = false;
      const auto in = node.inputs();
      if (in.size() > 0) a = value(in[0]);
      if (in.size() > 1) b = value(in[1]);
      if (in.size() > 2) c = value(in[2]);
      v = eval_gate(node.kind, a, b, c);
    }
    memo_[id] = v ? 1 : 0;
    return v;
  }

 private:
  const Netlist& n_;
  Override override_;
  std::vector<int> memo_;
  const std::vector<bool>* pi_ = nullptr;
};

inline std::vector<bool> bits_of(std::uint64_t v, std::size_t width) {
  std::vector<bool> b(width);
  for (std::size_t i = 0; i < width; ++i) b[i] = (v >> i) & 1U;
  return b;
}

/// Every assignment of the flattened PI bits; vector v sets PI bit i to bit i of v.
inline StimulusSet exhaustive_stimuli(const Netlist& n) {
  const std::size_t width = n.input_nets().size();
  StimulusSet s(input_layout(n), std::size_t{1} << width);
  for (std::size_t v = 0; v < s.count(); ++v)
    for (std::size_t i = 0; i < width; ++i) s.set_bit(i, v, (v >> i) & 1U);
  return s;
}

/// Output bits per vector, by the recursive evaluator, for all input assignments.
inline std::vector<std::vector<bool>> truth_table(const Netlist& n, NaiveEvaluator::Override o = {}) {
  NaiveEvaluator ev(n, std::move(o));
  const std::size_t width = n.input_nets().size();
  std::vector<std::vector<bool>> rows;
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << width); ++v) rows.push_back(ev.outputs(bits_of(v, width)));
  return rows;
}

inline std::vector<std::vector<bool>> truth_table_sim(const Netlist& n) {
  const StimulusSet s = exhaustive_stimuli(n);
  const TraceSet t = functional_simulate(n, s, TraceScope::OutputsOnly);
  std::vector<std::vector<bool>> rows(s.count());
  for (std::size_t v = 0; v < s.count(); ++v)
    for (std::size_t k = 0; k < t.output_nets().size(); ++k)
      rows[v].push_back((t.output_trace(k)[v / kLanes] >> (v % kLanes)) & 1U);
  return rows;
}

/// Longest path by enumerating every input-to-output path explicitly; each
/// path sum accumulates from the launching end.
inline double enumerate_longest_path(const Netlist& n, const std::vector<double>& node_delay) {
  double best = 0.0;
  std::vector<NodeId> stack;  // output side first
  std::function<void(NetId)> walk = [&](NetId net) {
    const NodeId d = n.net(net).driver;
    if (d != kNoDriver) stack.push_back(d);
    if (d == kNoDriver || n.node(d).inputs().empty()) {
      double sum = 0.0;
      for (auto it = stack.rbegin(); it != stack.rend(); ++it) sum = node_delay[*it] + sum;
      best = std::max(best, sum);
    } else {
      for (NetId in : n.node(d).inputs()) walk(in);
    }
    if (d != kNoDriver) stack.pop_back();
  };
  for (NetId po : n.output_nets()) walk(po);
  return best;
}

/// Longest path by memoized recursion from each output back to the inputs.
inline double reference_cpd(const Netlist& n, const CellTimingModel& model, Corner corner) {
  std::vector<double> memo(n.net_count(), -1.0);
  std::function<double(NetId)> arrival = [&](NetId id) -> double {
    if (memo[id] >= 0.0) return memo[id];
    const NodeId d = n.net(id).driver;
    double t = 0.0;
    if (d != kNoDriver && !is_constant(n.node(d).kind)) {
      for (NetId in : n.node(d).inputs()) t = std::max(t, arrival(in));
      t += model.delay(n.node(d).kind, corner);
    }
    return memo[id] = t;
  };
  double cpd = 0.0;
  for (NetId o : n.output_nets()) cpd = std::max(cpd, arrival(o));
  return cpd;
}

/// Random acyclic plan: every source precedes its target in topological position.
inline RewirePlan random_plan(Rng& rng, const Netlist& n) {
  std::vector<NetId> order(n.input_nets().begin(), n.input_nets().end());
  for (NodeId g : n.topo_order()) order.push_back(n.node(g).out);
  RewirePlan plan;
  const std::size_t k = 1 + uniform_below(rng, 4);
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t t = uniform_below(rng, order.size());
    Replacement rep;
    if (t == 0 || uniform_below(rng, 2) == 0) rep = Replacement::constant(uniform_below(rng, 2) == 1);
    else rep = Replacement::net(order[uniform_below(rng, t)]);
    plan.assignments[order[t]] = rep;
  }
  return plan;
}

/// Truth table of `n` with every planned net read through its replacement.
inline std::vector<std::vector<bool>> substitution_table(const Netlist& n, const RewirePlan& plan) {
  return truth_table(n, [&](NetId id, const std::function<bool(NetId)>& value) -> std::optional<bool> {
    auto it = plan.assignments.find(id);
    if (it == plan.assignments.end()) return std::nullopt;
    switch (it->second.kind) {
      case Replacement::Kind::Const0: return false;
      case Replacement::Kind::Const1: return true;
      case Replacement::Kind::Net: return value(it->second.source);
    }
    return std::nullopt;
  });
}

/// Three gates over inputs x[2:0]: n1 = x0 & x1, n2 = n1 ^ x2, n3 = n1 | x2,
/// outputs y = {n3, n2}. Excluding primary inputs leaves three eligible nets.
inline Netlist toy_circuit() {
  NetlistBuilder b("toy");
  const auto x = b.add_input("x", 3);
  const NetId n1 = b.add_gate(GateKind::And2, std::vector<NetId>{x[0], x[1]}, "n1", "g1");
  const NetId n2 = b.add_gate(GateKind::Xor2, std::vector<NetId>{n1, x[2]}, "n2", "g2");
  const NetId n3 = b.add_gate(GateKind::Or2, std::vector<NetId>{n1, x[2]}, "n3", "g3");
  b.add_output("y", {n2, n3});
  return std::move(b).build();
}

}  // namespace agx::testing
