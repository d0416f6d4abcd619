#include "agx/timing.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "agx/rng.hpp"

namespace agx {

std::string_view to_string(Corner c) {
  switch (c) {
    case Corner::Fresh: return "fresh";
    case Corner::Aged: return "aged";
    case Corner::Custom: return "custom";
  }
  return "custom";
}

void CellTimingModel::set(GateKind kind, double fresh, double aged) {
  if (!is_logic(kind))
    throw Error(ErrorCode::InvalidModel, std::string(gate_name(kind)) + " has no delay entry");
  if (!(fresh > 0.0) || !(aged >= fresh) || !std::isfinite(aged))
    throw Error(ErrorCode::InvalidModel, std::string(gate_name(kind)) +
                                             ": need aged >= fresh > 0, got fresh=" +
                                             std::to_string(fresh) + " aged=" + std::to_string(aged));
  table_[static_cast<std::size_t>(kind)] = Entry{fresh, aged};
}

bool CellTimingModel::has(GateKind kind) const {
  return !is_logic(kind) || table_[static_cast<std::size_t>(kind)].has_value();
}

double CellTimingModel::fresh(GateKind kind) const { return delay(kind, Corner::Fresh); }
double CellTimingModel::aged(GateKind kind) const { return delay(kind, Corner::Aged); }

double CellTimingModel::delay(GateKind kind, Corner corner) const {
  if (!is_logic(kind)) return 0.0;
  const auto& e = table_[static_cast<std::size_t>(kind)];
  if (!e) throw Error(ErrorCode::MissingCellDelay, std::string(gate_name(kind)));
  return corner == Corner::Aged ? e->aged : e->fresh;
}

CellTimingModel CellTimingModel::default_library() {
  // Generic static-CMOS ratios, ns.
  static constexpr std::pair<GateKind, double> kFresh[] = {
      {GateKind::Buf, 0.030},   {GateKind::Inv, 0.015},   {GateKind::Nand2, 0.020},
      {GateKind::Nor2, 0.025},  {GateKind::And2, 0.030},  {GateKind::Or2, 0.035},
      {GateKind::Xor2, 0.045},  {GateKind::Xnor2, 0.045}, {GateKind::Nand3, 0.028},
      {GateKind::Nor3, 0.036},  {GateKind::And3, 0.038},  {GateKind::Or3, 0.045},
      {GateKind::Mux2, 0.048},
  };
  CellTimingModel m;
  for (auto [kind, d] : kFresh) m.set(kind, d, d * kDefaultAgingFactor);
  return m;
}

CellTimingModel derive_aged_model(const CellTimingModel& fresh, double factor) {
  return derive_aged_model(fresh, {}, factor);
}

CellTimingModel derive_aged_model(const CellTimingModel& fresh,
                                  const std::map<GateKind, double>& factors, double fallback) {
  auto check = [](double f) {
    if (!(f >= 1.0) || !std::isfinite(f))
      throw Error(ErrorCode::InvalidFactor, "aging factor must be >= 1, got " + std::to_string(f));
  };
  check(fallback);
  for (const auto& [kind, f] : factors) check(f);
  CellTimingModel out;
  for (std::size_t i = 0; i < kGateKindCount; ++i) {
    const auto kind = static_cast<GateKind>(i);
    if (!is_logic(kind) || !fresh.has(kind)) continue;
    auto it = factors.find(kind);
    const double f = it == factors.end() ? fallback : it->second;
    const double d = fresh.fresh(kind);
    out.set(kind, d, d * f);
  }
  return out;
}

CellTimingModel parse_timing_model(std::string_view text, double aging_factor) {
  if (!(aging_factor >= 1.0))
    throw Error(ErrorCode::InvalidFactor, "aging factor must be >= 1");
  CellTimingModel m;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string kind_name;
    if (!(ls >> kind_name)) continue;
    auto kind = gate_from_name(kind_name);
    if (!kind || !is_logic(*kind))
      throw ParseError(ErrorCode::UnknownCell, lineno, 1, "cell '" + kind_name + "'");
    double fresh = 0.0;
    if (!(ls >> fresh))
      throw ParseError(ErrorCode::SyntaxError, lineno, 1, "expected fresh delay");
    double aged = fresh * aging_factor;
    std::string extra;
    if (ls >> extra) {
      try {
        std::size_t used = 0;
        aged = std::stod(extra, &used);
        if (used != extra.size()) throw std::invalid_argument(extra);
      } catch (const std::exception&) {
        throw ParseError(ErrorCode::SyntaxError, lineno, 1, "bad aged delay '" + extra + "'");
      }
      if (ls >> extra) throw ParseError(ErrorCode::SyntaxError, lineno, 1, "trailing text");
    }
    try {
      m.set(*kind, fresh, aged);
    } catch (const Error& e) {
      throw ParseError(ErrorCode::InvalidModel, lineno, 1, e.what());
    }
  }
  return m;
}

CellTimingModel read_timing_file(const std::string& path, double aging_factor) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_timing_model(ss.str(), aging_factor);
  } catch (const ParseError& e) {
    throw ParseError(e.code(), e.line(), e.column(), e.detail(), path);
  }
}

std::string format_timing_model(const CellTimingModel& model) {
  std::ostringstream os;
  os << "# kind fresh_ns aged_ns\n" << std::setprecision(17);
  for (std::size_t i = 0; i < kGateKindCount; ++i) {
    const auto kind = static_cast<GateKind>(i);
    if (!is_logic(kind) || !model.has(kind)) continue;
    os << gate_name(kind) << " " << model.fresh(kind) << " " << model.aged(kind) << "\n";
  }
  return os.str();
}

namespace {

void run_sta(AnnotatedDag& dag) {
  const Netlist& n = *dag.base;
  dag.arrival.assign(n.net_count(), 0.0);
  for (NodeId g : n.topo_order()) {
    const Node& node = n.node(g);
    double in_max = 0.0;
    for (NetId in : node.inputs()) in_max = std::max(in_max, dag.arrival[in]);
    dag.arrival[node.out] = dag.delay[g] + in_max;
  }
  dag.cpd = 0.0;
  dag.critical_path.clear();
  std::optional<NetId> end;
  for (NetId po : n.output_nets())
    if (!end || dag.arrival[po] > dag.cpd) {
      end = po;
      dag.cpd = dag.arrival[po];
    }
  if (!end) return;
  NetId cur = *end;
  while (n.net(cur).driver != kNoDriver) {
    const NodeId g = n.net(cur).driver;
    const Node& node = n.node(g);
    if (!is_logic(node.kind)) break;
    dag.critical_path.push_back(g);
    const auto ins = node.inputs();
    NetId best = ins[0];
    for (NetId in : ins)
      if (dag.arrival[in] > dag.arrival[best]) best = in;
    cur = best;
  }
  std::reverse(dag.critical_path.begin(), dag.critical_path.end());
}

}  // namespace

AnnotatedDag annotate(std::shared_ptr<const Netlist> n, const CellTimingModel& model,
                      Corner corner) {
  AnnotatedDag dag;
  dag.base = std::move(n);
  dag.corner = corner;
  const Netlist& nl = *dag.base;
  dag.delay.resize(nl.node_count());
  for (NodeId g = 0; g < nl.node_count(); ++g) dag.delay[g] = model.delay(nl.node(g).kind, corner);
  run_sta(dag);
  return dag;
}

AnnotatedDag annotate(const Netlist& n, const CellTimingModel& model, Corner corner) {
  return annotate(std::make_shared<const Netlist>(n), model, corner);
}

AnnotatedDag restatic(const AnnotatedDag& dag, const std::map<NodeId, double>& overrides) {
  std::vector<double> delays = dag.delay;
  for (const auto& [g, d] : overrides) {
    if (g >= delays.size()) throw Error(ErrorCode::UnknownInstance, "node id " + std::to_string(g));
    delays[g] = d;
  }
  AnnotatedDag out = restatic(dag, std::move(delays));
  if (overrides.empty()) out.corner = dag.corner;
  return out;
}

AnnotatedDag restatic(const AnnotatedDag& dag, std::vector<double> delays) {
  if (delays.size() != dag.delay.size())
    throw Error(ErrorCode::UnknownInstance, "delay vector size mismatch");
  AnnotatedDag out;
  out.base = dag.base;
  out.corner = Corner::Custom;
  out.delay = std::move(delays);
  run_sta(out);
  return out;
}

double critical_path_delay(const Netlist& n, const CellTimingModel& model, Corner corner) {
  std::array<double, kGateKindCount> per_kind{};
  for (std::size_t i = 0; i < kGateKindCount; ++i) {
    const auto kind = static_cast<GateKind>(i);
    if (is_logic(kind) && model.has(kind)) per_kind[i] = model.delay(kind, corner);
  }
  std::vector<double> arrival(n.net_count(), 0.0);
  for (NodeId g : n.topo_order()) {
    const Node& node = n.node(g);
    if (!model.has(node.kind)) model.delay(node.kind, corner);  // throws
    double in_max = 0.0;
    for (NetId in : node.inputs()) in_max = std::max(in_max, arrival[in]);
    arrival[node.out] = per_kind[static_cast<std::size_t>(node.kind)] + in_max;
  }
  double cpd = 0.0;
  for (NetId po : n.output_nets()) cpd = std::max(cpd, arrival[po]);
  return cpd;
}

std::vector<NetId> critical_nets(const AnnotatedDag& dag) {
  std::vector<NetId> nets;
  if (dag.critical_path.empty()) {
    // Output driven straight from an input or a constant.
    const Netlist& n = dag.netlist();
    for (NetId po : n.output_nets())
      if (dag.arrival[po] == dag.cpd) return {po};
    return nets;
  }
  const Netlist& n = dag.netlist();
  const Node& first = n.node(dag.critical_path.front());
  NetId launch = first.inputs()[0];
  for (NetId in : first.inputs())
    if (dag.arrival[in] > dag.arrival[launch]) launch = in;
  nets.push_back(launch);
  for (NodeId g : dag.critical_path) nets.push_back(n.node(g).out);
  return nets;
}

VariationSample sample_variation(const AnnotatedDag& dag, double sigma_ratio, std::uint64_t seed) {
  if (!(sigma_ratio >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "sigma_ratio must be non-negative");
  VariationSample s;
  s.seed = seed;
  s.sigma_ratio = sigma_ratio;
  s.delays.resize(dag.delay.size());
  Rng rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  for (std::size_t g = 0; g < dag.delay.size(); ++g) {
    const double d = dag.delay[g];
    if (d <= 0.0 || sigma_ratio == 0.0) {
      s.delays[g] = d;
      continue;
    }
    double draw;
    do {
      draw = d + sigma_ratio * d * unit(rng);
    } while (!(draw > 0.0));
    s.delays[g] = draw;
  }
  return s;
}

}  // namespace agx
