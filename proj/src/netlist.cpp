#include "agx/netlist.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>
#include <sstream>
#include <tuple>

namespace agx {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownCell: return "UnknownCell";
    case ErrorCode::MultipleDrivers: return "MultipleDrivers";
    case ErrorCode::UndeclaredNet: return "UndeclaredNet";
    case ErrorCode::UndrivenNet: return "UndrivenNet";
    case ErrorCode::UnconnectedPin: return "UnconnectedPin";
    case ErrorCode::CombinationalLoop: return "CombinationalLoop";
    case ErrorCode::CycleIntroduced: return "CycleIntroduced";
    case ErrorCode::UnknownTarget: return "UnknownTarget";
    case ErrorCode::MissingCellDelay: return "MissingCellDelay";
    case ErrorCode::InvalidFactor: return "InvalidFactor";
    case ErrorCode::UnknownInstance: return "UnknownInstance";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::LayoutMismatch: return "LayoutMismatch";
    case ErrorCode::EmptyTraces: return "EmptyTraces";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyStream: return "EmptyStream";
    case ErrorCode::UnknownNet: return "UnknownNet";
    case ErrorCode::NoCriticalPathCandidates: return "NoCriticalPathCandidates";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::Stuck: return "Stuck";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Error";
}

// ---------------------------------------------------------------------------
// Gate tables

namespace {

struct KindInfo {
  std::string_view name;
  int arity;
};

constexpr std::array<KindInfo, kGateKindCount> kKinds{{
    {"INPUT", 0},
    {"OUTPUT", 1},
    {"CONST0", 0},
    {"CONST1", 0},
    {"BUF", 1},
    {"INV", 1},
    {"AND2", 2},
    {"NAND2", 2},
    {"OR2", 2},
    {"NOR2", 2},
    {"XOR2", 2},
    {"XNOR2", 2},
    {"AND3", 3},
    {"NAND3", 3},
    {"OR3", 3},
    {"NOR3", 3},
    {"MUX2", 3},
}};

constexpr std::array<std::string_view, 0> kPins0{};
constexpr std::array<std::string_view, 1> kPins1{"A"};
constexpr std::array<std::string_view, 2> kPins2{"A", "B"};
constexpr std::array<std::string_view, 3> kPins3{"A", "B", "C"};
constexpr std::array<std::string_view, 3> kPinsMux{"A", "B", "S"};

}  // namespace

int arity(GateKind kind) { return kKinds[static_cast<std::size_t>(kind)].arity; }

bool is_logic(GateKind kind) {
  return kind != GateKind::Input && kind != GateKind::Output && !is_constant(kind);
}

bool is_constant(GateKind kind) { return kind == GateKind::Const0 || kind == GateKind::Const1; }

std::string_view gate_name(GateKind kind) { return kKinds[static_cast<std::size_t>(kind)].name; }

std::optional<GateKind> gate_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kKinds.size(); ++i)
    if (kKinds[i].name == name) return static_cast<GateKind>(i);
  return std::nullopt;
}

std::span<const std::string_view> input_pins(GateKind kind) {
  if (kind == GateKind::Mux2) return kPinsMux;
  switch (arity(kind)) {
    case 0: return kPins0;
    case 1: return kPins1;
    case 2: return kPins2;
    default: return kPins3;
  }
}

bool eval_gate(GateKind kind, bool a, bool b, bool c) {
  auto w = [](bool x) { return x ? ~std::uint64_t{0} : std::uint64_t{0}; };
  return eval_gate_word(kind, w(a), w(b), w(c)) & 1U;
}

std::string Port::bit_name(int k) const {
  if (!is_bus) return name;
  return name + "[" + std::to_string(index_of(k)) + "]";
}

// ---------------------------------------------------------------------------
// Netlist

Netlist::Netlist(std::string name, std::vector<Net> nets, std::vector<Node> nodes,
                 std::vector<Port> inputs, std::vector<Port> outputs)
    : name_(std::move(name)),
      nets_(std::move(nets)),
      nodes_(std::move(nodes)),
      inputs_(std::move(inputs)),
      outputs_(std::move(outputs)) {
  build_indices();
}

void Netlist::build_indices() {
  const auto net_count = static_cast<NetId>(nets_.size());
  auto check_net = [&](NetId id, const std::string& where) {
    if (id >= net_count)
      throw Error(ErrorCode::UndeclaredNet, "net id " + std::to_string(id) + " in " + where);
  };

  net_index_.clear();
  net_index_.reserve(nets_.size());
  for (NetId i = 0; i < net_count; ++i) {
    if (!net_index_.emplace(nets_[i].name, i).second)
      throw Error(ErrorCode::MultipleDrivers, "duplicate net name '" + nets_[i].name + "'");
  }

  for (NodeId g = 0; g < nodes_.size(); ++g) {
    const Node& node = nodes_[g];
    if (!is_logic(node.kind) && !is_constant(node.kind))
      throw Error(ErrorCode::UnknownCell,
                  "kind " + std::string(gate_name(node.kind)) + " cannot be instantiated");
    for (NetId in : node.inputs()) check_net(in, node.name);
    check_net(node.out, node.name);
    if (nets_[node.out].driver != g)
      throw Error(ErrorCode::MultipleDrivers, nets_[node.out].name);
  }

  std::vector<char> is_pi(nets_.size(), 0);
  input_nets_.clear();
  for (const Port& p : inputs_) {
    for (NetId b : p.bits) {
      check_net(b, p.name);
      if (nets_[b].driver != kNoDriver || is_pi[b])
        throw Error(ErrorCode::MultipleDrivers, nets_[b].name);
      is_pi[b] = 1;
      input_nets_.push_back(b);
    }
  }
  for (NetId i = 0; i < net_count; ++i) {
    const Net& net = nets_[i];
    if (net.driver == kNoDriver) {
      if (!is_pi[i]) throw Error(ErrorCode::UndrivenNet, net.name);
    } else if (net.driver >= nodes_.size() || nodes_[net.driver].out != i) {
      throw Error(ErrorCode::MultipleDrivers, net.name);
    }
  }
  output_nets_.clear();
  for (const Port& p : outputs_)
    for (NetId b : p.bits) {
      check_net(b, p.name);
      output_nets_.push_back(b);
    }

  // fanout (CSR)
  fanout_begin_.assign(nets_.size() + 1, 0);
  for (const Node& node : nodes_)
    for (NetId in : node.inputs()) ++fanout_begin_[in + 1];
  for (std::size_t i = 0; i < nets_.size(); ++i) fanout_begin_[i + 1] += fanout_begin_[i];
  fanout_.assign(fanout_begin_.back(), 0);
  {
    std::vector<std::uint32_t> cursor(fanout_begin_.begin(), fanout_begin_.end() - 1);
    for (NodeId g = 0; g < nodes_.size(); ++g)
      for (NetId in : nodes_[g].inputs()) fanout_[cursor[in]++] = g;
  }

  topo_ = topological_order(*this);
  level_.assign(nodes_.size(), 0);
  for (NodeId g : topo_) {
    std::uint32_t lvl = 0;
    for (NetId in : nodes_[g].inputs()) {
      NodeId d = nets_[in].driver;
      if (d != kNoDriver) lvl = std::max(lvl, level_[d] + 1);
    }
    level_[g] = lvl;
  }
}

std::optional<NetId> Netlist::find_net(std::string_view name) const {
  auto it = net_index_.find(std::string(name));
  if (it == net_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<NodeId> Netlist::find_node(std::string_view name) const {
  for (NodeId g = 0; g < nodes_.size(); ++g)
    if (nodes_[g].name == name) return g;
  return std::nullopt;
}

const Port* Netlist::find_output(std::string_view name) const {
  for (const Port& p : outputs_)
    if (p.name == name) return &p;
  return nullptr;
}

const Port* Netlist::find_input(std::string_view name) const {
  for (const Port& p : inputs_)
    if (p.name == name) return &p;
  return nullptr;
}

std::size_t Netlist::gate_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return is_logic(n.kind); }));
}

std::vector<NodeId> topological_order(const Netlist& n) {
  const auto nodes = n.nodes();
  const auto nets = n.nets();
  std::vector<std::uint32_t> pending(nodes.size(), 0);
  for (NodeId g = 0; g < nodes.size(); ++g)
    for (NetId in : nodes[g].inputs())
      if (nets[in].driver != kNoDriver) ++pending[g];

  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (NodeId g = 0; g < nodes.size(); ++g)
    if (pending[g] == 0) ready.push(g);

  std::vector<NodeId> order;
  order.reserve(nodes.size());
  while (!ready.empty()) {
    NodeId g = ready.top();
    ready.pop();
    order.push_back(g);
    for (NodeId c : n.fanout(nodes[g].out))
      if (--pending[c] == 0) ready.push(c);
  }
  if (order.size() == nodes.size()) return order;

  // Walk backwards through unfinished nodes until one repeats.
  NodeId start = 0;
  while (pending[start] == 0) ++start;
  std::vector<NodeId> walk;
  std::vector<int> seen(nodes.size(), -1);
  NodeId cur = start;
  while (seen[cur] < 0) {
    seen[cur] = static_cast<int>(walk.size());
    walk.push_back(cur);
    for (NetId in : nodes[cur].inputs()) {
      NodeId d = nets[in].driver;
      if (d != kNoDriver && pending[d] != 0) {
        cur = d;
        break;
      }
    }
  }
  std::string listing;
  for (std::size_t i = static_cast<std::size_t>(seen[cur]); i < walk.size(); ++i) {
    if (!listing.empty()) listing += " <- ";
    listing += nets[nodes[walk[i]].out].name;
  }
  throw Error(ErrorCode::CombinationalLoop, listing);
}

// ---------------------------------------------------------------------------
// Builder

std::vector<NetId> NetlistBuilder::add_input(const std::string& name, int width) {
  Port p;
  p.name = name;
  p.is_bus = width > 0;
  const int w = std::max(width, 1);
  p.msb = p.is_bus ? w - 1 : 0;
  p.lsb = 0;
  for (int k = 0; k < w; ++k) p.bits.push_back(new_net(p.bit_name(k), kNoDriver));
  inputs_.push_back(p);
  return p.bits;
}

NetId NetlistBuilder::new_net(std::string name, NodeId driver) {
  if (name.empty()) name = "n" + std::to_string(auto_net_++);
  nets_.push_back(Net{std::move(name), driver});
  return static_cast<NetId>(nets_.size() - 1);
}

NetId NetlistBuilder::add_gate(GateKind kind, std::span<const NetId> inputs, std::string out_name,
                               std::string inst_name) {
  if (static_cast<int>(inputs.size()) != arity(kind))
    throw Error(ErrorCode::UnconnectedPin, std::string(gate_name(kind)) + " pin count");
  Node node;
  node.kind = kind;
  node.name = inst_name.empty() ? "U" + std::to_string(auto_node_++) : std::move(inst_name);
  std::copy(inputs.begin(), inputs.end(), node.in.begin());
  const auto id = static_cast<NodeId>(nodes_.size());
  node.out = new_net(std::move(out_name), id);
  nodes_.push_back(std::move(node));
  return nodes_.back().out;
}

NetId NetlistBuilder::add_const(bool value, std::string out_name) {
  if (out_name.empty()) out_name = value ? "tie1_" + std::to_string(auto_net_++)
                                         : "tie0_" + std::to_string(auto_net_++);
  return add_gate(value ? GateKind::Const1 : GateKind::Const0, {}, std::move(out_name),
                  "const$" + out_name);
}

void NetlistBuilder::add_output(const std::string& name, std::vector<NetId> bits, bool scalar) {
  Port p;
  p.name = name;
  p.is_bus = !scalar;
  p.msb = static_cast<int>(bits.size()) - 1;
  p.lsb = 0;
  p.bits = std::move(bits);
  outputs_.push_back(std::move(p));
}

Netlist NetlistBuilder::build() && {
  return Netlist(std::move(name_), std::move(nets_), std::move(nodes_), std::move(inputs_),
                 std::move(outputs_));
}

// ---------------------------------------------------------------------------
// Structural equality

bool structurally_equal(const Netlist& a, const Netlist& b, std::string* why) {
  auto fail = [&](std::string msg) {
    if (why) *why = std::move(msg);
    return false;
  };
  auto port_sig = [](const Netlist& n, const std::vector<Port>& ports) {
    std::vector<std::string> sig;
    for (const Port& p : ports) {
      std::string s = p.name + (p.is_bus ? "[" + std::to_string(p.msb) + ":" +
                                               std::to_string(p.lsb) + "]"
                                         : "");
      for (NetId bit : p.bits) s += " " + n.net(bit).name;
      sig.push_back(std::move(s));
    }
    return sig;
  };
  if (port_sig(a, a.inputs()) != port_sig(b, b.inputs())) return fail("input ports differ");
  if (port_sig(a, a.outputs()) != port_sig(b, b.outputs())) return fail("output ports differ");

  auto net_names = [](const Netlist& n) {
    std::vector<std::string> v;
    for (const Net& net : n.nets()) v.push_back(net.name);
    std::sort(v.begin(), v.end());
    return v;
  };
  if (net_names(a) != net_names(b)) return fail("net sets differ");

  auto node_sig = [](const Netlist& n) {
    std::vector<std::string> v;
    for (const Node& node : n.nodes()) {
      std::string s = is_constant(node.kind) ? std::string() : node.name;
      s += " " + std::string(gate_name(node.kind));
      for (NetId in : node.inputs()) s += " " + n.net(in).name;
      s += " -> " + n.net(node.out).name;
      v.push_back(std::move(s));
    }
    std::sort(v.begin(), v.end());
    return v;
  };
  auto sa = node_sig(a), sb = node_sig(b);
  if (sa != sb) {
    auto [ia, ib] = std::mismatch(sa.begin(), sa.end(), sb.begin(), sb.end());
    return fail("node multisets differ at '" + (ia == sa.end() ? std::string("<end>") : *ia) +
                "' vs '" + (ib == sb.end() ? std::string("<end>") : *ib) + "'");
  }
  return true;
}

// ---------------------------------------------------------------------------
// Rewiring

namespace {

std::string unique_name(const Netlist& n, const std::string& base,
                        const std::vector<Net>& extra) {
  auto taken = [&](const std::string& s) {
    if (n.find_net(s)) return true;
    return std::any_of(extra.begin(), extra.end(), [&](const Net& e) { return e.name == s; });
  };
  if (!taken(base)) return base;
  for (int k = 1;; ++k) {
    std::string cand = base + "_" + std::to_string(k);
    if (!taken(cand)) return cand;
  }
}

}  // namespace

Netlist apply_rewiring(const Netlist& n, const RewirePlan& plan, const RewireOptions& opts) {
  const auto net_count = static_cast<NetId>(n.net_count());
  for (const auto& [target, rep] : plan.assignments) {
    if (target >= net_count)
      throw Error(ErrorCode::UnknownTarget, "net id " + std::to_string(target));
    if (rep.kind == Replacement::Kind::Net && rep.source >= net_count)
      throw Error(ErrorCode::UnknownTarget, "replacement net id " + std::to_string(rep.source));
  }

  std::vector<Net> nets(n.nets().begin(), n.nets().end());
  std::vector<Node> nodes(n.nodes().begin(), n.nodes().end());

  // One shared constant net per value; reuse an existing tie cell if present.
  std::array<NetId, 2> const_net{kNoDriver, kNoDriver};
  for (const Node& node : nodes) {
    if (node.kind == GateKind::Const0 && const_net[0] == kNoDriver) const_net[0] = node.out;
    if (node.kind == GateKind::Const1 && const_net[1] == kNoDriver) const_net[1] = node.out;
  }
  std::vector<Net> added;
  auto constant_net = [&](bool v) -> NetId {
    NetId& slot = const_net[v ? 1 : 0];
    if (slot == kNoDriver) {
      Node tie;
      tie.kind = v ? GateKind::Const1 : GateKind::Const0;
      std::string name = unique_name(n, v ? "_const1" : "_const0", added);
      tie.name = "const$" + name;
      slot = static_cast<NetId>(nets.size());
      tie.out = slot;
      nets.push_back(Net{name, static_cast<NodeId>(nodes.size())});
      added.push_back(nets.back());
      nodes.push_back(std::move(tie));
    }
    return slot;
  };

  // Resolve replacement chains; arrival-time ordering makes them finite, a
  // depth bound catches plans that violate it.
  std::vector<NetId> resolved(nets.size(), kNoDriver);
  std::function<NetId(NetId, std::size_t)> resolve = [&](NetId id, std::size_t depth) -> NetId {
    if (id < resolved.size() && resolved[id] != kNoDriver) return resolved[id];
    if (depth > plan.assignments.size())
      throw Error(ErrorCode::CycleIntroduced, "replacement chain through " + nets[id].name);
    NetId out = id;
    if (auto it = plan.assignments.find(id); it != plan.assignments.end()) {
      const Replacement& r = it->second;
      out = r.is_constant() ? constant_net(r.kind == Replacement::Kind::Const1)
                            : resolve(r.source, depth + 1);
    }
    if (id < resolved.size()) resolved[id] = out;
    return out;
  };
  for (NetId i = 0; i < net_count; ++i) resolve(i, 0);
  resolved.resize(nets.size());
  for (NetId i = net_count; i < nets.size(); ++i) resolved[i] = i;

  for (Node& node : nodes)
    for (int k = 0; k < arity(node.kind); ++k) node.in[k] = resolved[node.in[k]];
  std::vector<Port> inputs = n.inputs();
  std::vector<Port> outputs = n.outputs();
  for (Port& p : outputs)
    for (NetId& b : p.bits) b = resolved[b];

  // Rebuild driver/fanout views of the modified graph and order it.
  auto order_nodes = [&](const std::vector<Node>& ns) {
    std::vector<std::uint32_t> pending(ns.size(), 0);
    std::vector<std::vector<NodeId>> fan(nets.size());
    for (NodeId g = 0; g < ns.size(); ++g)
      for (NetId in : ns[g].inputs()) {
        fan[in].push_back(g);
        if (nets[in].driver != kNoDriver) ++pending[g];
      }
    std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
    for (NodeId g = 0; g < ns.size(); ++g)
      if (pending[g] == 0) ready.push(g);
    std::vector<NodeId> order;
    order.reserve(ns.size());
    while (!ready.empty()) {
      NodeId g = ready.top();
      ready.pop();
      order.push_back(g);
      for (NodeId c : fan[ns[g].out])
        if (--pending[c] == 0) ready.push(c);
    }
    if (order.size() != ns.size())
      throw Error(ErrorCode::CycleIntroduced, "rewired graph of " + n.name() + " is cyclic");
    return order;
  };
  const std::vector<NodeId> order = order_nodes(nodes);

  if (opts.propagate_constants) {
    // value: -1 unknown, else the forced constant. One topological pass reaches
    // the fixpoint because forcing depends only on fanin.
    std::vector<int> value(nets.size(), -1);
    std::vector<NetId> redirect(nets.size());
    for (NetId i = 0; i < nets.size(); ++i) redirect[i] = i;
    for (NetId c : const_net)
      if (c != kNoDriver) value[c] = nodes[nets[c].driver].kind == GateKind::Const1 ? 1 : 0;
    auto tie = [&](bool v) {
      const NetId c = constant_net(v);
      while (redirect.size() < nets.size()) {
        redirect.push_back(static_cast<NetId>(redirect.size()));
        value.push_back(-1);
      }
      value[c] = v ? 1 : 0;
      return c;
    };
    for (NodeId g : order) {
      Node& node = nodes[g];
      const int ar = arity(node.kind);
      for (int k = 0; k < ar; ++k) node.in[k] = redirect[node.in[k]];
      if (is_constant(node.kind)) {
        value[node.out] = node.kind == GateKind::Const1 ? 1 : 0;
        continue;
      }
      int known_mask = 0;
      std::array<bool, 3> v{};
      for (int k = 0; k < ar; ++k)
        if (value[node.in[k]] >= 0) {
          known_mask |= 1 << k;
          v[k] = value[node.in[k]] == 1;
        }
      if (known_mask == 0) continue;
      int forced = -1;
      bool uniform = true;
      for (int combo = 0; combo < (1 << ar) && uniform; ++combo) {
        std::array<bool, 3> x = v;
        for (int k = 0; k < ar; ++k)
          if (!(known_mask & (1 << k))) x[k] = (combo >> k) & 1;
        const int r = eval_gate(node.kind, x[0], x[1], x[2]) ? 1 : 0;
        if (forced < 0) forced = r;
        else if (forced != r) uniform = false;
      }
      if (uniform) {
        const NetId out = node.out;  // tie() may grow `nodes`
        value[out] = forced;
        const NetId c = tie(forced == 1);
        redirect[out] = c;
      }
    }
    for (Port& p : outputs)
      for (NetId& b : p.bits) b = redirect[b];
  }

  // Liveness: backwards from outputs. Primary inputs always survive.
  std::vector<char> live_node(nodes.size(), 0);
  std::vector<char> live_net(nets.size(), 0);
  if (opts.remove_dead) {
    std::vector<NetId> stack;
    for (const Port& p : outputs)
      for (NetId b : p.bits) stack.push_back(b);
    while (!stack.empty()) {
      NetId id = stack.back();
      stack.pop_back();
      if (live_net[id]) continue;
      live_net[id] = 1;
      NodeId d = nets[id].driver;
      if (d != kNoDriver && !live_node[d]) {
        live_node[d] = 1;
        for (NetId in : nodes[d].inputs()) stack.push_back(in);
      }
    }
  } else {
    std::fill(live_node.begin(), live_node.end(), 1);
    std::fill(live_net.begin(), live_net.end(), 1);
  }
  for (const Port& p : inputs)
    for (NetId b : p.bits) live_net[b] = 1;

  std::vector<NetId> net_map(nets.size(), kNoDriver);
  std::vector<Net> out_nets;
  for (NetId i = 0; i < nets.size(); ++i)
    if (live_net[i]) {
      net_map[i] = static_cast<NetId>(out_nets.size());
      out_nets.push_back(nets[i]);
    }
  std::vector<NodeId> node_map(nodes.size(), kNoDriver);
  std::vector<Node> out_nodes;
  for (NodeId g = 0; g < nodes.size(); ++g)
    if (live_node[g]) {
      node_map[g] = static_cast<NodeId>(out_nodes.size());
      Node node = nodes[g];
      for (int k = 0; k < arity(node.kind); ++k) node.in[k] = net_map[node.in[k]];
      node.out = net_map[node.out];
      out_nodes.push_back(std::move(node));
    }
  for (Net& net : out_nets)
    if (net.driver != kNoDriver) net.driver = node_map[net.driver];
  for (Port& p : inputs)
    for (NetId& b : p.bits) b = net_map[b];
  for (Port& p : outputs)
    for (NetId& b : p.bits) b = net_map[b];

  try {
    return Netlist(n.name(), std::move(out_nets), std::move(out_nodes), std::move(inputs),
                   std::move(outputs));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CombinationalLoop) throw Error(ErrorCode::CycleIntroduced, e.what());
    throw;
  }
}

}  // namespace agx
