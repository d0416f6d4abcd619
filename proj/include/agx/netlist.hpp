#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "agx/error.hpp"

namespace agx {

// ---------------------------------------------------------------------------
// Gate kinds
// ---------------------------------------------------------------------------

enum class GateKind : std::uint8_t {
  Input,
  Output,
  Const0,
  Const1,
  Buf,
  Inv,
  And2,
  Nand2,
  Or2,
  Nor2,
  Xor2,
  Xnor2,
  And3,
  Nand3,
  Or3,
  Nor3,
  Mux2,
};

inline constexpr std::size_t kGateKindCount = 17;

/// Number of input pins. OUTPUT is a pass-through port marker with one input.
int arity(GateKind kind);

/// True for kinds that are instantiated as cells and carry a propagation delay.
bool is_logic(GateKind kind);

bool is_constant(GateKind kind);

std::string_view gate_name(GateKind kind);
std::optional<GateKind> gate_from_name(std::string_view name);

/// Cell pin names: inputs in pin order. MUX2 is (A, B, S) with Y = S ? B : A.
std::span<const std::string_view> input_pins(GateKind kind);
inline constexpr std::string_view kOutputPin = "Y";

bool eval_gate(GateKind kind, bool a, bool b = false, bool c = false);

/// Same rule over 64 independent lanes.
inline std::uint64_t eval_gate_word(GateKind kind, std::uint64_t a, std::uint64_t b,
                                    std::uint64_t c) {
  switch (kind) {
    case GateKind::Const0: return 0;
    case GateKind::Const1: return ~std::uint64_t{0};
    case GateKind::Input:
    case GateKind::Output:
    case GateKind::Buf: return a;
    case GateKind::Inv: return ~a;
    case GateKind::And2: return a & b;
    case GateKind::Nand2: return ~(a & b);
    case GateKind::Or2: return a | b;
    case GateKind::Nor2: return ~(a | b);
    case GateKind::Xor2: return a ^ b;
    case GateKind::Xnor2: return ~(a ^ b);
    case GateKind::And3: return a & b & c;
    case GateKind::Nand3: return ~(a & b & c);
    case GateKind::Or3: return a | b | c;
    case GateKind::Nor3: return ~(a | b | c);
    case GateKind::Mux2: return (a & ~c) | (b & c);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Netlist
// ---------------------------------------------------------------------------

using NetId = std::uint32_t;
using NodeId = std::uint32_t;
inline constexpr NodeId kNoDriver = std::numeric_limits<NodeId>::max();

struct Node {
  std::string name;
  GateKind kind = GateKind::Buf;
  std::array<NetId, 3> in{};
  NetId out = 0;

  std::span<const NetId> inputs() const {
    return {in.data(), static_cast<std::size_t>(arity(kind))};
  }
};

struct Net {
  std::string name;
  NodeId driver = kNoDriver;  // kNoDriver only for primary inputs
};

/// A named port. `bits[k]` holds bit k counted from the least significant end.
struct Port {
  std::string name;
  bool is_bus = false;
  int msb = 0;
  int lsb = 0;
  std::vector<NetId> bits;

  int width() const { return static_cast<int>(bits.size()); }
  /// Declared Verilog index of bit k (handles ascending ranges).
  int index_of(int k) const { return msb >= lsb ? lsb + k : lsb - k; }
  std::string bit_name(int k) const;
};

/// Immutable gate-level combinational netlist. Construction validates every
/// structural invariant (single drivers, pin counts, acyclicity) and caches a
/// deterministic topological order plus per-net fanout.
class Netlist {
 public:
  Netlist() = default;
  Netlist(std::string name, std::vector<Net> nets, std::vector<Node> nodes,
          std::vector<Port> inputs, std::vector<Port> outputs);

  const std::string& name() const { return name_; }
  std::span<const Net> nets() const { return nets_; }
  std::span<const Node> nodes() const { return nodes_; }
  const Net& net(NetId id) const { return nets_[id]; }
  const Node& node(NodeId id) const { return nodes_[id]; }
  std::size_t net_count() const { return nets_.size(); }
  std::size_t node_count() const { return nodes_.size(); }

  const std::vector<Port>& inputs() const { return inputs_; }
  const std::vector<Port>& outputs() const { return outputs_; }

  /// Primary-input nets in port order, LSB first within each bus.
  const std::vector<NetId>& input_nets() const { return input_nets_; }
  /// Primary-output bits in port order, LSB first within each bus.
  const std::vector<NetId>& output_nets() const { return output_nets_; }

  bool is_primary_input(NetId id) const { return nets_[id].driver == kNoDriver; }
  bool is_constant_net(NetId id) const {
    return nets_[id].driver != kNoDriver && is_constant(nodes_[nets_[id].driver].kind);
  }

  /// Topological order: every node after the drivers of its inputs; ties by id.
  const std::vector<NodeId>& topo_order() const { return topo_; }
  /// Longest-path level of each node (0 for nodes fed only by PIs/constants).
  const std::vector<std::uint32_t>& levels() const { return level_; }
  /// Consumers of each net as node ids (a node appears once per pin use).
  std::span<const NodeId> fanout(NetId id) const {
    return {fanout_.data() + fanout_begin_[id], fanout_begin_[id + 1] - fanout_begin_[id]};
  }

  std::optional<NetId> find_net(std::string_view name) const;
  std::optional<NodeId> find_node(std::string_view name) const;
  const Port* find_output(std::string_view name) const;
  const Port* find_input(std::string_view name) const;

  /// Number of logic cells (constants excluded).
  std::size_t gate_count() const;

 private:
  void build_indices();

  std::string name_;
  std::vector<Net> nets_;
  std::vector<Node> nodes_;
  std::vector<Port> inputs_;
  std::vector<Port> outputs_;
  std::vector<NetId> input_nets_;
  std::vector<NetId> output_nets_;
  std::vector<NodeId> topo_;
  std::vector<std::uint32_t> level_;
  std::vector<std::uint32_t> fanout_begin_;
  std::vector<NodeId> fanout_;
  std::unordered_map<std::string, NetId> net_index_;
};

/// Incremental construction helper for generators and tests.
class NetlistBuilder {
 public:
  explicit NetlistBuilder(std::string name) : name_(std::move(name)) {}

  std::vector<NetId> add_input(const std::string& name, int width);
  NetId add_input_bit(const std::string& name) { return add_input(name, 0).front(); }
  /// Adds a gate; names default to U<n> / n<n>.
  NetId add_gate(GateKind kind, std::span<const NetId> inputs, std::string out_name = {},
                 std::string inst_name = {});
  NetId add_gate(GateKind kind, std::initializer_list<NetId> inputs) {
    return add_gate(kind, std::span<const NetId>(inputs.begin(), inputs.size()));
  }
  NetId add_const(bool value, std::string out_name = {});
  /// Declares an output bus (width = bits.size(); width 0 means scalar).
  void add_output(const std::string& name, std::vector<NetId> bits, bool scalar = false);

  Netlist build() &&;

 private:
  NetId new_net(std::string name, NodeId driver);

  std::string name_;
  std::vector<Net> nets_;
  std::vector<Node> nodes_;
  std::vector<Port> inputs_;
  std::vector<Port> outputs_;
  std::uint32_t auto_net_ = 0;
  std::uint32_t auto_node_ = 0;
};

// ---------------------------------------------------------------------------
// Parsing / emission
// ---------------------------------------------------------------------------

Netlist parse_netlist(std::string_view source);
Netlist read_netlist_file(const std::string& path);
std::string emit_netlist(const Netlist& n);

/// Deterministic topological order over an arbitrary node list; throws
/// CombinationalLoop naming the nets on a cycle.
std::vector<NodeId> topological_order(const Netlist& n);

/// Structural equality: same ports, same net names, same logic instances
/// (name, kind, input nets, output net) and the same constant-driven nets.
/// Node and net numbering is ignored.
bool structurally_equal(const Netlist& a, const Netlist& b, std::string* why = nullptr);

// ---------------------------------------------------------------------------
// Rewiring
// ---------------------------------------------------------------------------

struct Replacement {
  enum class Kind : std::uint8_t { Const0, Const1, Net };
  Kind kind = Kind::Const0;
  NetId source = 0;  // meaningful for Kind::Net

  static Replacement constant(bool v) { return {v ? Kind::Const1 : Kind::Const0, 0}; }
  static Replacement net(NetId j) { return {Kind::Net, j}; }
  bool is_constant() const { return kind != Kind::Net; }
  friend bool operator==(const Replacement&, const Replacement&) = default;
};

struct RewirePlan {
  std::map<NetId, Replacement> assignments;
};

struct RewireOptions {
  bool propagate_constants = true;
  bool remove_dead = true;
};

/// Redirects every consumer of each target net (including primary-output
/// bits) to its replacement, then folds gates whose output is forced by
/// constant inputs and drops logic with no path to an output. Replacement
/// chains resolve transitively. Returns a fresh netlist; `n` is untouched.
Netlist apply_rewiring(const Netlist& n, const RewirePlan& plan, const RewireOptions& opts = {});

}  // namespace agx
