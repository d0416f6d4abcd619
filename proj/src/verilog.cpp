// Structural Verilog subset: one module, scalar/bus declarations, named-pin
// cell instances, and net/constant `assign` aliases.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "agx/netlist.hpp"

namespace agx {
namespace {

enum class Tok { Ident, Number, Const, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_space();
    Token t;
    t.line = line_;
    t.col = col_;
    if (pos_ >= src_.size()) return t;
    const char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                    src_[pos_] == '_' || src_[pos_] == '$'))
        advance();
      t.kind = Tok::Ident;
      t.text = std::string(src_.substr(start, pos_ - start));
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
      if (pos_ < src_.size() && src_[pos_] == '\'') {
        advance();
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                      src_[pos_] == '_'))
          advance();
        t.kind = Tok::Const;
      } else {
        t.kind = Tok::Number;
      }
      t.text = std::string(src_.substr(start, pos_ - start));
      return t;
    }
    if (std::string_view("()[]:;,.=").find(c) != std::string_view::npos) {
      advance();
      t.kind = Tok::Punct;
      t.text = std::string(1, c);
      return t;
    }
    throw ParseError(ErrorCode::SyntaxError, line_, col_,
                     std::string("unexpected character '") + c + "'");
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') {
        const int l = line_, k = col_;
        advance();
        advance();
        while (pos_ + 1 < src_.size() && !(src_[pos_] == '*' && src_[pos_ + 1] == '/')) advance();
        if (pos_ + 1 >= src_.size())
          throw ParseError(ErrorCode::SyntaxError, l, k, "unterminated block comment");
        advance();
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

enum class Dir { Input, Output, Wire };

struct Decl {
  Dir dir = Dir::Wire;
  bool is_bus = false;
  int msb = 0;
  int lsb = 0;
  bool declared_io = false;
  int line = 0;
  int col = 0;
  std::vector<int> bits;  // temp net ids, LSB first
};

struct Ref {
  std::string name;
  int line = 0;
  int col = 0;
  int net = -1;
};

struct Instance {
  std::string cell;
  std::string name;
  GateKind kind = GateKind::Buf;
  std::array<Ref, 3> in;
  Ref out;
  int line = 0;
  int col = 0;
};

struct Assign {
  Ref lhs;
  Ref rhs;          // when !is_const
  bool is_const = false;
  bool value = false;
  int line = 0;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) { tok_ = lex_.next(); }

  Netlist run() {
    expect_ident("module");
    module_name_ = take_ident("module name");
    std::vector<Token> port_list;
    if (accept("(")) {
      if (!accept(")")) {
        do {
          port_list.push_back(tok_);
          take_ident("port name");
        } while (accept(","));
        expect(")");
      }
    }
    expect(";");

    while (!(tok_.kind == Tok::Ident && tok_.text == "endmodule")) {
      if (tok_.kind == Tok::End) fail(tok_, "'endmodule'");
      if (tok_.kind != Tok::Ident) fail(tok_, "statement");
      if (tok_.text == "input" || tok_.text == "output" || tok_.text == "wire") {
        declaration();
      } else if (tok_.text == "assign") {
        assignment();
      } else {
        instance();
      }
    }
    next();
    if (tok_.kind != Tok::End) fail(tok_, "end of input (one module per file)");
    return build(port_list);
  }

 private:
  [[noreturn]] void fail(const Token& t, const std::string& expected) {
    const std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw ParseError(ErrorCode::SyntaxError, t.line, t.col, "expected " + expected + ", got " + got);
  }

  void next() { tok_ = lex_.next(); }

  bool accept(std::string_view punct) {
    if (tok_.kind == Tok::Punct && tok_.text == punct) {
      next();
      return true;
    }
    return false;
  }

  void expect(std::string_view punct) {
    if (!accept(punct)) fail(tok_, "'" + std::string(punct) + "'");
  }

  void expect_ident(std::string_view word) {
    if (tok_.kind != Tok::Ident || tok_.text != word) fail(tok_, "'" + std::string(word) + "'");
    next();
  }

  std::string take_ident(const std::string& what) {
    if (tok_.kind != Tok::Ident) fail(tok_, what);
    std::string s = tok_.text;
    next();
    return s;
  }

  int take_number() {
    if (tok_.kind != Tok::Number) fail(tok_, "number");
    int v = std::stoi(tok_.text);
    next();
    return v;
  }

  void declaration() {
    const Dir dir = tok_.text == "input" ? Dir::Input : tok_.text == "output" ? Dir::Output
                                                                               : Dir::Wire;
    next();
    bool is_bus = false;
    int msb = 0, lsb = 0;
    if (accept("[")) {
      is_bus = true;
      msb = take_number();
      expect(":");
      lsb = take_number();
      expect("]");
    }
    do {
      const Token at = tok_;
      std::string name = take_ident("net name");
      auto it = decls_.find(name);
      if (it == decls_.end()) {
        Decl d;
        d.dir = dir;
        d.is_bus = is_bus;
        d.msb = msb;
        d.lsb = lsb;
        d.declared_io = dir != Dir::Wire;
        d.line = at.line;
        d.col = at.col;
        decl_order_.push_back(name);
        decls_.emplace(name, d);
      } else {
        Decl& d = it->second;
        if (d.is_bus != is_bus || d.msb != msb || d.lsb != lsb)
          throw ParseError(ErrorCode::SyntaxError, at.line, at.col,
                           "conflicting redeclaration of '" + name + "'");
        if (dir != Dir::Wire) {
          if (d.declared_io)
            throw ParseError(ErrorCode::SyntaxError, at.line, at.col,
                             "'" + name + "' declared as a port twice");
          d.dir = dir;
          d.declared_io = true;
        }
      }
    } while (accept(","));
    expect(";");
  }

  Ref net_ref() {
    Ref r;
    r.line = tok_.line;
    r.col = tok_.col;
    r.name = take_ident("net name");
    if (accept("[")) {
      r.name += "[" + std::to_string(take_number()) + "]";
      expect("]");
    }
    return r;
  }

  void assignment() {
    const int line = tok_.line;
    next();
    do {
      Assign a;
      a.line = line;
      a.lhs = net_ref();
      expect("=");
      if (tok_.kind == Tok::Const) {
        const std::string t = tok_.text;
        if (t == "1'b0" || t == "1'h0" || t == "1'd0") a.value = false;
        else if (t == "1'b1" || t == "1'h1" || t == "1'd1") a.value = true;
        else fail(tok_, "1'b0 or 1'b1");
        a.is_const = true;
        next();
      } else {
        a.rhs = net_ref();
      }
      assigns_.push_back(std::move(a));
      order_.push_back({1, assigns_.size() - 1});
    } while (accept(","));
    expect(";");
  }

  void instance() {
    Instance inst;
    inst.line = tok_.line;
    inst.col = tok_.col;
    inst.cell = tok_.text;
    auto kind = gate_from_name(inst.cell);
    if (!kind || !(is_logic(*kind) || is_constant(*kind)))
      throw ParseError(ErrorCode::UnknownCell, tok_.line, tok_.col, "cell '" + inst.cell + "'");
    inst.kind = *kind;
    next();
    inst.name = take_ident("instance name");
    expect("(");
    const auto pins = input_pins(inst.kind);
    std::array<bool, 4> seen{};
    if (!accept(")")) {
      do {
        expect(".");
        const Token pin_tok = tok_;
        std::string pin = take_ident("pin name");
        expect("(");
        if (tok_.kind == Tok::Punct && tok_.text == ")")
          throw ParseError(ErrorCode::UnconnectedPin, pin_tok.line, pin_tok.col,
                           inst.name + "." + pin);
        Ref r = net_ref();
        expect(")");
        int slot = -1;
        if (pin == kOutputPin) slot = 3;
        for (std::size_t k = 0; k < pins.size(); ++k)
          if (pins[k] == pin) slot = static_cast<int>(k);
        if (slot < 0)
          throw ParseError(ErrorCode::SyntaxError, pin_tok.line, pin_tok.col,
                           "cell " + inst.cell + " has no pin '" + pin + "'");
        if (seen[slot])
          throw ParseError(ErrorCode::SyntaxError, pin_tok.line, pin_tok.col,
                           "pin '" + pin + "' connected twice");
        seen[slot] = true;
        if (slot == 3) inst.out = std::move(r);
        else inst.in[slot] = std::move(r);
      } while (accept(","));
      expect(")");
    }
    expect(";");
    for (std::size_t k = 0; k < pins.size(); ++k)
      if (!seen[k])
        throw ParseError(ErrorCode::UnconnectedPin, inst.line, inst.col,
                         inst.name + "." + std::string(pins[k]));
    if (!seen[3])
      throw ParseError(ErrorCode::UnconnectedPin, inst.line, inst.col, inst.name + ".Y");
    instances_.push_back(std::move(inst));
    order_.push_back({0, instances_.size() - 1});
  }

  // -------------------------------------------------------------------------

  int lookup(Ref& r) {
    auto it = bit_index_.find(r.name);
    if (it == bit_index_.end()) {
      auto d = decls_.find(r.name);
      if (d != decls_.end() && d->second.is_bus)
        throw ParseError(ErrorCode::SyntaxError, r.line, r.col,
                         "bus '" + r.name + "' used without a bit-select");
      throw ParseError(ErrorCode::UndeclaredNet, r.line, r.col, "'" + r.name + "'");
    }
    r.net = it->second;
    return r.net;
  }

  Netlist build(const std::vector<Token>& port_list) {
    // Temp nets: every declared bit, in declaration order.
    std::vector<std::string> names;
    std::vector<Dir> dirs;
    for (const std::string& base : decl_order_) {
      Decl& d = decls_[base];
      const int w = d.is_bus ? std::abs(d.msb - d.lsb) + 1 : 1;
      for (int k = 0; k < w; ++k) {
        std::string bit = base;
        if (d.is_bus) {
          const int idx = d.msb >= d.lsb ? d.lsb + k : d.lsb - k;
          bit += "[" + std::to_string(idx) + "]";
        }
        bit_index_[bit] = static_cast<int>(names.size());
        d.bits.push_back(static_cast<int>(names.size()));
        names.push_back(bit);
        dirs.push_back(d.dir);
      }
    }

    std::set<std::string> in_port_list;
    for (const Token& t : port_list) {
      auto it = decls_.find(t.text);
      if (it == decls_.end() || !it->second.declared_io)
        throw ParseError(ErrorCode::SyntaxError, t.line, t.col,
                         "port '" + t.text + "' lacks an input/output declaration");
      if (!in_port_list.insert(t.text).second)
        throw ParseError(ErrorCode::SyntaxError, t.line, t.col, "port '" + t.text + "' repeated");
    }
    for (const auto& [name, d] : decls_)
      if (d.declared_io && !in_port_list.count(name))
        throw ParseError(ErrorCode::SyntaxError, d.line, d.col,
                         "'" + name + "' declared as a port but missing from the port list");

    const std::size_t n = names.size();
    std::vector<int> alias(n, -1);
    std::vector<int> driver_stmt(n, -1);  // index into order_
    auto drive = [&](Ref& r, int stmt) {
      const int id = lookup(r);
      if (dirs[id] == Dir::Input || driver_stmt[id] >= 0 || alias[id] >= 0)
        throw ParseError(ErrorCode::MultipleDrivers, r.line, r.col, "'" + r.name + "'");
      driver_stmt[id] = stmt;
      return id;
    };
    for (std::size_t s = 0; s < order_.size(); ++s) {
      const auto [what, idx] = order_[s];
      if (what == 0) {
        Instance& inst = instances_[idx];
        for (int k = 0; k < arity(inst.kind); ++k) lookup(inst.in[k]);
        drive(inst.out, static_cast<int>(s));
      } else {
        Assign& a = assigns_[idx];
        if (a.is_const) {
          drive(a.lhs, static_cast<int>(s));
        } else {
          const int src = lookup(a.rhs);
          const int dst = lookup(a.lhs);
          if (dirs[dst] == Dir::Input || driver_stmt[dst] >= 0 || alias[dst] >= 0)
            throw ParseError(ErrorCode::MultipleDrivers, a.lhs.line, a.lhs.col,
                             "'" + a.lhs.name + "'");
          alias[dst] = src;
        }
      }
    }

    // Canonical representative of every temp net.
    std::vector<int> canon(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
      int cur = static_cast<int>(i);
      std::size_t steps = 0;
      while (alias[cur] >= 0) {
        cur = alias[cur];
        if (++steps > n)
          throw Error(ErrorCode::CombinationalLoop, "assign alias cycle through '" + names[i] + "'");
      }
      canon[i] = cur;
    }

    std::vector<char> used(n, 0);
    for (const auto& [what, idx] : order_) {
      if (what == 0) {
        const Instance& inst = instances_[idx];
        for (int k = 0; k < arity(inst.kind); ++k) used[canon[inst.in[k].net]] = 1;
        used[canon[inst.out.net]] = 1;
      } else if (assigns_[idx].is_const) {
        used[canon[assigns_[idx].lhs.net]] = 1;
      }
    }
    for (const auto& [name, d] : decls_)
      if (d.declared_io)
        for (int b : d.bits) used[canon[b]] = 1;

    // Referenced-but-undriven check.
    for (std::size_t i = 0; i < n; ++i) {
      if (canon[i] != static_cast<int>(i) || !used[i]) continue;
      if (dirs[i] != Dir::Input && driver_stmt[i] < 0) {
        const Decl& d = decls_[names[i].substr(0, names[i].find('['))];
        throw ParseError(ErrorCode::UndrivenNet, d.line, d.col, "'" + names[i] + "' has no driver");
      }
    }

    std::vector<NetId> final_id(n, kNoDriver);
    std::vector<Net> nets;
    for (std::size_t i = 0; i < n; ++i)
      if (canon[i] == static_cast<int>(i) && used[i]) {
        final_id[i] = static_cast<NetId>(nets.size());
        nets.push_back(Net{names[i], kNoDriver});
      }
    auto net_of = [&](int temp) { return final_id[canon[temp]]; };

    std::vector<Node> nodes;
    for (const auto& [what, idx] : order_) {
      Node node;
      if (what == 0) {
        const Instance& inst = instances_[idx];
        node.name = inst.name;
        node.kind = inst.kind;
        for (int k = 0; k < arity(inst.kind); ++k) node.in[k] = net_of(inst.in[k].net);
        node.out = net_of(inst.out.net);
      } else {
        const Assign& a = assigns_[idx];
        if (!a.is_const) continue;
        node.kind = a.value ? GateKind::Const1 : GateKind::Const0;
        node.out = net_of(a.lhs.net);
        node.name = "const$" + nets[node.out].name;
      }
      nets[node.out].driver = static_cast<NodeId>(nodes.size());
      nodes.push_back(std::move(node));
    }

    std::vector<Port> inputs, outputs;
    for (const Token& t : port_list) {
      const Decl& d = decls_[t.text];
      Port p;
      p.name = t.text;
      p.is_bus = d.is_bus;
      p.msb = d.msb;
      p.lsb = d.lsb;
      for (int b : d.bits) p.bits.push_back(net_of(b));
      (d.dir == Dir::Input ? inputs : outputs).push_back(std::move(p));
    }

    return Netlist(module_name_, std::move(nets), std::move(nodes), std::move(inputs),
                   std::move(outputs));
  }

  Lexer lex_;
  Token tok_;
  std::string module_name_;
  std::map<std::string, Decl> decls_;
  std::vector<std::string> decl_order_;
  std::vector<Instance> instances_;
  std::vector<Assign> assigns_;
  std::vector<std::pair<int, std::size_t>> order_;  // (0 instance | 1 assign, index)
  std::map<std::string, int> bit_index_;
};

std::string sanitize(const std::string& name) {
  std::string s;
  for (char c : name) s += (c == '[' || c == ']') ? '_' : c;
  return s;
}

}  // namespace

Netlist parse_netlist(std::string_view source) { return Parser(source).run(); }

Netlist read_netlist_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_netlist(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(e.code(), e.line(), e.column(), e.detail(), path);
  }
}

std::string emit_netlist(const Netlist& n) {
  // Names owned by ports: every input/output bit name and every port base.
  std::set<std::string> port_bits;
  std::set<std::string> port_bases;
  for (const auto* ports : {&n.inputs(), &n.outputs()})
    for (const Port& p : *ports) {
      port_bases.insert(p.name);
      for (int k = 0; k < p.width(); ++k) port_bits.insert(p.bit_name(k));
    }
  std::vector<char> is_pi(n.net_count(), 0);
  for (NetId id : n.input_nets()) is_pi[id] = 1;

  // A net may keep its name if it is a PI, or if it is the net bound to the
  // output bit of the same name; any other clash is renamed.
  std::set<std::string> owned;  // output bit names whose net carries the name
  for (const Port& p : n.outputs())
    for (int k = 0; k < p.width(); ++k)
      if (n.net(p.bits[k]).name == p.bit_name(k)) owned.insert(p.bit_name(k));

  std::vector<std::string> name(n.net_count());
  std::set<std::string> taken;
  for (NetId i = 0; i < n.net_count(); ++i) taken.insert(n.net(i).name);
  for (NetId i = 0; i < n.net_count(); ++i) {
    const std::string& nm = n.net(i).name;
    const std::string base = nm.substr(0, nm.find('['));
    const bool clash = !is_pi[i] && !owned.count(nm) && (port_bits.count(nm) || port_bases.count(base));
    if (!clash) {
      name[i] = nm;
      continue;
    }
    std::string cand = sanitize(nm) + "_r";
    for (int k = 1; taken.count(cand) || port_bases.count(cand); ++k)
      cand = sanitize(nm) + "_r" + std::to_string(k);
    taken.insert(cand);
    name[i] = cand;
  }

  std::ostringstream os;
  os << "module " << n.name() << " (";
  bool first = true;
  for (const auto* ports : {&n.inputs(), &n.outputs()})
    for (const Port& p : *ports) {
      os << (first ? "" : ", ") << p.name;
      first = false;
    }
  os << ");\n";
  auto range = [](const Port& p) {
    return p.is_bus ? "[" + std::to_string(p.msb) + ":" + std::to_string(p.lsb) + "] "
                    : std::string();
  };
  for (const Port& p : n.inputs()) os << "  input " << range(p) << p.name << ";\n";
  for (const Port& p : n.outputs()) os << "  output " << range(p) << p.name << ";\n";

  // Internal wires, buses grouped by base name.
  std::map<std::string, std::pair<int, int>> buses;
  std::vector<std::string> scalars;
  std::vector<std::string> bus_order;
  for (NetId i = 0; i < n.net_count(); ++i) {
    const std::string& nm = name[i];
    if (is_pi[i] || owned.count(nm)) continue;
    const auto lb = nm.find('[');
    if (lb == std::string::npos) {
      scalars.push_back(nm);
      continue;
    }
    const std::string base = nm.substr(0, lb);
    const int idx = std::stoi(nm.substr(lb + 1));
    auto [it, fresh] = buses.try_emplace(base, idx, idx);
    if (fresh) bus_order.push_back(base);
    it->second.first = std::max(it->second.first, idx);
    it->second.second = std::min(it->second.second, idx);
  }
  for (const std::string& base : bus_order)
    os << "  wire [" << buses[base].first << ":" << buses[base].second << "] " << base << ";\n";
  for (const std::string& s : scalars) os << "  wire " << s << ";\n";

  std::vector<NodeId> order(n.node_count());
  for (NodeId g = 0; g < n.node_count(); ++g) order[g] = g;
  const auto& lvl = n.levels();
  std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    const bool ca = is_constant(n.node(a).kind), cb = is_constant(n.node(b).kind);
    if (ca != cb) return ca;
    return std::tie(lvl[a], a) < std::tie(lvl[b], b);
  });
  for (NodeId g : order) {
    const Node& node = n.node(g);
    if (is_constant(node.kind)) {
      os << "  assign " << name[node.out] << " = "
         << (node.kind == GateKind::Const1 ? "1'b1" : "1'b0") << ";\n";
      continue;
    }
    os << "  " << gate_name(node.kind) << " " << node.name << " (";
    const auto pins = input_pins(node.kind);
    for (std::size_t k = 0; k < pins.size(); ++k)
      os << "." << pins[k] << "(" << name[node.in[k]] << "), ";
    os << "." << kOutputPin << "(" << name[node.out] << "));\n";
  }
  for (const Port& p : n.outputs())
    for (int k = 0; k < p.width(); ++k) {
      const std::string bit = p.bit_name(k);
      if (name[p.bits[k]] != bit) os << "  assign " << bit << " = " << name[p.bits[k]] << ";\n";
    }
  os << "endmodule\n";
  return os.str();
}

}  // namespace agx
