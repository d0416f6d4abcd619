#include "agx/sim.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <sstream>

#include "agx/parallel.hpp"
#include "agx/rng.hpp"

namespace agx {

std::vector<BusLayout> input_layout(const Netlist& n) {
  std::vector<BusLayout> layout;
  for (const Port& p : n.inputs()) layout.push_back({p.name, p.width()});
  return layout;
}

// ---------------------------------------------------------------------------
// StimulusSet

StimulusSet::StimulusSet(std::vector<BusLayout> layout, std::size_t count)
    : layout_(std::move(layout)), count_(count) {
  std::size_t bits = 0;
  for (const BusLayout& b : layout_) bits += static_cast<std::size_t>(b.width);
  columns_.assign(bits, std::vector<std::uint64_t>(words_for(count), 0));
}

void StimulusSet::set_bit(std::size_t pi, std::size_t vector, bool v) {
  std::uint64_t& w = columns_[pi][vector / kLanes];
  const std::uint64_t m = std::uint64_t{1} << (vector % kLanes);
  w = v ? (w | m) : (w & ~m);
}

std::uint64_t StimulusSet::bus_value(std::size_t bus, std::size_t vector) const {
  std::size_t base = 0;
  for (std::size_t b = 0; b < bus; ++b) base += static_cast<std::size_t>(layout_[b].width);
  std::uint64_t v = 0;
  const int w = std::min(layout_[bus].width, 64);
  for (int k = 0; k < w; ++k)
    if (bit(base + static_cast<std::size_t>(k), vector)) v |= std::uint64_t{1} << k;
  return v;
}

StimulusSet StimulusSet::slice(std::size_t first, std::size_t count) const {
  if (first + count > count_) throw Error(ErrorCode::InvalidArgument, "stimulus slice out of range");
  StimulusSet out(layout_, count);
  out.provenance = provenance;
  if (first % kLanes == 0) {
    for (std::size_t pi = 0; pi < columns_.size(); ++pi) {
      std::copy_n(columns_[pi].begin() + static_cast<std::ptrdiff_t>(first / kLanes), out.words(),
                  out.columns_[pi].begin());
      if (count % kLanes)
        out.columns_[pi].back() &= (std::uint64_t{1} << (count % kLanes)) - 1;
    }
    return out;
  }
  for (std::size_t pi = 0; pi < columns_.size(); ++pi)
    for (std::size_t v = 0; v < count; ++v) out.set_bit(pi, v, bit(pi, first + v));
  return out;
}

StimulusSet generate_stimuli(const std::vector<BusLayout>& layout, std::size_t count,
                             std::uint64_t seed) {
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "stimulus count must be >= 1");
  StimulusSet s(layout, count);
  s.provenance = {StimulusSet::Provenance::Kind::Generated, seed, "uniform"};
  Rng rng(seed);
  for (std::size_t v = 0; v < count; ++v) {
    std::size_t pi = 0;
    for (const BusLayout& bus : layout) {
      for (int done = 0; done < bus.width; done += 64) {
        const int chunk = std::min(64, bus.width - done);
        std::uint64_t r = rng();
        if (chunk < 64) r &= (std::uint64_t{1} << chunk) - 1;
        for (int k = 0; k < chunk; ++k) s.set_bit(pi + static_cast<std::size_t>(done + k), v, (r >> k) & 1U);
      }
      pi += static_cast<std::size_t>(bus.width);
    }
  }
  return s;
}

namespace {

/// PI flat index for each numeric bit position of the hex word (LSB first):
/// the last bus occupies the low bits.
std::vector<std::size_t> hex_bit_order(const std::vector<BusLayout>& layout) {
  std::vector<std::size_t> base(layout.size(), 0);
  std::size_t total = 0;
  for (std::size_t b = 0; b < layout.size(); ++b) {
    base[b] = total;
    total += static_cast<std::size_t>(layout[b].width);
  }
  std::vector<std::size_t> order;
  order.reserve(total);
  for (std::size_t b = layout.size(); b-- > 0;)
    for (int k = 0; k < layout[b].width; ++k) order.push_back(base[b] + static_cast<std::size_t>(k));
  return order;
}

}  // namespace

std::string format_stimuli(const StimulusSet& s) {
  const auto order = hex_bit_order(s.layout());
  const std::size_t digits = std::max<std::size_t>(1, (order.size() + 3) / 4);
  std::string out;
  out.reserve(s.count() * (digits + 1));
  for (std::size_t v = 0; v < s.count(); ++v) {
    for (std::size_t d = digits; d-- > 0;) {
      int nibble = 0;
      for (int k = 0; k < 4; ++k) {
        const std::size_t pos = d * 4 + static_cast<std::size_t>(k);
        if (pos < order.size() && s.bit(order[pos], v)) nibble |= 1 << k;
      }
      out += "0123456789abcdef"[nibble];
    }
    out += '\n';
  }
  return out;
}

StimulusSet parse_stimuli(std::string_view text, const std::vector<BusLayout>& layout) {
  const auto order = hex_bit_order(layout);
  std::vector<std::string> lines;
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<int> line_numbers;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::string t;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c)) && c != '_') t += c;
    if (t.empty()) continue;
    if (t.size() > 2 && t[0] == '0' && (t[1] == 'x' || t[1] == 'X')) t = t.substr(2);
    lines.push_back(std::move(t));
    line_numbers.push_back(lineno);
  }
  if (lines.empty()) throw Error(ErrorCode::EmptyStream, "stimulus file has no vectors");
  StimulusSet s(layout, lines.size());
  s.provenance = {StimulusSet::Provenance::Kind::File, 0, {}};
  for (std::size_t v = 0; v < lines.size(); ++v) {
    const std::string& hex = lines[v];
    for (std::size_t i = 0; i < hex.size(); ++i) {
      const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(hex[hex.size() - 1 - i])));
      int nibble;
      if (c >= '0' && c <= '9') nibble = c - '0';
      else if (c >= 'a' && c <= 'f') nibble = c - 'a' + 10;
      else
        throw ParseError(ErrorCode::SyntaxError, line_numbers[v], 1,
                         std::string("bad hex digit '") + hex[hex.size() - 1 - i] + "'");
      for (int k = 0; k < 4; ++k) {
        if (!((nibble >> k) & 1)) continue;
        const std::size_t pos = i * 4 + static_cast<std::size_t>(k);
        if (pos >= order.size())
          throw ParseError(ErrorCode::LayoutMismatch, line_numbers[v], 1,
                           "vector wider than " + std::to_string(order.size()) + " input bits");
        s.set_bit(order[pos], v, true);
      }
    }
  }
  return s;
}

StimulusSet read_stimulus_file(const std::string& path, const std::vector<BusLayout>& layout) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, path);
  std::stringstream ss;
  ss << in.rdbuf();
  StimulusSet s;
  try {
    s = parse_stimuli(ss.str(), layout);
  } catch (const ParseError& e) {
    throw ParseError(e.code(), e.line(), e.column(), e.detail(), path);
  }
  s.provenance.source = path;
  return s;
}

// ---------------------------------------------------------------------------
// TraceSet

TraceSet::TraceSet(std::size_t count, std::size_t net_count, std::vector<NetId> kept,
                   std::vector<NetId> output_nets)
    : count_(count), slot_(net_count, -1), output_nets_(std::move(output_nets)) {
  std::int32_t next = 0;
  for (NetId id : kept)
    if (slot_[id] < 0) slot_[id] = next++;
  data_.assign(static_cast<std::size_t>(next) * words(), 0);
}

std::span<const std::uint64_t> TraceSet::trace(NetId id) const {
  if (!has(id)) throw Error(ErrorCode::UnknownNet, "no trace for net id " + std::to_string(id));
  return {data_.data() + static_cast<std::size_t>(slot_[id]) * words(), words()};
}

std::span<std::uint64_t> TraceSet::mutable_trace(NetId id) {
  if (!has(id)) throw Error(ErrorCode::UnknownNet, "no trace for net id " + std::to_string(id));
  return {data_.data() + static_cast<std::size_t>(slot_[id]) * words(), words()};
}

std::uint64_t TraceSet::tail_mask() const {
  const std::size_t r = count_ % kLanes;
  return r == 0 ? ~std::uint64_t{0} : (std::uint64_t{1} << r) - 1;
}

namespace {

void eval_block(GateKind kind, const std::uint64_t* a, const std::uint64_t* b,
                const std::uint64_t* c, std::uint64_t* y, std::size_t n) {
#define AGX_LOOP(expr)                              \
  for (std::size_t w = 0; w < n; ++w) y[w] = (expr); \
  return
  switch (kind) {
    case GateKind::Const0: AGX_LOOP(0);
    case GateKind::Const1: AGX_LOOP(~std::uint64_t{0});
    case GateKind::Input:
    case GateKind::Output:
    case GateKind::Buf: AGX_LOOP(a[w]);
    case GateKind::Inv: AGX_LOOP(~a[w]);
    case GateKind::And2: AGX_LOOP(a[w] & b[w]);
    case GateKind::Nand2: AGX_LOOP(~(a[w] & b[w]));
    case GateKind::Or2: AGX_LOOP(a[w] | b[w]);
    case GateKind::Nor2: AGX_LOOP(~(a[w] | b[w]));
    case GateKind::Xor2: AGX_LOOP(a[w] ^ b[w]);
    case GateKind::Xnor2: AGX_LOOP(~(a[w] ^ b[w]));
    case GateKind::And3: AGX_LOOP(a[w] & b[w] & c[w]);
    case GateKind::Nand3: AGX_LOOP(~(a[w] & b[w] & c[w]));
    case GateKind::Or3: AGX_LOOP(a[w] | b[w] | c[w]);
    case GateKind::Nor3: AGX_LOOP(~(a[w] | b[w] | c[w]));
    case GateKind::Mux2: AGX_LOOP((a[w] & ~c[w]) | (b[w] & c[w]));
  }
#undef AGX_LOOP
}

constexpr std::size_t kBlockWords = 32;

}  // namespace

TraceSet functional_simulate(const Netlist& n, const StimulusSet& s, TraceScope scope,
                             int threads) {
  if (input_layout(n) != s.layout())
    throw Error(ErrorCode::LayoutMismatch, "stimulus layout does not match netlist '" + n.name() + "'");
  std::vector<NetId> kept;
  if (scope == TraceScope::AllNets) {
    kept.resize(n.net_count());
    for (NetId i = 0; i < n.net_count(); ++i) kept[i] = i;
  } else {
    kept = n.output_nets();
  }
  TraceSet traces(s.count(), n.net_count(), kept, n.output_nets());
  const std::size_t words = s.words();
  const std::size_t blocks = (words + kBlockWords - 1) / kBlockWords;
  const auto& pis = n.input_nets();
  const auto& topo = n.topo_order();
  const std::size_t net_count = n.net_count();

  std::vector<std::vector<std::uint64_t>> scratch(
      static_cast<std::size_t>(std::max(1, std::min<int>(threads, static_cast<int>(blocks)))));
  auto run_block = [&](std::vector<std::uint64_t>& buf, std::size_t blk) {
    const std::size_t w0 = blk * kBlockWords;
    const std::size_t nw = std::min(kBlockWords, words - w0);
    buf.resize(net_count * kBlockWords);
    auto at = [&](NetId id) { return buf.data() + static_cast<std::size_t>(id) * kBlockWords; };
    for (std::size_t pi = 0; pi < pis.size(); ++pi)
      std::copy_n(s.column(pi).data() + w0, nw, at(pis[pi]));
    for (NodeId g : topo) {
      const Node& node = n.node(g);
      eval_block(node.kind, at(node.in[0]), at(node.in[1]), at(node.in[2]), at(node.out), nw);
    }
    for (NetId id : kept)
      std::copy_n(at(id), nw, traces.mutable_trace(id).data() + w0);
  };
  if (threads <= 1 || blocks <= 1) {
    for (std::size_t blk = 0; blk < blocks; ++blk) run_block(scratch[0], blk);
  } else {
    // One scratch buffer per worker; blocks write disjoint word ranges.
    parallel_for(scratch.size(), static_cast<int>(scratch.size()), [&](std::size_t me) {
      for (std::size_t blk = me; blk < blocks; blk += scratch.size()) run_block(scratch[me], blk);
    });
  }
  if (words > 0) {
    const std::uint64_t mask = traces.tail_mask();
    for (NetId id : kept) traces.mutable_trace(id)[words - 1] &= mask;
  }
  return traces;
}

// ---------------------------------------------------------------------------
// Timing simulation

std::size_t TimedOutcome::settled_count() const {
  std::size_t c = 0;
  for (std::size_t w = 0; w < settled.size(); ++w) c += static_cast<std::size_t>(std::popcount(settled[w]));
  return c;
}

namespace {

struct Event {
  double t;
  std::uint8_t v;
};

}  // namespace

TimedOutcome timing_simulate(const AnnotatedDag& dag, const StimulusSet& s, double clock_period,
                             const TimingSimOptions& opts) {
  const Netlist& n = dag.netlist();
  if (!(clock_period > 0.0)) throw Error(ErrorCode::InvalidArgument, "clock period must be positive");
  if (input_layout(n) != s.layout())
    throw Error(ErrorCode::LayoutMismatch, "stimulus layout does not match netlist '" + n.name() + "'");

  const std::size_t nets = n.net_count();
  const auto& pis = n.input_nets();
  const auto& pos = n.output_nets();
  const auto& topo = n.topo_order();

  TimedOutcome out;
  out.count = s.count();
  out.sampled.assign(pos.size(), std::vector<std::uint64_t>(s.words(), 0));
  out.settled.assign(s.words(), 0);
  if (opts.collect_late_nets) out.late_nets.resize(s.count());

  std::vector<std::uint8_t> steady(nets, 0);  // previous vector's settled values
  std::vector<std::uint8_t> cur_in(nets, 0);
  std::vector<std::uint32_t> ev_begin(nets, 0), ev_len(nets, 0);
  std::vector<Event> arena;
  arena.reserve(nets * 4);

  auto settle = [&](std::size_t v) {
    for (std::size_t pi = 0; pi < pis.size(); ++pi) steady[pis[pi]] = s.bit(pi, v);
    for (NodeId g : topo) {
      const Node& node = n.node(g);
      const std::uint8_t a = steady[node.in[0]], b = steady[node.in[1]], c = steady[node.in[2]];
      steady[node.out] = eval_gate(node.kind, a, b, c);
    }
  };
  if (s.count() > 0) settle(0);

  for (std::size_t v = 0; v < s.count(); ++v) {
    arena.clear();
    std::fill(ev_len.begin(), ev_len.end(), 0);
    for (std::size_t pi = 0; pi < pis.size(); ++pi) {
      const NetId id = pis[pi];
      const std::uint8_t nv = s.bit(pi, v);
      if (nv != steady[id]) {
        ev_begin[id] = static_cast<std::uint32_t>(arena.size());
        ev_len[id] = 1;
        arena.push_back({0.0, nv});
      }
    }
    for (NodeId g : topo) {
      const Node& node = n.node(g);
      const int ar = arity(node.kind);
      std::uint32_t total = 0;
      for (int k = 0; k < ar; ++k) total += ev_len[node.in[k]];
      if (total == 0) continue;
      // Merge input waveforms, evaluating once per distinct change time.
      std::array<std::uint32_t, 3> idx{};
      std::array<std::uint8_t, 3> val{};
      for (int k = 0; k < ar; ++k) val[k] = steady[node.in[k]];
      std::uint8_t last = steady[node.out];
      const double d = dag.delay[g];
      const auto begin = static_cast<std::uint32_t>(arena.size());
      while (true) {
        double t = std::numeric_limits<double>::infinity();
        for (int k = 0; k < ar; ++k) {
          const NetId in = node.in[k];
          if (idx[k] < ev_len[in]) t = std::min(t, arena[ev_begin[in] + idx[k]].t);
        }
        if (t == std::numeric_limits<double>::infinity()) break;
        for (int k = 0; k < ar; ++k) {
          const NetId in = node.in[k];
          while (idx[k] < ev_len[in] && arena[ev_begin[in] + idx[k]].t == t) {
            val[k] = arena[ev_begin[in] + idx[k]].v;
            ++idx[k];
          }
        }
        const std::uint8_t y = eval_gate(node.kind, val[0], val[1], val[2]);
        if (y != last) {
          arena.push_back({t + d, y});
          last = y;
        }
      }
      ev_begin[node.out] = begin;
      ev_len[node.out] = static_cast<std::uint32_t>(arena.size()) - begin;
    }

    const std::size_t word = v / kLanes;
    const std::uint64_t lane = std::uint64_t{1} << (v % kLanes);
    for (std::size_t k = 0; k < pos.size(); ++k) {
      const NetId id = pos[k];
      std::uint8_t value = steady[id];
      for (std::uint32_t e = 0; e < ev_len[id]; ++e) {
        const Event& ev = arena[ev_begin[id] + e];
        if (ev.t > clock_period) break;
        value = ev.v;
      }
      if (value) out.sampled[k][word] |= lane;
    }
    bool settled = true;
    for (NetId id = 0; id < nets; ++id) {
      if (ev_len[id] == 0) continue;
      const Event& lastev = arena[ev_begin[id] + ev_len[id] - 1];
      if (lastev.t > clock_period) {
        settled = false;
        if (opts.collect_late_nets) out.late_nets[v].push_back(id);
        else break;
      }
    }
    if (settled) out.settled[word] |= lane;
    // Final waveform values are the new steady state.
    for (NetId id = 0; id < nets; ++id)
      if (ev_len[id]) steady[id] = arena[ev_begin[id] + ev_len[id] - 1].v;
  }
  return out;
}

}  // namespace agx
