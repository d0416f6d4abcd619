#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "agx/netlist.hpp"
#include "agx/timing.hpp"

namespace agx {

/// Width of one packed simulation word.
inline constexpr std::size_t kLanes = 64;

inline std::size_t words_for(std::size_t count) { return (count + kLanes - 1) / kLanes; }

struct BusLayout {
  std::string name;
  int width = 1;
  friend bool operator==(const BusLayout&, const BusLayout&) = default;
};

std::vector<BusLayout> input_layout(const Netlist& n);

/// Input vectors, stored packed: one bit-column per primary-input bit.
class StimulusSet {
 public:
  struct Provenance {
    enum class Kind { Generated, File } kind = Kind::Generated;
    std::uint64_t seed = 0;
    std::string source;  // distribution name or file path
  };

  StimulusSet() = default;
  StimulusSet(std::vector<BusLayout> layout, std::size_t count);

  const std::vector<BusLayout>& layout() const { return layout_; }
  std::size_t count() const { return count_; }
  std::size_t words() const { return words_for(count_); }
  /// Total primary-input bits (sum of bus widths).
  std::size_t width() const { return columns_.size(); }

  /// Packed column for PI bit `pi` (flattened port order, LSB first per bus).
  std::span<const std::uint64_t> column(std::size_t pi) const { return columns_[pi]; }
  bool bit(std::size_t pi, std::size_t vector) const {
    return (columns_[pi][vector / kLanes] >> (vector % kLanes)) & 1U;
  }
  void set_bit(std::size_t pi, std::size_t vector, bool v);
  /// Bus value of vector `v` (bus width <= 64).
  std::uint64_t bus_value(std::size_t bus, std::size_t vector) const;

  /// Vectors [first, first + count).
  StimulusSet slice(std::size_t first, std::size_t count) const;

  Provenance provenance;

 private:
  std::vector<BusLayout> layout_;
  std::size_t count_ = 0;
  std::vector<std::vector<std::uint64_t>> columns_;
};

/// Uniform random vectors: every bus drawn uniformly from [0, 2^width - 1].
StimulusSet generate_stimuli(const std::vector<BusLayout>& layout, std::size_t count,
                             std::uint64_t seed);

/// One hexadecimal vector per line; the first declared bus occupies the most
/// significant bits of the line.
std::string format_stimuli(const StimulusSet& s);
StimulusSet parse_stimuli(std::string_view text, const std::vector<BusLayout>& layout);
StimulusSet read_stimulus_file(const std::string& path, const std::vector<BusLayout>& layout);

// ---------------------------------------------------------------------------

enum class TraceScope { AllNets, OutputsOnly };

/// Per-net packed value traces over a stimulus set.
class TraceSet {
 public:
  TraceSet() = default;
  TraceSet(std::size_t count, std::size_t net_count, std::vector<NetId> kept,
           std::vector<NetId> output_nets);

  std::size_t count() const { return count_; }
  std::size_t words() const { return words_for(count_); }
  bool has(NetId id) const { return id < slot_.size() && slot_[id] >= 0; }
  /// Net-id range the trace set was built for.
  std::size_t net_capacity() const { return slot_.size(); }
  std::span<const std::uint64_t> trace(NetId id) const;
  std::span<std::uint64_t> mutable_trace(NetId id);
  /// Mask of valid lanes in the final word.
  std::uint64_t tail_mask() const;
  bool value(NetId id, std::size_t vector) const {
    return (trace(id)[vector / kLanes] >> (vector % kLanes)) & 1U;
  }

  /// Primary-output bits of the simulated netlist, in port order.
  const std::vector<NetId>& output_nets() const { return output_nets_; }
  std::span<const std::uint64_t> output_trace(std::size_t po_bit) const {
    return trace(output_nets_[po_bit]);
  }

 private:
  std::size_t count_ = 0;
  std::vector<std::int32_t> slot_;
  std::vector<std::uint64_t> data_;
  std::vector<NetId> output_nets_;
};

/// Bit-parallel evaluation in topological order, 64 vectors per word.
TraceSet functional_simulate(const Netlist& n, const StimulusSet& s,
                             TraceScope scope = TraceScope::AllNets, int threads = 1);

// ---------------------------------------------------------------------------

/// Outputs captured at the sampling edge of a transport-delay simulation.
struct TimedOutcome {
  std::size_t count = 0;
  /// Packed sampled values per primary-output bit, in port order.
  std::vector<std::vector<std::uint64_t>> sampled;
  /// Packed per-vector flag: every event occurred at or before the edge.
  std::vector<std::uint64_t> settled;
  /// Optional diagnostics: nets still switching after the edge, per vector.
  std::vector<std::vector<NetId>> late_nets;

  bool is_settled(std::size_t vector) const {
    return (settled[vector / kLanes] >> (vector % kLanes)) & 1U;
  }
  bool sample(std::size_t po_bit, std::size_t vector) const {
    return (sampled[po_bit][vector / kLanes] >> (vector % kLanes)) & 1U;
  }
  std::size_t settled_count() const;
};

struct TimingSimOptions {
  bool collect_late_nets = false;
};

/// Event-accurate transport-delay simulation. Each vector starts from the
/// steady state of the previous one (vector 0 from its own), primary inputs
/// switch at t = 0, and outputs are sampled at t = clock_period; events at
/// exactly the edge are captured.
TimedOutcome timing_simulate(const AnnotatedDag& dag, const StimulusSet& s, double clock_period,
                             const TimingSimOptions& opts = {});

}  // namespace agx
