#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "agx/netlist.hpp"

namespace agx {

enum class Corner { Fresh, Aged, Custom };

std::string_view to_string(Corner c);

/// Worst-case average degradation of aged cells relative to fresh ones.
inline constexpr double kDefaultAgingFactor = 1.1215;

/// Per-kind propagation delays (ns) at the fresh and aged corners. Ports and
/// constants are implicitly zero-delay.
class CellTimingModel {
 public:
  void set(GateKind kind, double fresh, double aged);
  bool has(GateKind kind) const;
  double fresh(GateKind kind) const;
  double aged(GateKind kind) const;
  /// Throws MissingCellDelay for logic kinds without an entry.
  double delay(GateKind kind, Corner corner) const;

  /// Built-in generic library; aged column derived with kDefaultAgingFactor.
  static CellTimingModel default_library();

 private:
  struct Entry {
    double fresh = 0.0;
    double aged = 0.0;
  };
  std::array<std::optional<Entry>, kGateKindCount> table_{};
};

CellTimingModel derive_aged_model(const CellTimingModel& fresh, double factor);
/// Per-kind factors; kinds absent from `factors` use `fallback`.
CellTimingModel derive_aged_model(const CellTimingModel& fresh,
                                  const std::map<GateKind, double>& factors,
                                  double fallback = 1.0);

/// Text format: `KIND fresh [aged]` per line, `#` comments. A missing aged
/// column is derived with `aging_factor`.
CellTimingModel parse_timing_model(std::string_view text, double aging_factor = kDefaultAgingFactor);
CellTimingModel read_timing_file(const std::string& path, double aging_factor = kDefaultAgingFactor);
std::string format_timing_model(const CellTimingModel& model);

/// Netlist annotated with per-instance delays and static arrival times.
struct AnnotatedDag {
  std::shared_ptr<const Netlist> base;
  Corner corner = Corner::Fresh;
  std::vector<double> delay;    // per node
  std::vector<double> arrival;  // per net
  double cpd = 0.0;
  std::vector<NodeId> critical_path;  // input side first

  const Netlist& netlist() const { return *base; }
};

AnnotatedDag annotate(std::shared_ptr<const Netlist> n, const CellTimingModel& model, Corner corner);
AnnotatedDag annotate(const Netlist& n, const CellTimingModel& model, Corner corner);

/// Re-runs STA with some instance delays replaced (corner becomes Custom).
AnnotatedDag restatic(const AnnotatedDag& dag, const std::map<NodeId, double>& overrides);
AnnotatedDag restatic(const AnnotatedDag& dag, std::vector<double> delays);

/// Arrival-only STA; returns the CPD without building an AnnotatedDag.
double critical_path_delay(const Netlist& n, const CellTimingModel& model, Corner corner);

/// Nets along the critical path: the launching net followed by each
/// instance's output net.
std::vector<NetId> critical_nets(const AnnotatedDag& dag);

struct VariationSample {
  std::uint64_t seed = 0;
  double sigma_ratio = 0.10;
  std::vector<double> delays;  // per node
};

/// Independent Normal(delta, (sigma_ratio*delta)^2) draw per instance,
/// redrawn while non-positive. Zero-delay nodes stay zero.
VariationSample sample_variation(const AnnotatedDag& dag, double sigma_ratio, std::uint64_t seed);

}  // namespace agx
