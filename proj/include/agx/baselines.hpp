#pragma once

#include <cstdint>
#include <vector>

#include "agx/metrics.hpp"
#include "agx/netlist.hpp"
#include "agx/sim.hpp"
#include "agx/timing.hpp"

namespace agx {

/// Significance-activity product per net.
struct SapScore {
  std::vector<double> significance;  // sum of 2^k over reachable decoded output bits k
  std::vector<double> activity;      // toggle fraction between consecutive vectors
  std::vector<double> sap;
};

SapScore compute_sap(const Netlist& n, const TraceSet& traces, const OutputDecoding& decoding);

/// Inputs shared by both baselines. Selection uses `opt`, reported metrics use `eval`.
struct BaselineInputs {
  const Netlist* baseline = nullptr;
  const CellTimingModel* model = nullptr;
  double delay_target = 0.0;
  const StimulusSet* opt = nullptr;
  const StimulusSet* eval = nullptr;
  OutputDecoding decoding;
  NmedVariant metric = NmedVariant::Standard;
  int threads = 1;
};

struct GlpResult {
  Netlist netlist;
  ErrorMetrics metrics;
  double aged_cpd = 0.0;
  /// Pruned net names in order, with the constant each was tied to.
  std::vector<std::pair<std::string, bool>> pruned;
};

/// Gate-level pruning: repeatedly tie the live net of minimum SAP to its
/// majority constant until the aged CPD meets the target. Throws Stuck.
GlpResult glp(const BaselineInputs& in);

struct PrecisionConfig {
  std::vector<int> truncated;  // low-order bits tied to 0, per input bus
};

struct ApsResult {
  PrecisionConfig config;
  Netlist netlist;
  ErrorMetrics metrics;      // evaluation stimuli
  double opt_nmed = 0.0;     // optimization stimuli
  double aged_cpd = 0.0;
  std::size_t feasible_tuples = 0;
  std::size_t tuples = 0;
};

/// Netlist with the given low-order input bits tied to 0.
Netlist truncate_inputs(const Netlist& n, const PrecisionConfig& config);

/// Exhaustive precision scaling over every truncation tuple; the feasible
/// tuple with the lowest optimization NMED wins (ties: fewer truncated bits,
/// then lexicographic). Throws Infeasible.
ApsResult aps(const BaselineInputs& in);

}  // namespace agx
