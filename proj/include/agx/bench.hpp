#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "agx/candidates.hpp"
#include "agx/ga.hpp"
#include "agx/metrics.hpp"
#include "agx/netlist.hpp"
#include "agx/sim.hpp"
#include "agx/timing.hpp"

namespace agx {

struct BenchmarkSpec {
  enum class Kind { RippleCarryAdder, ArrayMultiplier, AdderTree, Conv3x3 };
  Kind kind = Kind::RippleCarryAdder;
  int width = 8;        // operand width; pixel width for Conv3x3
  int inputs = 4;       // AdderTree operand count
  int coeff_width = 8;  // Conv3x3 coefficient width
  std::uint64_t seed = kDefaultSeed;
  std::size_t opt_vectors = 100000;
  std::size_t eval_vectors = 100000;

  static BenchmarkSpec rca(int width);
  static BenchmarkSpec multiplier(int width);
  static BenchmarkSpec adder_tree(int inputs, int width);
  static BenchmarkSpec conv3x3(int pixel_width, int coeff_width);

  void validate() const;
  /// rca8, mul8, tree4x8, conv3x3_8x8
  std::string name() const;
  /// Inverse of name().
  static BenchmarkSpec from_name(const std::string& name);
};

/// Gate-level circuit: full adders of XOR2/AND2/OR2 (half adder at bit 0),
/// AND2 partial products, ripple rows. Inputs are buses; one output bus.
Netlist generate_benchmark(const BenchmarkSpec& spec);

/// Integer reference for the generated circuit's single output bus.
std::uint64_t benchmark_reference(const BenchmarkSpec& spec, const std::vector<std::uint64_t>& operands);

struct CandidateMixRecord {
  CandidateMix candidates;
  CandidateMix selected;
};

struct ExperimentRecord {
  std::string circuit;
  std::size_t gates = 0;
  double fresh_cpd = 0.0;
  double aged_cpd = 0.0;
  double approx_aged_cpd = 0.0;
  double approx_fresh_cpd = 0.0;
  double baseline_aged_nmed = 0.0;  // timing errors at the fresh-CPD clock
  double approx_nmed = 0.0;         // functional
  double approx_timed_nmed = 0.0;   // aged timing simulation at the fresh-CPD clock
  bool timing_matches_functional = false;
  bool feasible = false;
  CandidateMixRecord mix;
  std::size_t selected = 0;
  std::size_t eligible = 0;
  double candidate_seconds = 0.0;
  double ga_seconds = 0.0;
  double evaluation_seconds = 0.0;

  GaResult ga;
  std::shared_ptr<const Netlist> baseline;
  std::shared_ptr<const Netlist> approximate;
  StimulusSet eval_stimuli;
};

struct ExperimentOptions {
  NmedVariant metric = NmedVariant::Standard;
  int threads = 1;
};

/// Generate, characterize, extract candidates, evolve, and evaluate on held-out vectors.
ExperimentRecord run_experiment(const BenchmarkSpec& spec, const GaConfig& config,
                                const CellTimingModel& model, const ExperimentOptions& opts = {});

/// Same pipeline for an existing netlist.
ExperimentRecord run_experiment(std::shared_ptr<const Netlist> baseline, const std::string& name,
                                const StimulusSet& opt, const StimulusSet& eval,
                                const OutputDecoding& decoding, const GaConfig& config,
                                const CellTimingModel& model, double delay_target,
                                const ExperimentOptions& opts = {});

struct Quartiles {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
  friend bool operator==(const Quartiles&, const Quartiles&) = default;
};

/// Linear-interpolated quantiles of the sample.
Quartiles quartiles(std::vector<double> values);

struct MonteCarloOptions {
  std::size_t samples = 1000;
  double sigma_ratio = 0.10;
  std::uint64_t seed = kDefaultSeed;
  /// Leading evaluation vectors simulated per sample (0 = all).
  std::size_t subsample = 10000;
  NmedVariant metric = NmedVariant::Standard;
  int threads = 1;
};

struct MonteCarloSummary {
  Quartiles baseline;
  Quartiles approximate;
  std::vector<double> baseline_nmed;
  std::vector<double> approximate_nmed;
};

/// Per sample: variation drawn over the aged annotations of both netlists,
/// timing simulation at `clock`, NMED against the baseline's functional outputs.
MonteCarloSummary run_montecarlo(const Netlist& baseline, const Netlist& approximate,
                                 const CellTimingModel& model, const StimulusSet& stimuli,
                                 const OutputDecoding& decoding, double clock,
                                 const MonteCarloOptions& opts = {});

std::string experiment_csv_header();
std::string experiment_csv_row(const ExperimentRecord& r);
std::string montecarlo_csv(const std::string& circuit, const MonteCarloSummary& s);

}  // namespace agx
