#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "agx/candidates.hpp"
#include "agx/metrics.hpp"
#include "agx/netlist.hpp"
#include "agx/rng.hpp"
#include "agx/sim.hpp"
#include "agx/timing.hpp"

namespace agx {

/// One bit per eligible net (candidate-table order); 1 applies the candidate.
struct Chromosome {
  std::vector<std::uint8_t> bits;

  std::size_t size() const { return bits.size(); }
  std::size_t count() const;
  std::string to_string() const;
  static Chromosome zeros(std::size_t n) { return {std::vector<std::uint8_t>(n, 0)}; }
  friend bool operator==(const Chromosome&, const Chromosome&) = default;
  friend auto operator<=>(const Chromosome&, const Chromosome&) = default;
};

struct GaConfig {
  std::size_t population_size = 64;
  std::size_t generations = 100;
  double crossover_probability = 0.9;
  double mutation_probability_initial = 0.005;
  double mutation_probability_max = 0.04;
  double diversity_threshold = 0.005;
  std::size_t tournament_size = 2;
  std::size_t elite_count = 2;
  std::uint64_t seed = kDefaultSeed;
  double init_base_prob = 0.02;
  double init_critical_prob = 0.3;
  double epsilon = 1e-12;
  /// Chromosomes sampled when measuring population diversity.
  std::size_t diversity_sample = 32;

  void validate() const;
  /// 64/100 up to 300 gates, 128/200 above.
  static GaConfig for_circuit(std::size_t gate_count);
};

/// Immutable inputs shared by every fitness evaluation.
struct FitnessContext {
  std::shared_ptr<const Netlist> baseline;
  std::vector<ApproximationCandidate> candidates;
  CellTimingModel model;
  double delay_target = 0.0;
  StimulusSet stimuli;
  OutputDecoding decoding;
  NmedVariant metric = NmedVariant::Standard;
  double epsilon = 1e-12;
  /// Baseline outputs on `stimuli`, decoded.
  std::vector<std::uint64_t> golden;

  static FitnessContext make(std::shared_ptr<const Netlist> baseline,
                             std::vector<ApproximationCandidate> candidates, CellTimingModel model,
                             double delay_target, StimulusSet stimuli, OutputDecoding decoding,
                             NmedVariant metric = NmedVariant::Standard, double epsilon = 1e-12);
};

struct FitnessResult {
  double fitness = 0.0;
  double aged_cpd = 0.0;
  double nmed = 0.0;
  bool feasible = false;
  std::string diagnostic;
};

RewirePlan decode_chromosome(const Chromosome& c,
                             const std::vector<ApproximationCandidate>& candidates);
Netlist apply_chromosome(const Netlist& baseline, const Chromosome& c,
                         const std::vector<ApproximationCandidate>& candidates);

/// Decode, rewire, aged STA against the delay target, then NMED on the
/// optimization stimuli; fitness 1/(nmed + epsilon), or 0 when infeasible.
FitnessResult calc_fitness(const Chromosome& c, const FitnessContext& ctx);

/// Bits of nets on the aged critical path use `init_critical_prob`, others
/// `init_base_prob`; every chromosome sets at least one critical bit.
std::vector<Chromosome> initialize_population(const GaConfig& config,
                                              const std::vector<ApproximationCandidate>& candidates,
                                              const AnnotatedDag& aged);

struct GenerationStats {
  std::size_t generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  double diversity = 0.0;
  double mutation_probability = 0.0;
  double best_nmed = 0.0;
  double best_aged_cpd = 0.0;
};

struct GaResult {
  Chromosome best;
  double best_fitness = 0.0;
  double best_nmed = 0.0;
  double best_aged_cpd = 0.0;
  bool feasible = false;
  std::vector<GenerationStats> history;
  std::size_t evaluations = 0;
};

/// (mu + lambda) genetic search: elites kept, tournament selection, uniform
/// crossover, per-bit mutation with diversity-driven rate doubling. Every
/// random decision derives from (seed, generation, offspring index), so the
/// result does not depend on `threads`.
GaResult evolve(const GaConfig& config, const FitnessContext& ctx, int threads = 1);

/// Mean pairwise Hamming distance / length over the first `sample` members.
double population_diversity(const std::vector<Chromosome>& population, std::size_t sample);

std::string format_history_csv(const GaResult& r);

}  // namespace agx
