#include "agx/ga.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include "agx/parallel.hpp"

namespace agx {

std::size_t Chromosome::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

std::string Chromosome::to_string() const {
  std::string s(bits.size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) s[i] = '1';
  return s;
}

void GaConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  auto prob = [&](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) fail(std::string(name) + " must lie in [0, 1]");
  };
  if (population_size < 2) fail("population size must be at least 2");
  if (tournament_size < 2 || tournament_size > population_size)
    fail("tournament size must lie in [2, population size]");
  if (elite_count < 1 || elite_count >= population_size)
    fail("elite count must lie in [1, population size)");
  prob(crossover_probability, "crossover probability");
  prob(mutation_probability_initial, "initial mutation probability");
  prob(mutation_probability_max, "maximum mutation probability");
  prob(diversity_threshold, "diversity threshold");
  prob(init_base_prob, "initial base probability");
  prob(init_critical_prob, "initial critical probability");
  if (mutation_probability_max < mutation_probability_initial)
    fail("maximum mutation probability is below the initial one");
  if (!(epsilon > 0.0)) fail("epsilon must be positive");
  if (diversity_sample < 2) fail("diversity sample must be at least 2");
}

GaConfig GaConfig::for_circuit(std::size_t gate_count) {
  GaConfig c;
  if (gate_count > 300) {
    c.population_size = 128;
    c.generations = 200;
  }
  return c;
}

FitnessContext FitnessContext::make(std::shared_ptr<const Netlist> baseline,
                                    std::vector<ApproximationCandidate> candidates,
                                    CellTimingModel model, double delay_target,
                                    StimulusSet stimuli, OutputDecoding decoding,
                                    NmedVariant metric, double epsilon) {
  if (!baseline) throw Error(ErrorCode::InvalidArgument, "no baseline netlist");
  if (stimuli.count() == 0) throw Error(ErrorCode::EmptyStream, "no optimization vectors");
  FitnessContext ctx;
  ctx.golden = decode_outputs(functional_simulate(*baseline, stimuli, TraceScope::OutputsOnly),
                              decoding);
  ctx.baseline = std::move(baseline);
  ctx.candidates = std::move(candidates);
  ctx.model = std::move(model);
  ctx.delay_target = delay_target;
  ctx.stimuli = std::move(stimuli);
  ctx.decoding = std::move(decoding);
  ctx.metric = metric;
  ctx.epsilon = epsilon;
  return ctx;
}

RewirePlan decode_chromosome(const Chromosome& c,
                             const std::vector<ApproximationCandidate>& candidates) {
  if (c.size() != candidates.size())
    throw Error(ErrorCode::InvalidArgument, "chromosome length " + std::to_string(c.size()) +
                                                " does not match " +
                                                std::to_string(candidates.size()) + " candidates");
  RewirePlan plan;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c.bits[i]) plan.assignments.emplace(candidates[i].target, candidates[i].replacement);
  return plan;
}

Netlist apply_chromosome(const Netlist& baseline, const Chromosome& c,
                         const std::vector<ApproximationCandidate>& candidates) {
  return apply_rewiring(baseline, decode_chromosome(c, candidates));
}

FitnessResult calc_fitness(const Chromosome& c, const FitnessContext& ctx) {
  FitnessResult r;
  try {
    const Netlist approx = apply_chromosome(*ctx.baseline, c, ctx.candidates);
    r.aged_cpd = critical_path_delay(approx, ctx.model, Corner::Aged);
    if (r.aged_cpd > ctx.delay_target) {
      r.diagnostic = "aged delay above target";
      return r;
    }
    const auto observed =
        decode_outputs(functional_simulate(approx, ctx.stimuli, TraceScope::OutputsOnly),
                       ctx.decoding);
    r.nmed = nmed(ctx.golden, observed, ctx.decoding, ctx.metric).nmed;
    r.feasible = true;
    r.fitness = 1.0 / (r.nmed + ctx.epsilon);
  } catch (const Error& e) {
    r = FitnessResult{};
    r.diagnostic = e.what();
  }
  return r;
}

std::vector<Chromosome> initialize_population(const GaConfig& config,
                                              const std::vector<ApproximationCandidate>& candidates,
                                              const AnnotatedDag& aged) {
  config.validate();
  std::set<NetId> on_path;
  for (NetId id : critical_nets(aged)) on_path.insert(id);
  std::vector<std::size_t> critical;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (on_path.count(candidates[i].target)) critical.push_back(i);
  if (critical.empty())
    throw Error(ErrorCode::NoCriticalPathCandidates,
                "no candidate targets a net on the aged critical path");
  std::vector<Chromosome> pop(config.population_size);
  for (std::size_t k = 0; k < pop.size(); ++k) {
    Rng rng(derive_seed(config.seed, 0, k));
    Chromosome& c = pop[k];
    c.bits.assign(candidates.size(), 0);
    bool any_critical = false;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const bool crit = on_path.count(candidates[i].target) > 0;
      if (bernoulli(rng, crit ? config.init_critical_prob : config.init_base_prob)) {
        c.bits[i] = 1;
        any_critical = any_critical || crit;
      }
    }
    if (!any_critical) c.bits[critical[uniform_below(rng, critical.size())]] = 1;
  }
  return pop;
}

double population_diversity(const std::vector<Chromosome>& population, std::size_t sample) {
  const std::size_t m = std::min(sample, population.size());
  if (m < 2 || population.front().size() == 0) return 0.0;
  const auto len = static_cast<double>(population.front().size());
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b) {
      std::size_t d = 0;
      for (std::size_t i = 0; i < population[a].size(); ++i)
        d += population[a].bits[i] != population[b].bits[i];
      total += static_cast<double>(d) / len;
      ++pairs;
    }
  return total / static_cast<double>(pairs);
}

namespace {

struct Scored {
  Chromosome c;
  FitnessResult f;
};

bool ranks_before(const Scored& a, const Scored& b) {
  const auto ca = a.c.count(), cb = b.c.count();
  return std::tie(b.f.fitness, ca, a.f.aged_cpd, a.c) < std::tie(a.f.fitness, cb, b.f.aged_cpd, b.c);
}

class Evaluator {
 public:
  Evaluator(const FitnessContext& ctx, int threads) : ctx_(ctx), threads_(threads) {}

  std::vector<Scored> score(std::vector<Chromosome> batch) {
    std::vector<const Chromosome*> fresh;
    std::set<Chromosome> queued;
    for (const auto& c : batch)
      if (!cache_.count(c) && queued.insert(c).second) fresh.push_back(&c);
    std::vector<FitnessResult> results(fresh.size());
    parallel_for(fresh.size(), threads_,
                 [&](std::size_t i) { results[i] = calc_fitness(*fresh[i], ctx_); });
    for (std::size_t i = 0; i < fresh.size(); ++i) cache_.emplace(*fresh[i], results[i]);
    evaluations_ += fresh.size();
    std::vector<Scored> out;
    out.reserve(batch.size());
    for (auto& c : batch) {
      FitnessResult f = cache_.at(c);
      out.push_back({std::move(c), std::move(f)});
    }
    return out;
  }

  std::size_t evaluations() const { return evaluations_; }

 private:
  const FitnessContext& ctx_;
  int threads_;
  std::map<Chromosome, FitnessResult> cache_;
  std::size_t evaluations_ = 0;
};

std::size_t tournament(const std::vector<Scored>& ranked, std::size_t size, Rng& rng) {
  std::size_t best = ranked.size();
  for (std::size_t k = 0; k < size; ++k) best = std::min(best, uniform_below(rng, ranked.size()));
  return best;
}

}  // namespace

GaResult evolve(const GaConfig& config, const FitnessContext& ctx, int threads) {
  config.validate();
  if (!ctx.baseline) throw Error(ErrorCode::InvalidArgument, "no baseline netlist");
  const std::size_t length = ctx.candidates.size();
  Evaluator eval(ctx, threads);
  GaResult result;

  // The exact circuit is the error-free optimum whenever it already meets the target.
  auto exact = eval.score({Chromosome::zeros(length)});
  if (exact.front().f.feasible) {
    result.best = exact.front().c;
    result.best_fitness = exact.front().f.fitness;
    result.best_nmed = exact.front().f.nmed;
    result.best_aged_cpd = exact.front().f.aged_cpd;
    result.feasible = true;
    result.evaluations = eval.evaluations();
    return result;
  }

  const AnnotatedDag aged = annotate(ctx.baseline, ctx.model, Corner::Aged);
  auto population = eval.score(initialize_population(config, ctx.candidates, aged));
  std::sort(population.begin(), population.end(), ranks_before);

  double mutation = config.mutation_probability_initial;
  const std::size_t offspring = config.population_size - config.elite_count;
  for (std::size_t gen = 1; gen <= config.generations; ++gen) {
    std::vector<Chromosome> children(offspring);
    for (std::size_t k = 0; k < offspring; ++k) {
      Rng rng(derive_seed(config.seed, gen, k));
      const auto& p1 = population[tournament(population, config.tournament_size, rng)].c;
      const auto& p2 = population[tournament(population, config.tournament_size, rng)].c;
      Chromosome child = p1;
      if (bernoulli(rng, config.crossover_probability))
        for (std::size_t i = 0; i < length; ++i)
          if (rng() & 1U) child.bits[i] = p2.bits[i];
      for (std::size_t i = 0; i < length; ++i)
        if (bernoulli(rng, mutation)) child.bits[i] ^= 1U;
      children[k] = std::move(child);
    }
    auto scored = eval.score(std::move(children));

    // Parents (elites included) and offspring compete; duplicates collapse.
    std::vector<Scored> merged = std::move(population);
    merged.insert(merged.end(), std::make_move_iterator(scored.begin()),
                  std::make_move_iterator(scored.end()));
    std::sort(merged.begin(), merged.end(), ranks_before);
    merged.erase(std::unique(merged.begin(), merged.end(),
                             [](const Scored& a, const Scored& b) { return a.c == b.c; }),
                 merged.end());
    if (merged.size() > config.population_size) merged.resize(config.population_size);
    population = std::move(merged);

    std::vector<Chromosome> members;
    members.reserve(population.size());
    for (const auto& s : population) members.push_back(s.c);
    GenerationStats st;
    st.generation = gen;
    st.best_fitness = population.front().f.fitness;
    double sum = 0.0;
    for (const auto& s : population) sum += s.f.fitness;
    st.mean_fitness = sum / static_cast<double>(population.size());
    st.diversity = population_diversity(members, config.diversity_sample);
    st.mutation_probability = mutation;
    st.best_nmed = population.front().f.nmed;
    st.best_aged_cpd = population.front().f.aged_cpd;
    result.history.push_back(st);

    mutation = st.diversity < config.diversity_threshold
                   ? std::min(mutation * 2.0, config.mutation_probability_max)
                   : config.mutation_probability_initial;
  }

  const Scored& best = population.front();
  result.best = best.c;
  result.best_fitness = best.f.fitness;
  result.best_nmed = best.f.nmed;
  result.best_aged_cpd = best.f.aged_cpd;
  result.feasible = best.f.feasible;
  result.evaluations = eval.evaluations();
  return result;
}

std::string format_history_csv(const GaResult& r) {
  std::ostringstream os;
  os.precision(12);
  os << "generation,best_fitness,mean_fitness,diversity,mutation_probability,best_nmed,"
        "best_aged_cpd\n";
  for (const auto& h : r.history)
    os << h.generation << ',' << h.best_fitness << ',' << h.mean_fitness << ',' << h.diversity
       << ',' << h.mutation_probability << ',' << h.best_nmed << ',' << h.best_aged_cpd << '\n';
  return os.str();
}

}  // namespace agx
