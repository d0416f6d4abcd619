#include "agx/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <regex>
#include <sstream>

#include "agx/parallel.hpp"

namespace agx {

namespace {

using Bits = std::vector<NetId>;

class Arith {
 public:
  explicit Arith(NetlistBuilder& b) : b_(b) {}

  std::pair<NetId, NetId> half(NetId x, NetId y) {
    return {b_.add_gate(GateKind::Xor2, {x, y}), b_.add_gate(GateKind::And2, {x, y})};
  }

  std::pair<NetId, NetId> full(NetId x, NetId y, NetId c) {
    const NetId t = b_.add_gate(GateKind::Xor2, {x, y});
    const NetId s = b_.add_gate(GateKind::Xor2, {t, c});
    const NetId g = b_.add_gate(GateKind::And2, {x, y});
    const NetId p = b_.add_gate(GateKind::And2, {t, c});
    return {s, b_.add_gate(GateKind::Or2, {g, p})};
  }

  /// Ripple sum of two unsigned vectors (LSB first); carry-out appended.
  Bits add(const Bits& x, const Bits& y) {
    Bits out;
    std::optional<NetId> carry;
    const std::size_t len = std::max(x.size(), y.size());
    for (std::size_t k = 0; k < len; ++k) {
      std::vector<NetId> terms;
      if (k < x.size()) terms.push_back(x[k]);
      if (k < y.size()) terms.push_back(y[k]);
      if (carry) terms.push_back(*carry);
      carry.reset();
      if (terms.size() == 1) {
        out.push_back(terms[0]);
      } else if (terms.size() == 2) {
        auto [s, c] = half(terms[0], terms[1]);
        out.push_back(s);
        carry = c;
      } else {
        auto [s, c] = full(terms[0], terms[1], terms[2]);
        out.push_back(s);
        carry = c;
      }
    }
    if (carry) out.push_back(*carry);
    return out;
  }

  /// Array multiplier: AND2 partial products accumulated by ripple rows.
  Bits multiply(const Bits& a, const Bits& b) {
    auto row = [&](std::size_t i) {
      Bits pp;
      for (NetId x : a) pp.push_back(b_.add_gate(GateKind::And2, {x, b[i]}));
      return pp;
    };
    Bits acc = row(0);
    Bits product{acc.front()};
    Bits hi(acc.begin() + 1, acc.end());
    for (std::size_t i = 1; i < b.size(); ++i) {
      const Bits s = add(hi, row(i));
      product.push_back(s.front());
      hi.assign(s.begin() + 1, s.end());
    }
    product.insert(product.end(), hi.begin(), hi.end());
    return product;
  }

  Bits sum_tree(std::vector<Bits> terms) {
    while (terms.size() > 1) {
      std::vector<Bits> next;
      for (std::size_t i = 0; i + 1 < terms.size(); i += 2) next.push_back(add(terms[i], terms[i + 1]));
      if (terms.size() % 2) next.push_back(terms.back());
      terms = std::move(next);
    }
    return terms.front();
  }

 private:
  NetlistBuilder& b_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

BenchmarkSpec BenchmarkSpec::rca(int width) {
  BenchmarkSpec s;
  s.kind = Kind::RippleCarryAdder;
  s.width = width;
  return s;
}

BenchmarkSpec BenchmarkSpec::multiplier(int width) {
  BenchmarkSpec s;
  s.kind = Kind::ArrayMultiplier;
  s.width = width;
  return s;
}

BenchmarkSpec BenchmarkSpec::adder_tree(int inputs, int width) {
  BenchmarkSpec s;
  s.kind = Kind::AdderTree;
  s.inputs = inputs;
  s.width = width;
  return s;
}

BenchmarkSpec BenchmarkSpec::conv3x3(int pixel_width, int coeff_width) {
  BenchmarkSpec s;
  s.kind = Kind::Conv3x3;
  s.width = pixel_width;
  s.coeff_width = coeff_width;
  return s;
}

void BenchmarkSpec::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidArgument, m); };
  if (width < 2) fail("benchmark width must be at least 2");
  if (opt_vectors < 1 || eval_vectors < 1) fail("stimulus counts must be positive");
  int out_bits = 0;
  switch (kind) {
    case Kind::RippleCarryAdder: out_bits = width + 1; break;
    case Kind::ArrayMultiplier: out_bits = 2 * width; break;
    case Kind::AdderTree:
      if (inputs < 2) fail("adder tree needs at least 2 operands");
      out_bits = width + static_cast<int>(std::ceil(std::log2(inputs)));
      break;
    case Kind::Conv3x3:
      if (coeff_width < 2) fail("coefficient width must be at least 2");
      out_bits = width + coeff_width + 4;
      break;
  }
  if (out_bits > 63) fail("benchmark output wider than 63 bits");
}

std::string BenchmarkSpec::name() const {
  switch (kind) {
    case Kind::RippleCarryAdder: return "rca" + std::to_string(width);
    case Kind::ArrayMultiplier: return "mul" + std::to_string(width);
    case Kind::AdderTree: return "tree" + std::to_string(inputs) + "x" + std::to_string(width);
    case Kind::Conv3x3: return "conv3x3_" + std::to_string(width) + "x" + std::to_string(coeff_width);
  }
  return "bench";
}

BenchmarkSpec BenchmarkSpec::from_name(const std::string& name) {
  std::smatch m;
  if (std::regex_match(name, m, std::regex(R"(rca(\d+))"))) return rca(std::stoi(m[1]));
  if (std::regex_match(name, m, std::regex(R"(mul(\d+))"))) return multiplier(std::stoi(m[1]));
  if (std::regex_match(name, m, std::regex(R"(tree(\d+)x(\d+))")))
    return adder_tree(std::stoi(m[1]), std::stoi(m[2]));
  if (std::regex_match(name, m, std::regex(R"(conv3x3_(\d+)x(\d+))")))
    return conv3x3(std::stoi(m[1]), std::stoi(m[2]));
  throw Error(ErrorCode::InvalidArgument,
              "unknown benchmark '" + name + "' (rcaW, mulW, treeNxW, conv3x3_PxC)");
}

Netlist generate_benchmark(const BenchmarkSpec& spec) {
  spec.validate();
  NetlistBuilder b(spec.name());
  Arith ar(b);
  switch (spec.kind) {
    case BenchmarkSpec::Kind::RippleCarryAdder: {
      const Bits a = b.add_input("a", spec.width);
      const Bits c = b.add_input("b", spec.width);
      b.add_output("s", ar.add(a, c));
      break;
    }
    case BenchmarkSpec::Kind::ArrayMultiplier: {
      const Bits a = b.add_input("a", spec.width);
      const Bits c = b.add_input("b", spec.width);
      b.add_output("p", ar.multiply(a, c));
      break;
    }
    case BenchmarkSpec::Kind::AdderTree: {
      std::vector<Bits> terms;
      for (int i = 0; i < spec.inputs; ++i) terms.push_back(b.add_input("x" + std::to_string(i), spec.width));
      b.add_output("sum", ar.sum_tree(std::move(terms)));
      break;
    }
    case BenchmarkSpec::Kind::Conv3x3: {
      std::vector<Bits> px, k;
      for (int i = 0; i < 9; ++i) px.push_back(b.add_input("p" + std::to_string(i), spec.width));
      for (int i = 0; i < 9; ++i) k.push_back(b.add_input("k" + std::to_string(i), spec.coeff_width));
      std::vector<Bits> products;
      for (int i = 0; i < 9; ++i) products.push_back(ar.multiply(px[i], k[i]));
      b.add_output("y", ar.sum_tree(std::move(products)));
      break;
    }
  }
  return std::move(b).build();
}

std::uint64_t benchmark_reference(const BenchmarkSpec& spec,
                                  const std::vector<std::uint64_t>& operands) {
  switch (spec.kind) {
    case BenchmarkSpec::Kind::RippleCarryAdder: return operands.at(0) + operands.at(1);
    case BenchmarkSpec::Kind::ArrayMultiplier: return operands.at(0) * operands.at(1);
    case BenchmarkSpec::Kind::AdderTree: {
      std::uint64_t s = 0;
      for (int i = 0; i < spec.inputs; ++i) s += operands.at(static_cast<std::size_t>(i));
      return s;
    }
    case BenchmarkSpec::Kind::Conv3x3: {
      std::uint64_t s = 0;
      for (std::size_t i = 0; i < 9; ++i) s += operands.at(i) * operands.at(9 + i);
      return s;
    }
  }
  return 0;
}

ExperimentRecord run_experiment(const BenchmarkSpec& spec, const GaConfig& config,
                                const CellTimingModel& model, const ExperimentOptions& opts) {
  auto baseline = std::make_shared<const Netlist>(generate_benchmark(spec));
  const auto layout = input_layout(*baseline);
  const StimulusSet opt = generate_stimuli(layout, spec.opt_vectors, derive_seed(spec.seed, 1));
  const StimulusSet eval = generate_stimuli(layout, spec.eval_vectors, derive_seed(spec.seed, 2));
  const double target = critical_path_delay(*baseline, model, Corner::Fresh);
  return run_experiment(baseline, spec.name(), opt, eval, make_decoding(*baseline), config, model,
                        target, opts);
}

ExperimentRecord run_experiment(std::shared_ptr<const Netlist> baseline, const std::string& name,
                                const StimulusSet& opt, const StimulusSet& eval,
                                const OutputDecoding& decoding, const GaConfig& config,
                                const CellTimingModel& model, double delay_target,
                                const ExperimentOptions& opts) {
  ExperimentRecord r;
  r.circuit = name;
  r.baseline = baseline;
  r.gates = baseline->gate_count();
  r.eval_stimuli = eval;

  auto t0 = std::chrono::steady_clock::now();
  const AnnotatedDag fresh = annotate(baseline, model, Corner::Fresh);
  const AnnotatedDag aged = annotate(baseline, model, Corner::Aged);
  r.fresh_cpd = fresh.cpd;
  r.aged_cpd = aged.cpd;
  CandidateOptions copts;
  copts.seed = config.seed;
  copts.threads = opts.threads;
  auto candidates =
      extract_candidates(functional_simulate(*baseline, opt, TraceScope::AllNets, opts.threads),
                         aged, copts);
  r.eligible = candidates.size();
  r.candidate_seconds = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const FitnessContext ctx = FitnessContext::make(baseline, candidates, model, delay_target, opt,
                                                  decoding, opts.metric, config.epsilon);
  r.ga = evolve(config, ctx, opts.threads);
  r.feasible = r.ga.feasible;
  r.ga_seconds = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  r.approximate = std::make_shared<const Netlist>(apply_chromosome(*baseline, r.ga.best, candidates));
  r.approx_fresh_cpd = critical_path_delay(*r.approximate, model, Corner::Fresh);
  const AnnotatedDag approx_aged = annotate(r.approximate, model, Corner::Aged);
  r.approx_aged_cpd = approx_aged.cpd;

  const auto golden = decode_outputs(functional_simulate(*baseline, eval, TraceScope::OutputsOnly,
                                                         opts.threads),
                                     decoding);
  const auto approx_func = decode_outputs(
      functional_simulate(*r.approximate, eval, TraceScope::OutputsOnly, opts.threads), decoding);
  const auto approx_timed = decode_outputs(timing_simulate(approx_aged, eval, delay_target), decoding);
  const auto base_timed = decode_outputs(timing_simulate(aged, eval, delay_target), decoding);
  r.approx_nmed = nmed(golden, approx_func, decoding, opts.metric).nmed;
  r.approx_timed_nmed = nmed(golden, approx_timed, decoding, opts.metric).nmed;
  r.baseline_aged_nmed = nmed(golden, base_timed, decoding, opts.metric).nmed;
  r.timing_matches_functional = approx_timed == approx_func;
  r.evaluation_seconds = seconds_since(t0);

  std::vector<ApproximationCandidate> chosen;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (r.ga.best.bits[i]) chosen.push_back(candidates[i]);
  r.selected = chosen.size();
  r.mix.candidates = candidate_mix(candidates);
  r.mix.selected = candidate_mix(chosen);
  return r;
}

Quartiles quartiles(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyStream, "no samples");
  std::sort(values.begin(), values.end());
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return {values.front(), at(0.25), at(0.5), at(0.75), values.back()};
}

MonteCarloSummary run_montecarlo(const Netlist& baseline, const Netlist& approximate,
                                 const CellTimingModel& model, const StimulusSet& stimuli,
                                 const OutputDecoding& decoding, double clock,
                                 const MonteCarloOptions& opts) {
  if (opts.samples < 1) throw Error(ErrorCode::InvalidArgument, "need at least one sample");
  const std::size_t count =
      opts.subsample == 0 ? stimuli.count() : std::min(opts.subsample, stimuli.count());
  const StimulusSet sub = stimuli.slice(0, count);
  const auto golden = decode_outputs(functional_simulate(baseline, sub, TraceScope::OutputsOnly),
                                     decoding);
  const AnnotatedDag aged_base = annotate(baseline, model, Corner::Aged);
  const AnnotatedDag aged_approx = annotate(approximate, model, Corner::Aged);

  MonteCarloSummary s;
  s.baseline_nmed.assign(opts.samples, 0.0);
  s.approximate_nmed.assign(opts.samples, 0.0);
  parallel_for(opts.samples, opts.threads, [&](std::size_t k) {
    auto run = [&](const AnnotatedDag& dag, std::uint64_t stream) {
      const VariationSample v = sample_variation(dag, opts.sigma_ratio, derive_seed(opts.seed, k, stream));
      const AnnotatedDag varied = restatic(dag, v.delays);
      const auto observed = decode_outputs(timing_simulate(varied, sub, clock), decoding);
      return nmed(golden, observed, decoding, opts.metric).nmed;
    };
    s.baseline_nmed[k] = run(aged_base, 1);
    s.approximate_nmed[k] = run(aged_approx, 2);
  });
  s.baseline = quartiles(s.baseline_nmed);
  s.approximate = quartiles(s.approximate_nmed);
  return s;
}

std::string experiment_csv_header() {
  return "circuit,gates,fresh_cpd,aged_cpd,approx_aged_cpd,baseline_aged_nmed,approx_nmed,"
         "approx_timed_nmed,timing_matches_functional,feasible,eligible,selected,"
         "cand_const0,cand_const1,cand_wire,sel_const0,sel_const1,sel_wire,"
         "candidate_seconds,ga_seconds,evaluation_seconds\n";
}

std::string experiment_csv_row(const ExperimentRecord& r) {
  std::ostringstream os;
  os.precision(12);
  os << r.circuit << ',' << r.gates << ',' << r.fresh_cpd << ',' << r.aged_cpd << ','
     << r.approx_aged_cpd << ',' << r.baseline_aged_nmed << ',' << r.approx_nmed << ','
     << r.approx_timed_nmed << ',' << r.timing_matches_functional << ',' << r.feasible << ','
     << r.eligible << ',' << r.selected << ',' << r.mix.candidates.const0 << ','
     << r.mix.candidates.const1 << ',' << r.mix.candidates.wire << ',' << r.mix.selected.const0
     << ',' << r.mix.selected.const1 << ',' << r.mix.selected.wire << ',' << r.candidate_seconds
     << ',' << r.ga_seconds << ',' << r.evaluation_seconds << '\n';
  return os.str();
}

std::string montecarlo_csv(const std::string& circuit, const MonteCarloSummary& s) {
  std::ostringstream os;
  os.precision(12);
  os << "circuit,variant,min,q1,median,q3,max\n";
  auto row = [&](const char* variant, const Quartiles& q) {
    os << circuit << ',' << variant << ',' << q.min << ',' << q.q1 << ',' << q.median << ','
       << q.q3 << ',' << q.max << '\n';
  };
  row("baseline_aged", s.baseline);
  row("approximate_aged", s.approximate);
  return os.str();
}

}  // namespace agx
