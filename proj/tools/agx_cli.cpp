#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "agx/baselines.hpp"
#include "agx/bench.hpp"
#include "agx/candidates.hpp"
#include "agx/ga.hpp"
#include "agx/metrics.hpp"
#include "agx/netlist.hpp"
#include "agx/sim.hpp"
#include "agx/timing.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace agx;

namespace {

enum Exit { kOk = 0, kInfeasible = 1, kInputError = 2, kInternal = 3 };

struct InvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string netlist;
  std::string bench;
  std::string timing;
  double aging_factor = kDefaultAgingFactor;
  std::optional<double> delay_target;
  std::size_t opt_vectors = 100000;
  std::size_t eval_vectors = 100000;
  std::string opt_stimuli;
  std::string eval_stimuli;
  std::uint64_t seed = kDefaultSeed;
  std::optional<std::size_t> population;
  std::optional<std::size_t> generations;
  std::optional<double> mutation;
  std::optional<double> crossover;
  std::optional<std::size_t> elite;
  std::optional<double> diversity_threshold;
  std::string out_dir = ".";
  std::vector<std::string> output_bus;
  std::string metric = "nmed";
  int threads = 1;
};

CellTimingModel load_model(const Options& o) {
  if (o.timing.empty()) return derive_aged_model(CellTimingModel::default_library(), o.aging_factor);
  return read_timing_file(o.timing, o.aging_factor);
}

std::shared_ptr<const Netlist> load_netlist(const Options& o) {
  if (!o.netlist.empty()) return std::make_shared<const Netlist>(read_netlist_file(o.netlist));
  if (!o.bench.empty())
    return std::make_shared<const Netlist>(generate_benchmark(BenchmarkSpec::from_name(o.bench)));
  throw Error(ErrorCode::InvalidArgument, "--netlist (or --bench) is required");
}

NmedVariant metric_of(const Options& o) {
  auto v = parse_nmed_variant(o.metric);
  if (!v) throw Error(ErrorCode::InvalidArgument, "--metric must be nmed or nmed-literal");
  return *v;
}

StimulusSet load_stimuli(const Options& o, const Netlist& n, const std::string& path,
                         std::size_t count, std::uint64_t stream) {
  const auto layout = input_layout(n);
  if (!path.empty()) return read_stimulus_file(path, layout);
  return generate_stimuli(layout, count, derive_seed(o.seed, stream));
}

GaConfig ga_config(const Options& o, const Netlist& n) {
  GaConfig c = GaConfig::for_circuit(n.gate_count());
  c.seed = o.seed;
  if (o.population) c.population_size = *o.population;
  if (o.generations) c.generations = *o.generations;
  if (o.mutation) {
    c.mutation_probability_initial = *o.mutation;
    c.mutation_probability_max = std::max(c.mutation_probability_max, *o.mutation);
  }
  if (o.crossover) c.crossover_probability = *o.crossover;
  if (o.elite) c.elite_count = *o.elite;
  if (o.diversity_threshold) c.diversity_threshold = *o.diversity_threshold;
  c.validate();
  return c;
}

fs::path out_path(const Options& o, const std::string& file) {
  fs::create_directories(o.out_dir);
  return fs::path(o.out_dir) / file;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw Error(ErrorCode::FileNotFound, "cannot write " + p.string());
  out << text;
}

json mix_json(const CandidateMix& m) {
  return {{"const0", m.const0}, {"const1", m.const1}, {"wire", m.wire}};
}

json metrics_json(const ErrorMetrics& m) {
  return {{"nmed", m.nmed},
          {"mean_error_distance", m.mean_error_distance},
          {"error_rate", m.error_rate},
          {"max_error_distance", m.max_error_distance},
          {"vectors", m.vectors}};
}

std::string output_stream(const std::vector<std::uint64_t>& values, const OutputDecoding& d) {
  std::ostringstream os;
  os << "vector," << d.name << "\n";
  for (std::size_t i = 0; i < values.size(); ++i) os << i << ',' << values[i] << "\n";
  return os.str();
}

std::vector<std::uint64_t> read_output_stream(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, path);
  std::vector<std::uint64_t> values;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || lineno == 1) continue;
    const auto comma = line.find(',');
    try {
      values.push_back(std::stoull(comma == std::string::npos ? line : line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw ParseError(ErrorCode::SyntaxError, lineno, 1, "expected 'vector,value'", path);
    }
  }
  return values;
}

// ---------------------------------------------------------------------------

int cmd_optimize(const Options& o) {
  auto baseline = load_netlist(o);
  const auto model = load_model(o);
  const double target =
      o.delay_target.value_or(critical_path_delay(*baseline, model, Corner::Fresh));
  const auto decoding = make_decoding(*baseline, o.output_bus);
  const auto opt = load_stimuli(o, *baseline, o.opt_stimuli, o.opt_vectors, 1);
  const auto eval = load_stimuli(o, *baseline, o.eval_stimuli, o.eval_vectors, 2);
  const GaConfig config = ga_config(o, *baseline);
  ExperimentOptions eo;
  eo.metric = metric_of(o);
  eo.threads = o.threads;
  const ExperimentRecord r = run_experiment(baseline, baseline->name(), opt, eval, decoding, config,
                                            model, target, eo);

  const std::string text = emit_netlist(*r.approximate);
  // Re-verify from the emitted text with a fresh timing pass.
  const double check = critical_path_delay(parse_netlist(text), model, Corner::Aged);
  if (r.feasible && check > target)
    throw InvariantViolation("emitted netlist misses the delay target on re-analysis");

  const fs::path netlist_file = out_path(o, baseline->name() + "_approx.v");
  write_file(netlist_file, text);
  write_file(out_path(o, baseline->name() + "_history.csv"), format_history_csv(r.ga));
  json report = {
      {"circuit", r.circuit},
      {"seed", config.seed},
      {"feasible", r.feasible},
      {"delay_target", target},
      {"fresh_cpd", r.fresh_cpd},
      {"aged_cpd", r.aged_cpd},
      {"approx_fresh_cpd", r.approx_fresh_cpd},
      {"approx_aged_cpd", r.approx_aged_cpd},
      {"metric", o.metric},
      {"opt_nmed", r.ga.best_nmed},
      {"nmed", r.approx_nmed},
      {"approx_timed_nmed", r.approx_timed_nmed},
      {"baseline_aged_nmed", r.baseline_aged_nmed},
      {"timing_matches_functional", r.timing_matches_functional},
      {"chromosome", r.ga.best.to_string()},
      {"eligible", r.eligible},
      {"selected", r.selected},
      {"candidate_mix", {{"candidates", mix_json(r.mix.candidates)}, {"selected", mix_json(r.mix.selected)}}},
      {"ga",
       {{"population", config.population_size},
        {"generations", config.generations},
        {"generations_run", r.ga.history.size()},
        {"crossover", config.crossover_probability},
        {"mutation", config.mutation_probability_initial},
        {"mutation_max", config.mutation_probability_max},
        {"elite", config.elite_count},
        {"diversity_threshold", config.diversity_threshold},
        {"evaluations", r.ga.evaluations}}},
      {"opt_vectors", opt.count()},
      {"eval_vectors", eval.count()},
      {"netlist", netlist_file.filename().string()},
  };
  write_file(out_path(o, baseline->name() + "_report.json"), report.dump(2) + "\n");

  std::cout << "fresh_cpd " << r.fresh_cpd << "\naged_cpd " << r.aged_cpd << "\napprox_aged_cpd "
            << r.approx_aged_cpd << "\nnmed " << r.approx_nmed << "\nbaseline_aged_nmed "
            << r.baseline_aged_nmed << "\n";
  std::cerr << "runtime: candidates " << r.candidate_seconds << " s, ga " << r.ga_seconds
            << " s, evaluation " << r.evaluation_seconds << " s\n";
  if (!r.feasible) {
    std::cerr << "error: no chromosome meets the aged delay target " << target << "\n";
    return kInfeasible;
  }
  return kOk;
}

int cmd_sta(const Options& o, const std::string& corner_name) {
  auto n = load_netlist(o);
  const auto model = load_model(o);
  Corner corner = Corner::Aged;
  if (corner_name == "fresh") corner = Corner::Fresh;
  else if (corner_name != "aged")
    throw Error(ErrorCode::InvalidArgument, "--corner must be fresh or aged");
  const AnnotatedDag dag = annotate(n, model, corner);
  std::cout << "fresh_cpd " << critical_path_delay(*n, model, Corner::Fresh) << "\n"
            << "aged_cpd " << critical_path_delay(*n, model, Corner::Aged) << "\n"
            << "critical_path " << to_string(corner) << "\n";
  for (NodeId g : dag.critical_path) {
    const Node& node = n->node(g);
    std::cout << "  " << node.name << " " << gate_name(node.kind) << " " << n->net(node.out).name
              << " " << dag.arrival[node.out] << "\n";
  }
  return kOk;
}

int cmd_simulate(const Options& o, const std::string& mode, const std::string& corner_name,
                 std::optional<double> clock, const std::string& stimuli,
                 const std::string& out) {
  auto n = load_netlist(o);
  const auto decoding = make_decoding(*n, o.output_bus);
  const auto s = load_stimuli(o, *n, stimuli, o.eval_vectors, 2);
  std::vector<std::uint64_t> values;
  if (mode == "functional") {
    values = decode_outputs(functional_simulate(*n, s, TraceScope::OutputsOnly, o.threads), decoding);
  } else if (mode == "timing") {
    const auto model = load_model(o);
    if (corner_name != "fresh" && corner_name != "aged")
      throw Error(ErrorCode::InvalidArgument, "--corner must be fresh or aged");
    const AnnotatedDag dag =
        annotate(n, model, corner_name == "fresh" ? Corner::Fresh : Corner::Aged);
    const double period = clock.value_or(critical_path_delay(*n, model, Corner::Fresh));
    const TimedOutcome t = timing_simulate(dag, s, period);
    std::cerr << "settled " << t.settled_count() << " of " << t.count << " vectors at clock "
              << period << "\n";
    values = decode_outputs(t, decoding);
  } else {
    throw Error(ErrorCode::InvalidArgument, "--mode must be functional or timing");
  }
  const std::string text = output_stream(values, decoding);
  if (out.empty()) std::cout << text;
  else write_file(out, text);
  return kOk;
}

int cmd_evaluate(const Options& o, const std::string& golden, const std::string& observed,
                 const std::string& approx, const std::string& stimuli) {
  const NmedVariant variant = metric_of(o);
  ErrorMetrics m;
  if (!golden.empty() || !observed.empty()) {
    if (golden.empty() || observed.empty())
      throw Error(ErrorCode::InvalidArgument, "--golden and --observed go together");
    const auto g = read_output_stream(golden);
    const auto v = read_output_stream(observed);
    if (o.netlist.empty() && o.bench.empty())
      throw Error(ErrorCode::InvalidArgument, "--netlist is required to know the output width");
    auto n = load_netlist(o);
    m = nmed(g, v, make_decoding(*n, o.output_bus), variant);
  } else {
    if (approx.empty()) throw Error(ErrorCode::InvalidArgument, "--approx or --golden/--observed required");
    auto n = load_netlist(o);
    const Netlist a = read_netlist_file(approx);
    const auto s = load_stimuli(o, *n, stimuli, o.eval_vectors, 2);
    const auto d = make_decoding(*n, o.output_bus);
    m = nmed(decode_outputs(functional_simulate(*n, s, TraceScope::OutputsOnly, o.threads), d),
             decode_outputs(functional_simulate(a, s, TraceScope::OutputsOnly, o.threads), d), d,
             variant);
  }
  json j = metrics_json(m);
  j["metric"] = o.metric;
  std::cout << j.dump(2) << "\n";
  return kOk;
}

int cmd_gen(const Options& o) {
  if (o.bench.empty()) throw Error(ErrorCode::InvalidArgument, "--bench is required");
  BenchmarkSpec spec = BenchmarkSpec::from_name(o.bench);
  spec.seed = o.seed;
  const Netlist n = generate_benchmark(spec);
  const auto layout = input_layout(n);
  write_file(out_path(o, spec.name() + ".v"), emit_netlist(n));
  write_file(out_path(o, spec.name() + "_opt.hex"),
             format_stimuli(generate_stimuli(layout, o.opt_vectors, derive_seed(o.seed, 1))));
  write_file(out_path(o, spec.name() + "_eval.hex"),
             format_stimuli(generate_stimuli(layout, o.eval_vectors, derive_seed(o.seed, 2))));
  std::cout << spec.name() << " gates " << n.gate_count() << "\n";
  return kOk;
}

int cmd_baseline(const Options& o, const std::string& method) {
  auto n = load_netlist(o);
  const auto model = load_model(o);
  const auto opt = load_stimuli(o, *n, o.opt_stimuli, o.opt_vectors, 1);
  const auto eval = load_stimuli(o, *n, o.eval_stimuli, o.eval_vectors, 2);
  BaselineInputs in;
  in.baseline = n.get();
  in.model = &model;
  in.delay_target = o.delay_target.value_or(critical_path_delay(*n, model, Corner::Fresh));
  in.opt = &opt;
  in.eval = &eval;
  in.decoding = make_decoding(*n, o.output_bus);
  in.metric = metric_of(o);
  in.threads = o.threads;
  json report = {{"circuit", n->name()}, {"method", method}, {"seed", o.seed},
                 {"delay_target", in.delay_target}};
  Netlist result;
  if (method == "glp") {
    GlpResult r = glp(in);
    report["aged_cpd"] = r.aged_cpd;
    report["metrics"] = metrics_json(r.metrics);
    json pruned = json::array();
    for (const auto& [net, v] : r.pruned) pruned.push_back({{"net", net}, {"constant", v ? 1 : 0}});
    report["pruned"] = pruned;
    result = std::move(r.netlist);
  } else if (method == "aps") {
    ApsResult r = aps(in);
    report["aged_cpd"] = r.aged_cpd;
    report["metrics"] = metrics_json(r.metrics);
    report["opt_nmed"] = r.opt_nmed;
    json trunc = json::object();
    for (std::size_t b = 0; b < n->inputs().size(); ++b)
      trunc[n->inputs()[b].name] = r.config.truncated[b];
    report["truncation"] = trunc;
    report["feasible_tuples"] = r.feasible_tuples;
    report["tuples"] = r.tuples;
    result = std::move(r.netlist);
  } else {
    throw Error(ErrorCode::InvalidArgument, "--method must be glp or aps");
  }
  write_file(out_path(o, n->name() + "_" + method + ".v"), emit_netlist(result));
  write_file(out_path(o, n->name() + "_" + method + "_report.json"), report.dump(2) + "\n");
  std::cout << report.dump(2) << "\n";
  return kOk;
}

int cmd_montecarlo(const Options& o, const std::string& approx, std::size_t samples,
                   double sigma, std::size_t subsample, std::optional<double> clock) {
  auto n = load_netlist(o);
  if (approx.empty()) throw Error(ErrorCode::InvalidArgument, "--approx is required");
  const Netlist a = read_netlist_file(approx);
  const auto model = load_model(o);
  const auto eval = load_stimuli(o, *n, o.eval_stimuli, o.eval_vectors, 2);
  MonteCarloOptions mo;
  mo.samples = samples;
  mo.sigma_ratio = sigma;
  mo.seed = o.seed;
  mo.subsample = subsample;
  mo.metric = metric_of(o);
  mo.threads = o.threads;
  const double period = clock.value_or(critical_path_delay(*n, model, Corner::Fresh));
  const auto s = run_montecarlo(*n, a, model, eval, make_decoding(*n, o.output_bus), period, mo);
  const std::string csv = montecarlo_csv(n->name(), s);
  write_file(out_path(o, n->name() + "_montecarlo.csv"), csv);
  std::cout << csv;
  return kOk;
}

int cmd_candidates(const Options& o, const std::string& out) {
  auto n = load_netlist(o);
  const auto model = load_model(o);
  const auto opt = load_stimuli(o, *n, o.opt_stimuli, o.opt_vectors, 1);
  const AnnotatedDag aged = annotate(n, model, Corner::Aged);
  CandidateOptions co;
  co.seed = o.seed;
  co.threads = o.threads;
  const auto cands =
      extract_candidates(functional_simulate(*n, opt, TraceScope::AllNets, o.threads), aged, co);
  const std::string text = format_candidates(*n, cands);
  if (out.empty()) std::cout << text;
  else write_file(out, text);
  const CandidateMix m = candidate_mix(cands);
  std::cerr << "candidates " << cands.size() << " const0 " << m.const0 << " const1 " << m.const1
            << " wire " << m.wire << "\n";
  return kOk;
}

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::Infeasible:
    case ErrorCode::Stuck:
    case ErrorCode::NoCriticalPathCandidates: return kInfeasible;
    case ErrorCode::CycleIntroduced:
    case ErrorCode::UnknownTarget:
    case ErrorCode::EmptyTraces:
    case ErrorCode::UnknownInstance: return kInternal;
    default: return kInputError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aging-aware approximate netlist optimizer"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value file; command-line flags take precedence");

  Options o;
  app.add_option("--netlist", o.netlist, "structural Verilog netlist");
  app.add_option("--bench", o.bench, "generated benchmark (rcaW, mulW, treeNxW, conv3x3_PxC)");
  app.add_option("--timing", o.timing, "cell timing file (default: built-in library)");
  app.add_option("--aging-factor", o.aging_factor, "aged/fresh delay ratio where not tabulated");
  app.add_option("--delay-target", o.delay_target, "aged delay bound (default: fresh CPD)");
  app.add_option("--opt-vectors", o.opt_vectors, "optimization vector count");
  app.add_option("--eval-vectors", o.eval_vectors, "evaluation vector count");
  app.add_option("--opt-stimuli", o.opt_stimuli, "optimization stimulus file");
  app.add_option("--eval-stimuli", o.eval_stimuli, "evaluation stimulus file");
  app.add_option("--seed", o.seed, "random seed");
  app.add_option("--population", o.population, "GA population size");
  app.add_option("--generations", o.generations, "GA generations");
  app.add_option("--mutation", o.mutation, "initial per-bit mutation probability");
  app.add_option("--crossover", o.crossover, "crossover probability");
  app.add_option("--elite", o.elite, "elite count");
  app.add_option("--diversity-threshold", o.diversity_threshold, "diversity threshold");
  app.add_option("--out-dir", o.out_dir, "output directory");
  app.add_option("--output-bus", o.output_bus, "output buses to decode, most significant first")
      ->delimiter(',');
  app.add_option("--metric", o.metric, "nmed or nmed-literal");
  app.add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);

  auto* optimize = app.add_subcommand("optimize", "find the aged approximate netlist");
  auto* sta = app.add_subcommand("sta", "static timing analysis");
  std::string corner = "aged";
  sta->add_option("--corner", corner, "fresh or aged");
  auto* simulate = app.add_subcommand("simulate", "simulate and emit the output stream");
  std::string mode = "functional", sim_corner = "aged", stimuli, out;
  std::optional<double> clock;
  simulate->add_option("--mode", mode, "functional or timing");
  simulate->add_option("--corner", sim_corner, "fresh or aged (timing mode)");
  simulate->add_option("--clock", clock, "sampling edge (default: fresh CPD)");
  simulate->add_option("--stimuli", stimuli, "stimulus file (default: generated)");
  simulate->add_option("--out", out, "output file (default: stdout)");
  auto* evaluate = app.add_subcommand("evaluate", "NMED between two streams or netlists");
  std::string golden, observed, approx;
  evaluate->add_option("--golden", golden, "reference output stream");
  evaluate->add_option("--observed", observed, "observed output stream");
  evaluate->add_option("--approx", approx, "approximate netlist");
  evaluate->add_option("--stimuli", stimuli, "stimulus file (default: generated)");
  auto* gen = app.add_subcommand("gen", "emit a benchmark netlist and stimuli");
  auto* baseline = app.add_subcommand("baseline", "run a reference approximation");
  std::string method = "glp";
  baseline->add_option("--method", method, "glp or aps");
  auto* montecarlo = app.add_subcommand("montecarlo", "process-variation study");
  std::size_t samples = 1000, subsample = 10000;
  double sigma = 0.10;
  montecarlo->add_option("--approx", approx, "approximate netlist")->required();
  montecarlo->add_option("--samples", samples, "variation samples");
  montecarlo->add_option("--sigma", sigma, "sigma/mean of each delay");
  montecarlo->add_option("--subsample", subsample, "vectors per sample (0 = all)");
  montecarlo->add_option("--clock", clock, "sampling edge (default: fresh baseline CPD)");
  auto* candidates = app.add_subcommand("candidates", "dump the candidate table");
  candidates->add_option("--out", out, "output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  std::cerr << "seed " << o.seed << "\n";
  try {
    if (!o.timing.empty() && !fs::exists(o.timing))
      throw Error(ErrorCode::FileNotFound, "timing file " + o.timing);
    if (!o.netlist.empty() && !fs::exists(o.netlist))
      throw Error(ErrorCode::FileNotFound, "netlist " + o.netlist);
    if (*optimize) return cmd_optimize(o);
    if (*sta) return cmd_sta(o, corner);
    if (*simulate) return cmd_simulate(o, mode, sim_corner, clock, stimuli, out);
    if (*evaluate) return cmd_evaluate(o, golden, observed, approx, stimuli);
    if (*gen) return cmd_gen(o);
    if (*baseline) return cmd_baseline(o, method);
    if (*montecarlo) return cmd_montecarlo(o, approx, samples, sigma, subsample, clock);
    if (*candidates) return cmd_candidates(o, out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const InvariantViolation& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kInputError;
}
