#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "agx/bench.hpp"
#include "agx/metrics.hpp"
#include "agx/netlist.hpp"
#include "agx/sim.hpp"
#include "agx/timing.hpp"

namespace py = pybind11;
using namespace agx;

namespace {

Corner corner_of(const std::string& name) {
  if (name == "fresh") return Corner::Fresh;
  if (name == "aged") return Corner::Aged;
  throw Error(ErrorCode::InvalidArgument, "corner must be fresh or aged: " + name);
}

NmedVariant metric_of(const std::string& name) {
  auto v = parse_nmed_variant(name);
  if (!v) throw Error(ErrorCode::InvalidArgument, "unknown metric: " + name);
  return *v;
}

py::dict metrics_dict(const ErrorMetrics& m) {
  py::dict d;
  d["nmed"] = m.nmed;
  d["mean_error_distance"] = m.mean_error_distance;
  d["error_rate"] = m.error_rate;
  d["max_error_distance"] = m.max_error_distance;
  d["vectors"] = m.vectors;
  return d;
}

py::list ports(const std::vector<Port>& ps) {
  py::list out;
  for (const Port& p : ps) out.append(py::make_tuple(p.name, p.width()));
  return out;
}

}  // namespace

PYBIND11_MODULE(_agx, m) {
  m.doc() = "Aging-aware approximate circuit synthesis";

  static py::exception<Error> agx_error(m, "AgxError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::handle(agx_error)(e.what());
      inst.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(agx_error.ptr(), inst.ptr());
    }
  });

  py::class_<Netlist, std::shared_ptr<Netlist>>(m, "Netlist")
      .def_property_readonly("name", &Netlist::name)
      .def_property_readonly("gate_count", &Netlist::gate_count)
      .def_property_readonly("net_count", &Netlist::net_count)
      .def_property_readonly("inputs", [](const Netlist& n) { return ports(n.inputs()); })
      .def_property_readonly("outputs", [](const Netlist& n) { return ports(n.outputs()); })
      .def("__repr__", [](const Netlist& n) {
        return "<Netlist " + n.name() + " gates=" + std::to_string(n.gate_count()) + ">";
      });

  py::class_<CellTimingModel>(m, "TimingModel")
      .def_static("default", &CellTimingModel::default_library)
      .def_static("parse", &parse_timing_model, py::arg("text"), py::arg("aging_factor") = kDefaultAgingFactor)
      .def_static("read", &read_timing_file, py::arg("path"), py::arg("aging_factor") = kDefaultAgingFactor)
      .def("aged", [](const CellTimingModel& fresh, double factor) { return derive_aged_model(fresh, factor); })
      .def("__str__", &format_timing_model);

  py::class_<StimulusSet>(m, "Stimuli")
      .def_property_readonly("count", &StimulusSet::count)
      .def("value", &StimulusSet::bus_value, py::arg("bus"), py::arg("vector"))
      .def("__len__", &StimulusSet::count)
      .def("__str__", &format_stimuli);

  auto share = [](Netlist n) { return std::make_shared<Netlist>(std::move(n)); };

  m.def("parse_netlist", [share](const std::string& text) { return share(parse_netlist(text)); });
  m.def("read_netlist", [share](const std::string& path) { return share(read_netlist_file(path)); });
  m.def("emit_netlist", &emit_netlist);
  m.def("benchmark", [share](const std::string& name) {
    return share(generate_benchmark(BenchmarkSpec::from_name(name)));
  });

  m.def(
      "critical_path_delay",
      [](const Netlist& n, const CellTimingModel& model, const std::string& corner) {
        return critical_path_delay(n, model, corner_of(corner));
      },
      py::arg("netlist"), py::arg("model"), py::arg("corner") = "fresh");

  m.def(
      "generate_stimuli",
      [](const Netlist& n, std::size_t count, std::uint64_t seed) {
        return generate_stimuli(input_layout(n), count, seed);
      },
      py::arg("netlist"), py::arg("count"), py::arg("seed") = kDefaultSeed);

  m.def(
      "simulate",
      [](const Netlist& n, const StimulusSet& s, int threads) {
        py::gil_scoped_release release;
        return decode_outputs(functional_simulate(n, s, TraceScope::OutputsOnly, threads), make_decoding(n));
      },
      py::arg("netlist"), py::arg("stimuli"), py::arg("threads") = 1);

  m.def(
      "timing_simulate",
      [](const Netlist& n, const CellTimingModel& model, const StimulusSet& s, double clock,
         const std::string& corner) {
        const Corner c = corner_of(corner);
        py::gil_scoped_release release;
        return decode_outputs(timing_simulate(annotate(n, model, c), s, clock), make_decoding(n));
      },
      py::arg("netlist"), py::arg("model"), py::arg("stimuli"), py::arg("clock"), py::arg("corner") = "aged");

  m.def(
      "nmed",
      [](const std::vector<std::uint64_t>& golden, const std::vector<std::uint64_t>& observed,
         std::uint64_t max_value, const std::string& metric) {
        return metrics_dict(nmed(golden, observed, max_value, metric_of(metric)));
      },
      py::arg("golden"), py::arg("observed"), py::arg("max_value"), py::arg("metric") = "nmed");

  m.def(
      "optimize",
      [share](const std::string& name, std::size_t population, std::size_t generations, std::size_t opt_vectors,
              std::size_t eval_vectors, std::uint64_t seed, int threads) {
        BenchmarkSpec spec = BenchmarkSpec::from_name(name);
        spec.opt_vectors = opt_vectors;
        spec.eval_vectors = eval_vectors;
        spec.seed = seed;
        GaConfig config = GaConfig::for_circuit(generate_benchmark(spec).gate_count());
        if (population) config.population_size = population;
        if (generations) config.generations = generations;
        config.seed = seed;
        ExperimentRecord r;
        {
          py::gil_scoped_release release;
          ExperimentOptions opts;
          opts.threads = threads;
          r = run_experiment(spec, config, CellTimingModel::default_library(), opts);
        }
        py::dict d;
        d["circuit"] = r.circuit;
        d["gates"] = r.gates;
        d["feasible"] = r.feasible;
        d["fresh_cpd"] = r.fresh_cpd;
        d["aged_cpd"] = r.aged_cpd;
        d["approx_aged_cpd"] = r.approx_aged_cpd;
        d["approx_nmed"] = r.approx_nmed;
        d["baseline_aged_nmed"] = r.baseline_aged_nmed;
        d["timing_matches_functional"] = r.timing_matches_functional;
        d["selected"] = r.selected;
        d["eligible"] = r.eligible;
        d["netlist"] = share(*r.approximate);
        return d;
      },
      py::arg("circuit"), py::arg("population") = 0, py::arg("generations") = 0,
      py::arg("opt_vectors") = 100000, py::arg("eval_vectors") = 100000, py::arg("seed") = kDefaultSeed,
      py::arg("threads") = 1);
}
