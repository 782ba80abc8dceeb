#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "linea/bnb.hpp"
#include "linea/exchange.hpp"
#include "linea/instance_io.hpp"
#include "linea/schedule.hpp"
#include "linea/sim.hpp"

#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)

namespace py = pybind11;
using nlohmann::json;

namespace {

// Documents cross the boundary as JSON text; the Python package decodes them.
linea::ProblemInstance instance_of(const std::string& text) { return linea::instance_from_json(json::parse(text)); }

linea::SolveParams params_of(double gap, double time_limit, long node_limit) {
  linea::SolveParams p;
  p.gap = gap;
  p.time_limit = time_limit;
  p.node_limit = node_limit;
  return p;
}

py::dict solution_dict(const linea::MILPSolution& sol, const linea::Encoding& enc, const linea::ProblemInstance& inst) {
  py::dict out;
  out["status"] = linea::to_string(sol.status);
  out["objective"] = sol.has_solution() ? py::object(py::float_(sol.objective)) : py::none();
  out["bound"] = sol.bound;
  out["nodes"] = sol.nodes;
  out["seconds"] = sol.seconds;
  out["schedule"] = sol.has_solution() ? py::object(py::str(linea::write_schedule_json(linea::decode_schedule(sol, enc, inst))))
                                       : py::none();
  return out;
}

py::list events_list(const std::vector<linea::SimEvent>& events) {
  py::list out;
  for (const auto& e : events) out.append(py::make_tuple(e.step, e.kind, e.subject, e.message));
  return out;
}

}  // namespace

PYBIND11_MODULE(_linea, m) {
  m.doc() = R"pbdoc(
        linea._linea
        ------------
        Native core: encoder, branch-and-bound, exporters and simulator.
        Instances, schedules and anomalies are passed as JSON text.
    )pbdoc";

  py::register_exception<linea::Error>(m, "LineaError", PyExc_ValueError);

  m.def(
      "validate",
      [](const std::string& instance) {
        std::vector<std::tuple<std::string, std::string, std::string>> out;
        for (const auto& v : linea::validate(instance_of(instance)))
          out.emplace_back(linea::to_string(v.kind), v.subject, v.message);
        return out;
      },
      py::arg("instance"), "Returns (kind, subject, message) for every violation.");

  m.def(
      "model_stats",
      [](const std::string& instance) {
        const auto stats = linea::model_stats(linea::encode(instance_of(instance)).model);
        py::dict out;
        out["binary_columns"] = stats.binary_columns;
        out["continuous_columns"] = stats.continuous_columns;
        out["rows"] = stats.rows;
        out["nonzeros"] = stats.nonzeros;
        return out;
      },
      py::arg("instance"));

  m.def(
      "plan",
      [](const std::string& instance, double gap, double time_limit, long node_limit) {
        const auto inst = instance_of(instance);
        const auto enc = linea::encode(inst);
        linea::MILPSolution sol;
        {
          py::gil_scoped_release release;
          sol = linea::solve_milp(enc.model, params_of(gap, time_limit, node_limit));
        }
        return solution_dict(sol, enc, inst);
      },
      py::arg("instance"), py::arg("gap") = 1e-6, py::arg("time_limit") = 300.0, py::arg("node_limit") = 1000000);

  m.def(
      "oracle",
      [](const std::string& instance, int max_binaries) {
        const auto inst = instance_of(instance);
        const auto enc = linea::encode(inst);
        return solution_dict(linea::brute_force(enc.model, max_binaries), enc, inst);
      },
      py::arg("instance"), py::arg("max_binaries") = 20);

  m.def(
      "export_model",
      [](const std::string& instance, const std::string& format) {
        const auto inst = instance_of(instance);
        const auto enc = linea::encode(inst);
        const std::string name = inst.name.empty() ? "LINEA" : inst.name;
        if (format == "mps") return linea::write_mps(enc.model, name);
        if (format == "lp") return linea::write_lp(enc.model, name);
        throw linea::Error("format must be mps or lp");
      },
      py::arg("instance"), py::arg("format") = "mps");

  m.def(
      "check",
      [](const std::string& instance, const std::string& schedule) {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& v : linea::check_schedule(instance_of(instance), linea::read_schedule_json(schedule)))
          out.emplace_back(v.rule, v.message);
        return out;
      },
      py::arg("instance"), py::arg("schedule"));

  py::class_<linea::Simulator>(m, "Simulator")
      .def(py::init([](const std::string& instance, const std::string& schedule, bool auto_replan, double time_limit) {
             linea::SimOptions opts;
             opts.auto_replan = auto_replan;
             opts.solve.time_limit = time_limit;
             return linea::Simulator(instance_of(instance), linea::read_schedule_json(schedule), opts);
           }),
           py::arg("instance"), py::arg("schedule"), py::arg("auto_replan") = false, py::arg("time_limit") = 300.0)
      .def_property_readonly("clock", &linea::Simulator::clock)
      .def_property_readonly("horizon", &linea::Simulator::horizon)
      .def_property_readonly("finished", &linea::Simulator::finished)
      .def("step", [](linea::Simulator& s) { return events_list(s.step()); })
      .def("run_to_end", &linea::Simulator::run_to_end)
      .def("inject", [](linea::Simulator& s, const std::string& anomaly) { s.inject(linea::anomaly_from_json(json::parse(anomaly))); },
           py::arg("anomaly"))
      .def("deviations",
           [](const linea::Simulator& s) {
             std::vector<std::tuple<std::string, std::string, std::string>> out;
             for (const auto& d : s.detect_deviation()) out.emplace_back(d.kind, d.subject, d.message);
             return out;
           })
      .def(
          "replan",
          [](linea::Simulator& s, std::optional<int> window) {
            const auto r = s.replan(window);
            py::dict out;
            out["applied"] = r.applied;
            out["clock"] = r.clock;
            out["window"] = r.window;
            out["status"] = linea::to_string(r.solution.status);
            out["objective"] = r.solution.has_solution() ? py::object(py::float_(r.solution.objective)) : py::none();
            out["message"] = r.message;
            return out;
          },
          py::arg("window") = py::none())
      .def("plan", [](const linea::Simulator& s) { return linea::write_schedule_json(s.plan()); })
      .def("trajectory", [](const linea::Simulator& s) { return linea::write_schedule_json(s.trajectory()); })
      .def("state", [](const linea::Simulator& s) { return s.state_json().dump(); })
      .def("trace", &linea::Simulator::trace_ndjson);

#ifdef VERSION_INFO
  m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
  m.attr("__version__") = "dev";
#endif
}
