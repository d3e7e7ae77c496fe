#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "costrec/error.hpp"
#include "costrec/experiment.hpp"

namespace py = pybind11;
using namespace costrec;

namespace {

ExperimentConfig parse(const std::string& yaml, std::optional<std::uint64_t> seed, std::optional<std::string> mode) {
  ExperimentConfig c = parse_config(yaml, "<string>");
  if (seed) c.seed = *seed;
  if (mode) {
    if (*mode != "exact" && *mode != "sampled") throw ConfigError("mode", 0, "expected exact or sampled");
    c.mode = *mode == "exact" ? Mode::Exact : Mode::Sampled;
  }
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bindings for the costrec library";

  static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
  static py::exception<Error> library_error(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      config_error(e.what());
    } catch (const Error& e) {
      library_error(e.what());
    }
  });

  m.def(
      "run",
      [](const std::string& yaml, std::optional<std::uint64_t> seed, std::optional<std::string> mode, unsigned jobs) {
        const ExperimentConfig c = parse(yaml, seed, mode);
        std::string summary;
        std::ostringstream schedule, profiles;
        {
          py::gil_scoped_release release;
          const Experiment e = run_experiment(c, jobs);
          write_schedule_csv(schedule, e.bayesian ? e.bayesian->schedules : std::vector<ThresholdSchedule>{});
          write_profiles_csv(profiles, c, e);
          summary = summary_json(c, e, "run");
        }
        return py::make_tuple(summary, schedule.str(), profiles.str());
      },
      py::arg("yaml"), py::arg("seed") = py::none(), py::arg("mode") = py::none(), py::arg("jobs") = 1,
      "Run a YAML config; returns (summary json, schedule csv, profiles csv).");

  m.def(
      "audit",
      [](const std::string& yaml, std::optional<std::uint64_t> seed, std::optional<std::string> mode, unsigned jobs) {
        const ExperimentConfig c = parse(yaml, seed, mode);
        std::vector<AuditReport> reports;
        {
          py::gil_scoped_release release;
          const Experiment e = run_experiment(c, jobs);
          reports = audit_experiment(c, e, jobs);
        }
        return py::make_tuple(all_pass(reports), reports_json(reports));
      },
      py::arg("yaml"), py::arg("seed") = py::none(), py::arg("mode") = py::none(), py::arg("jobs") = 1,
      "Audit a YAML config; returns (all passed, reports json).");

  m.def(
      "lower_bound",
      [](double h, std::size_t agents, std::size_t samples, std::uint64_t seed, unsigned jobs) {
        LowerBoundConfig c;
        c.h = h;
        c.agents = agents;
        c.samples = samples;
        c.seed = seed;
        c.jobs = jobs;
        py::gil_scoped_release release;
        const auto r = lower_bound_experiment(c);
        return reports_json({r.calibration, r.floor, r.nonempty, r.baseline});
      },
      py::arg("h") = 16.0, py::arg("agents") = 1024, py::arg("samples") = 100000, py::arg("seed") = 1,
      py::arg("jobs") = 1);

  m.def("sample_count", &sample_count, py::arg("epsilon"), py::arg("agents"), py::arg("delta"));
  m.def(
      "harmonic_inequality",
      [](const std::vector<double>& a) {
        const auto r = harmonic_inequality(a);
        return py::make_tuple(r.lhs, r.bound, r.pass);
      },
      py::arg("a"), "Returns (lhs, bound, pass).");
  m.def("log_h_constant", &log_h_constant, py::arg("h"));
  m.def("config_hash", &fnv1a_hex, py::arg("text"));
}
