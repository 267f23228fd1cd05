// Python bindings. Configs cross the boundary as JSON-compatible dicts.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "irsloc/crb.hpp"
#include "irsloc/harness.hpp"

namespace py = pybind11;
using namespace irsloc;

namespace {

nlohmann::json to_json_value(const py::handle& obj) {
  const auto dumps = py::module_::import("json").attr("dumps");
  return nlohmann::json::parse(dumps(obj).cast<std::string>());
}

py::object from_json_value(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

ScenarioConfig scenario_from(const py::object& cfg) {
  if (cfg.is_none()) return ScenarioConfig::defaults();
  ScenarioConfig c = to_json_value(cfg).get<ScenarioConfig>();
  c.validate();
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "IRS-assisted target localization core";

  py::register_exception<Error>(m, "IrslocError", PyExc_ValueError);

  m.def(
      "default_scenario", [] { return from_json_value(ScenarioConfig::defaults()); },
      "Default scenario as a dict.");

  m.def(
      "derive_geometry", [](const py::object& cfg) { return from_json_value(derive_geometry(scenario_from(cfg))); },
      py::arg("config") = py::none());

  m.def(
      "closed_form_crb",
      [](const py::object& cfg) {
        const auto c = scenario_from(cfg);
        const auto r = closed_form_crb(c, derive_geometry(c), build_waveform(c.waveform));
        return py::dict(py::arg("crb_tau") = r.crb_tau, py::arg("crb_mu") = r.crb_mu);
      },
      py::arg("config") = py::none(), "Closed-form CRBs for the phase-aligned schedule and unit amplitude.");

  m.def(
      "compute_crb",
      [](const py::object& cfg, const std::string& schedule, std::uint64_t seed) {
        const auto c = scenario_from(cfg);
        const auto g = derive_geometry(c);
        const auto realization = draw_realization(c, g, 0, Complex{1.0, 0.0});
        const auto sched =
            make_schedule(schedule_kind_from_string(schedule), c.n_reflectors, c.n_frames, g, seed);
        const auto r = compute_crb(realization, sched, build_waveform(c.waveform), c);
        py::dict d;
        d["crb_tau"] = r.crb_tau;
        d["crb_mu"] = r.crb_mu;
        d["crb_position"] = r.crb_position;
        d["fim_channel"] = Eigen::Matrix4d(r.fim_channel);
        d["fim_position"] = Eigen::Matrix4d(r.fim_position);
        return d;
      },
      py::arg("config") = py::none(), py::arg("schedule") = "dft_scan", py::arg("seed") = 0,
      "General-FIM CRBs with unit amplitude.");

  m.def(
      "optimal_split",
      [](int total, const std::string& objective, bool brute_force) {
        const auto obj = objective == "toa"   ? SplitObjective::kToa
                         : objective == "doa" ? SplitObjective::kDoa
                                              : throw ConfigError("objective must be 'toa' or 'doa'");
        const auto s = optimal_split(total, obj, brute_force ? SplitMode::kBruteForce : SplitMode::kClosedForm);
        return py::make_tuple(s.n_reflectors, s.n_sensors);
      },
      py::arg("total"), py::arg("objective") = "toa", py::arg("brute_force") = false,
      "Returns (n_reflectors, n_sensors).");

  m.def(
      "run_point",
      [](const py::object& cfg, const std::string& scheme, int trials, std::uint64_t seed, unsigned threads) {
        const auto c = scenario_from(cfg);
        PointStats p;
        {
          py::gil_scoped_release release;
          p = run_monte_carlo(c, scheme_from_string(scheme), trials, seed, PipelineOptions{}, ScheduleKind::kDftScan,
                              threads);
        }
        py::dict d;
        d["scheme"] = std::string(to_string(p.scheme));
        d["trials_ok"] = p.trials_ok;
        d["trials_failed"] = p.trials_failed;
        d["rmse_mu"] = p.rmse_mu;
        d["rmse_pos_m"] = p.rmse_position;
        d["crb_mu"] = p.crb_mu;
        d["crb_pos_m"] = p.crb_position;
        d["invalid"] = p.invalid;
        return d;
      },
      py::arg("config") = py::none(), py::arg("scheme") = "semi_passive_dft", py::arg("trials") = 100,
      py::arg("seed") = 1, py::arg("threads") = 0, "Monte-Carlo RMSE at one operating point.");

  m.def(
      "run_sweep",
      [](const py::object& experiment) {
        auto spec = to_json_value(experiment).get<ExperimentSpec>();
        spec.validate();
        std::string csv;
        {
          py::gil_scoped_release release;
          csv = sweep_csv(run_sweep(spec));
        }
        return csv;
      },
      py::arg("experiment"), "Runs an experiment dict and returns the sweep CSV text.");
}
