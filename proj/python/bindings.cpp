#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "uwqkd/bb84.hpp"
#include "uwqkd/channel.hpp"
#include "uwqkd/commands.hpp"
#include "uwqkd/config.hpp"
#include "uwqkd/decoy.hpp"
#include "uwqkd/errors.hpp"
#include "uwqkd/montecarlo.hpp"
#include "uwqkd/noise.hpp"
#include "uwqkd/relay.hpp"

namespace py = pybind11;
using namespace uwqkd;

namespace {

Criterion criterion_from(const std::string& name) {
  if (name == "qber") return Criterion::QberLimit;
  if (name == "skr") return Criterion::PositiveSkr;
  throw DomainError("criterion must be 'qber' or 'skr'");
}

Scenario load_scenario(const std::string& source, const Overrides& overrides) {
  if (has_preset(source)) return parse_config_text("[scenario]\npreset = " + source + "\n", "preset:" + source, overrides);
  return parse_config(source, overrides);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Underwater QKD link models";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_ArithmeticError);
  py::register_exception<BracketError>(m, "BracketError", PyExc_ValueError);
  py::register_exception<ModelError>(m, "ModelError", PyExc_ArithmeticError);

  py::class_<WaterType>(m, "WaterType")
      .def(py::init<>())
      .def_static("named", &WaterType::named, py::arg("name"), py::arg("correction_T"))
      .def_readwrite("name", &WaterType::name)
      .def_readwrite("extinction", &WaterType::extinction)
      .def_readwrite("correction_T", &WaterType::correction_T);

  py::class_<TurbulenceParams>(m, "TurbulenceParams")
      .def(py::init<>())
      .def_static("named", &TurbulenceParams::named, py::arg("regime"), py::arg("d_r") = 1.0)
      .def_readwrite("omega", &TurbulenceParams::omega)
      .def_readwrite("chi_T", &TurbulenceParams::chi_T)
      .def_readwrite("epsilon", &TurbulenceParams::epsilon)
      .def_readwrite("alpha_th", &TurbulenceParams::alpha_th)
      .def_readwrite("d_r", &TurbulenceParams::d_r)
      .def_readwrite("viscosity", &TurbulenceParams::viscosity);

  py::class_<LinkGeometry>(m, "LinkGeometry")
      .def(py::init<>())
      .def_readwrite("length", &LinkGeometry::length)
      .def_readwrite("tx_diameter", &LinkGeometry::tx_diameter)
      .def_readwrite("rx_diameter", &LinkGeometry::rx_diameter)
      .def_readwrite("divergence", &LinkGeometry::divergence)
      .def_readwrite("wavelength", &LinkGeometry::wavelength)
      .def_readwrite("relay_count", &LinkGeometry::relay_count);

  py::class_<LinkParams>(m, "LinkParams")
      .def(py::init<>())
      .def_readwrite("water", &LinkParams::water)
      .def_readwrite("turbulence", &LinkParams::turbulence)
      .def_readwrite("geometry", &LinkParams::geometry)
      .def("validate", &LinkParams::validate);

  py::class_<LinkReport>(m, "LinkReport")
      .def_readonly("distance", &LinkReport::distance)
      .def_readonly("qber_upper", &LinkReport::qber_upper)
      .def_readonly("skr_lower", &LinkReport::skr_lower)
      .def_readonly("mu", &LinkReport::mu)
      .def_readonly("mu0", &LinkReport::mu0)
      .def_readonly("path_loss", &LinkReport::path_loss)
      .def_readonly("noise", &LinkReport::noise);

  py::class_<DecoyReport>(m, "DecoyReport")
      .def_readonly("distance", &DecoyReport::distance)
      .def_readonly("Y0", &DecoyReport::Y0)
      .def_readonly("alpha", &DecoyReport::alpha)
      .def_readonly("Q_mu_U", &DecoyReport::Q_mu_U)
      .def_readonly("Q_mu_L", &DecoyReport::Q_mu_L)
      .def_readonly("Q_nu_L", &DecoyReport::Q_nu_L)
      .def_readonly("E_mu_U", &DecoyReport::E_mu_U)
      .def_readonly("Y1_L", &DecoyReport::Y1_L)
      .def_readonly("Q1_L", &DecoyReport::Q1_L)
      .def_readonly("e1_U", &DecoyReport::e1_U)
      .def_readonly("rate_lower", &DecoyReport::rate_lower)
      .def_readonly("flag", &DecoyReport::flag);

  py::class_<RelayOptimum>(m, "RelayOptimum")
      .def_readonly("relay_count", &RelayOptimum::relay_count)
      .def_readonly("distance", &RelayOptimum::distance)
      .def_readonly("distances", &RelayOptimum::distances);

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("name", &Scenario::name)
      .def_property_readonly("protocol", [](const Scenario& s) { return protocol_name(s.protocol); })
      .def_readwrite("link", &Scenario::link)
      .def_readwrite("seed", &Scenario::seed)
      .def_readwrite("threads", &Scenario::threads)
      .def_property(
          "sweep_values", [](const Scenario& s) { return s.sweep.values; },
          [](Scenario& s, std::vector<double> v) { s.sweep.values = std::move(v); })
      .def("canonical", &canonical_config)
      .def("hash", &scenario_hash);

  m.def("presets", &preset_names);
  m.def("load", &load_scenario, py::arg("source"), py::arg("overrides") = Overrides{},
        "Scenario from a preset name or a config file path, with section.key overrides.");
  m.def(
      "parse", [](const std::string& text, const Overrides& o) { return parse_config_text(text, "<string>", o); },
      py::arg("text"), py::arg("overrides") = Overrides{});
  m.def("commands", &command_names);
  m.def(
      "run",
      [](const std::string& command, const Scenario& s, const std::string& format) {
        ResultTable t;
        {
          py::gil_scoped_release release;
          t = run_command(command, s);
        }
        if (format == "csv") return to_csv(t);
        if (format == "json") return to_json(t);
        throw DomainError("format must be 'csv' or 'json'");
      },
      py::arg("command"), py::arg("scenario"), py::arg("format") = "json");

  m.def("path_loss", &path_loss, py::arg("geometry"), py::arg("water"), py::arg("distance"));
  m.def("correction_coefficient", &correction_coefficient, py::arg("divergence"), py::arg("diameter"));
  m.def("wave_structure_closed", &wave_structure_closed, py::arg("rho"), py::arg("distance"), py::arg("turbulence"),
        py::arg("wavelength"));
  m.def(
      "wave_structure_numeric",
      [](double rho, double L, const TurbulenceParams& t, double lambda) {
        return wave_structure_numeric(rho, L, t, lambda);
      },
      py::arg("rho"), py::arg("distance"), py::arg("turbulence"), py::arg("wavelength"));
  m.def(
      "power_transfer_mu",
      [](const LinkGeometry& g, const std::optional<TurbulenceParams>& t, double hop) {
        return power_transfer_mu(g, t, hop);
      },
      py::arg("geometry"), py::arg("turbulence"), py::arg("hop_length"));
  m.def("qber_upper_bound", &qber_upper_bound, py::arg("n_N"), py::arg("n_S"), py::arg("mu"), py::arg("loss"),
        py::arg("eta"));
  m.def("binary_entropy", &binary_entropy);
  m.def("relay_accumulated_background", &relay_accumulated_background, py::arg("n_B0"), py::arg("gamma"),
        py::arg("relay_count"));
  m.def("direct_link_report", &direct_link_report, py::arg("link"), py::arg("distance"));
  m.def(
      "achievable_distance",
      [](const LinkParams& p, const std::string& criterion, double lo, double hi) {
        py::gil_scoped_release release;
        return achievable_distance(criterion_from(criterion), p, lo, hi);
      },
      py::arg("link"), py::arg("criterion") = "qber", py::arg("lo") = 1.0, py::arg("hi") = 300.0);
  m.def(
      "optimal_relay_count",
      [](const LinkParams& p, int max_relays, const std::string& criterion, double lo, double hi) {
        py::gil_scoped_release release;
        return optimal_relay_count(p, max_relays, criterion_from(criterion), lo, hi);
      },
      py::arg("link"), py::arg("max_relays") = 10, py::arg("criterion") = "qber", py::arg("lo") = 1.0,
      py::arg("hi") = 300.0);
  m.def(
      "decoy_report", [](const Scenario& s, double L) { return decoy_report(s.link, s.decoy, L); },
      py::arg("scenario"), py::arg("distance"));
  m.def(
      "simulate",
      [](const Scenario& s, double distance, long photons) {
        McConfig cfg = s.mc.config;
        cfg.detector.plane_z = distance;
        cfg.threads = s.threads;
        McResult r;
        {
          py::gil_scoped_release release;
          r = run_simulation(photons, cfg, s.seed);
        }
        py::dict out;
        out["launched"] = r.launched;
        out["received"] = r.received;
        out["gamma"] = r.gamma();
        out["gamma_stderr"] = r.gamma_stderr();
        out["max_toa"] = r.max_toa;
        out["toa_edges"] = r.toa_histogram.edges;
        out["toa_weights"] = r.toa_histogram.weights;
        return out;
      },
      py::arg("scenario"), py::arg("distance"), py::arg("photons"));
}
