#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "aoistarve/analytic.hpp"
#include "aoistarve/config.hpp"
#include "aoistarve/dtmc.hpp"
#include "aoistarve/experiments.hpp"
#include "aoistarve/safety.hpp"

namespace py = pybind11;
using namespace aoistarve;

namespace {

Config config_from_kwargs(const py::kwargs& kwargs) {
  std::ostringstream text;
  for (auto item : kwargs) {
    text << py::str(item.first).cast<std::string>() << " = "
         << py::str(item.second).cast<std::string>() << "\n";
  }
  return parse_config(text.str());
}

py::dict prediction_to_dict(const AoiPrediction& p) {
  py::dict d;
  d["c0_ms"] = p.c0_ms;
  d["expected_reset_ms"] = p.expected_reset_ms;
  d["mean_inter_success_ms"] = p.mean_inter_success_ms;
  d["second_moment_inter_success"] = p.second_moment_inter_success;
  d["average_aoi_ms"] = p.average_aoi_ms;
  return d;
}

py::dict report_to_dict(const MetricsReport& r) {
  py::dict d;
  d["has_data"] = r.has_data;
  d["avg_aoi_ms"] = r.avg_aoi_ms;
  d["avg_aoi_per_link_ms"] = r.avg_aoi_per_link_ms;
  d["reset_aoi_mean_ms"] = r.reset_aoi_mean_ms;
  d["mean_update_gap_ms"] = r.mean_update_gap_ms;
  d["prr"] = r.prr;
  d["available_resource_fraction"] = r.available_resource_fraction;
  d["n_links"] = r.n_links;
  d["n_links_no_data"] = r.n_links_no_data;
  d["n_receptions"] = r.n_receptions;
  d["tdr_sample"] = r.tdr_sample;
  d["tdr_time"] = r.tdr_time;
  return d;
}

}  // namespace

PYBIND11_MODULE(_aoistarve, m) {
  m.doc() =
      "Age-of-information impact of SPS resource starvation in NR-V2X "
      "sidelink mode 2";

  py::register_exception<ValidationError>(m, "ValidationError",
                                          PyExc_ValueError);

  m.def(
      "average_aoi",
      [](double p_sch, double x, int gamma, double phi) {
        return prediction_to_dict(average_aoi(p_sch, x, gamma, phi));
      },
      py::arg("p_sch") = 1.0, py::arg("x") = 0.0, py::arg("gamma") = 100,
      py::arg("phi") = 1.0,
      "Closed-form AoI prediction as a dict.");

  m.def("effective_sch_prob", &effective_sch_prob, py::arg("p_sch"),
        py::arg("x"));
  m.def("violation_probability", &violation_probability, py::arg("tdr"),
        py::arg("horizon_s"), py::arg("update_interval_ms"),
        "P(>=1 stale update within the hazard window).");

  m.def(
      "dtmc_mean_first_passage",
      [](int gamma, double p_sch_eff, int rc_min, int rc_max, double p_keep) {
        SpsParams sps;
        sps.gamma = gamma;
        sps.rc_min = rc_min;
        sps.rc_max = rc_max;
        sps.p_keep = p_keep;
        return mean_first_passage_idle_to_tx(build_sps_dtmc(sps, p_sch_eff));
      },
      py::arg("gamma") = 100, py::arg("p_sch_eff") = 1.0,
      py::arg("rc_min") = 5, py::arg("rc_max") = 15, py::arg("p_keep") = 0.4,
      "Expected subframes from Idle entry to the first transmission.");

  m.def(
      "builtin_services",
      []() {
        py::list out;
        for (const auto& s : builtin_services()) {
          py::dict d;
          d["name"] = s.name;
          d["aoi_threshold_ms"] = s.aoi_threshold_ms;
          d["target_slr"] = s.target_slr;
          out.append(d);
        }
        return out;
      },
      "The built-in V2X service catalog.");

  m.def(
      "simulate",
      [](const py::kwargs& kwargs) {
        const Config cfg = config_from_kwargs(kwargs);
        const RunRecord rec = run_simulation(cfg);
        py::dict d;
        d["config_hash"] = rec.config_hash;
        d["report"] = report_to_dict(rec.report);
        d["prediction"] = rec.prediction
                              ? py::object(prediction_to_dict(*rec.prediction))
                              : py::object(py::none());
        return d;
      },
      "Run one simulation; keyword arguments are config keys "
      "(seed=..., attack_mode=..., sim_duration_ms=..., ...).");

  m.def(
      "config_hash",
      [](const py::kwargs& kwargs) { return config_hash(config_from_kwargs(kwargs)); },
      "Stable hash of a config given as keyword arguments.");
}
