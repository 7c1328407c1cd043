#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "aoistarve/experiments.hpp"

using namespace aoistarve;

namespace {

Config quick_config(int n = 6, std::int64_t horizon = 30000,
                    std::uint64_t seed = 3) {
  Config cfg;
  cfg.scenario.n_vehicles = n;
  cfg.sim_duration_ms = horizon;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("run records are reproducible apart from wall time") {
  const RunRecord a = run_simulation(quick_config());
  const RunRecord b = run_simulation(quick_config());
  CHECK(a.config_hash == b.config_hash);
  CHECK(a.report.avg_aoi_ms == b.report.avg_aoi_ms);
  CHECK(a.report.n_receptions == b.report.n_receptions);
  CHECK(a.report.prr == b.report.prr);
  REQUIRE(a.prediction.has_value());
  CHECK(a.prediction->average_aoi_ms == doctest::Approx(201.5));
}

TEST_CASE("reset and event CSV streams are byte-identical across runs") {
  auto run_once = [](std::string& resets, std::string& events) {
    std::ostringstream r, e;
    RunOptions opt;
    opt.reset_sample_sink = &r;
    opt.event_sink = &e;
    run_simulation(quick_config(5, 15000, 8), opt);
    resets = r.str();
    events = e.str();
  };
  std::string r1, e1, r2, e2;
  run_once(r1, e1);
  run_once(r2, e2);
  CHECK(r1 == r2);
  CHECK(e1 == e2);
  CHECK(r1.rfind("tx_id,rx_id,rx_ms,reset_ms,gap_ms\n", 0) == 0);
  CHECK(e1.rfind("type,tx_id,rx_id,gen_ms,time_ms,subframe,subchannel,outcome\n",
                 0) == 0);
  CHECK(r1.size() > 100);
  CHECK(e1.find("\nrx,") != std::string::npos);
}

TEST_CASE("sweep aggregation is independent of parallelism") {
  SweepSpec spec;
  spec.axis = SweepAxis::AttackX;
  spec.values = {0.0, 0.8};
  spec.replicas = 3;
  spec.root_seed = 17;
  Config base = quick_config(5, 15000);
  base.attack.mode = AttackMode::Probabilistic;

  const auto serial = run_sweep(base, spec, 1);
  const auto parallel = run_sweep(base, spec, 4);
  REQUIRE(serial.size() == 2);
  REQUIRE(parallel.size() == 2);
  for (std::size_t p = 0; p < serial.size(); ++p) {
    CHECK(serial[p].replicas_ok == 3);
    CHECK(serial[p].avg_aoi_mean ==
          doctest::Approx(parallel[p].avg_aoi_mean).epsilon(1e-12));
    CHECK(serial[p].avg_aoi_std ==
          doctest::Approx(parallel[p].avg_aoi_std).epsilon(1e-9));
  }
}

TEST_CASE("sweep axes apply to the right config fields") {
  Config cfg = quick_config();
  apply_sweep_value(cfg, SweepAxis::PKeep, 0.8);
  CHECK(cfg.sps.p_keep == 0.8);
  apply_sweep_value(cfg, SweepAxis::Phi, 0.6);
  CHECK(cfg.sps.phi == 0.6);
  apply_sweep_value(cfg, SweepAxis::NVehicles, 40.0);
  CHECK(cfg.scenario.n_vehicles == 40);
  CHECK_THROWS_AS(apply_sweep_value(cfg, SweepAxis::NVehicles, 2.5),
                  ValidationError);
  apply_sweep_value(cfg, SweepAxis::AttackX, 0.3);
  CHECK(cfg.attack.x == 0.3);

  CHECK(sweep_axis_from_string("x") == SweepAxis::AttackX);
  CHECK(sweep_axis_from_string("n_vehicles") == SweepAxis::NVehicles);
  CHECK_THROWS_AS(sweep_axis_from_string("speed"), ValidationError);
}

TEST_CASE("failed replicas are reported without sinking the whole sweep") {
  SweepSpec spec;
  spec.axis = SweepAxis::Phi;
  spec.values = {1.0, 0.0};  // phi = 0 is invalid
  spec.replicas = 2;
  const auto points = run_sweep(quick_config(4, 10000), spec, 2);
  REQUIRE(points.size() == 2);
  CHECK(points[0].replicas_ok == 2);
  CHECK(points[1].replicas_ok == 0);
  CHECK(points[1].replicas_failed == 2);
  REQUIRE(!points[1].errors.empty());
  CHECK(points[1].errors[0].find("phi") != std::string::npos);
}

TEST_CASE("sweep serializations expose the aggregate columns") {
  SweepSpec spec;
  spec.axis = SweepAxis::AttackX;
  spec.values = {0.0};
  spec.replicas = 2;
  const auto points = run_sweep(quick_config(4, 10000), spec, 1);
  const std::string json = sweep_to_json(spec, points);
  CHECK(json.find("\"axis\": \"attack_x\"") != std::string::npos);
  CHECK(json.find("avg_aoi_mean_ms") != std::string::npos);
  const std::string csv = sweep_to_csv(points, {100.0});
  CHECK(csv.rfind("value,replicas_ok,avg_aoi_mean_ms", 0) == 0);
}

TEST_CASE("validation checks pass and fail injection is detected") {
  CHECK(check_closed_form().passed);
  CHECK_FALSE(check_closed_form(/*expected_benign_aoi=*/200.0).passed);

  CHECK(check_dtmc_against_closed_form().passed);
  CHECK_FALSE(check_dtmc_against_closed_form(/*tolerance=*/1e-16).passed);

  CHECK(check_geometric_moments(11, 1000000).passed);
  CHECK_FALSE(check_geometric_moments(11, 1000000, /*tolerance=*/1e-6).passed);
}

TEST_CASE("run records serialize with prediction and hash") {
  const RunRecord rec = run_simulation(quick_config(4, 10000));
  const std::string json = rec.to_json();
  CHECK(json.find("config_hash") != std::string::npos);
  CHECK(json.find("average_aoi_ms") != std::string::npos);
  CHECK(json.find("tdr_time") != std::string::npos);
}
