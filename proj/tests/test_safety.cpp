#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "aoistarve/safety.hpp"

using namespace aoistarve;

namespace {

MetricsReport report_with_tdr(double at100, double at120, double at400) {
  MetricsReport rep;
  rep.has_data = true;
  rep.tdr_sample = {{100.0, at100}, {120.0, at120}, {400.0, at400}};
  rep.tdr_time = rep.tdr_sample;
  return rep;
}

}  // namespace

TEST_CASE("the built-in service catalog pins the V2X requirements") {
  const auto services = builtin_services();
  REQUIRE(services.size() == 3);
  CHECK(services[0].name == "FCW");
  CHECK(services[0].aoi_threshold_ms == 100.0);
  CHECK(services[0].target_slr == 0.9999);
  CHECK(services[1].name == "EBW");
  CHECK(services[1].aoi_threshold_ms == 120.0);
  CHECK(services[1].target_slr == 0.9999);
  CHECK(services[2].name == "LCW");
  CHECK(services[2].aoi_threshold_ms == 400.0);
  CHECK(services[2].target_slr == 0.9990);
}

TEST_CASE("measured shortfalls convert to SLR gaps in percentage points") {
  // Reference arithmetic: 0.9999 - 0.8468 = 0.1531 for FCW, and
  // 0.9990 - 0.8606 = 0.1384 for LCW.
  const auto rep = report_with_tdr(0.8468, 0.8494, 0.8606);
  const auto services = builtin_services();

  const auto fcw = evaluate_service(services[0], rep, TdrBasis::Sample, 100.0, {});
  CHECK(fcw.slr_gap == doctest::Approx(0.1531).epsilon(1e-9));
  CHECK(fcw.unsafe);

  const auto ebw = evaluate_service(services[1], rep, TdrBasis::Sample, 100.0, {});
  CHECK(ebw.slr_gap == doctest::Approx(0.1505).epsilon(1e-9));
  CHECK(ebw.unsafe);

  const auto lcw = evaluate_service(services[2], rep, TdrBasis::Sample, 100.0, {});
  CHECK(lcw.slr_gap == doctest::Approx(0.1384).epsilon(1e-9));
  CHECK(lcw.unsafe);
}

TEST_CASE("meeting the target yields a safe verdict") {
  const auto rep = report_with_tdr(0.99995, 0.99995, 0.9995);
  for (const auto& spec : builtin_services()) {
    const auto v = evaluate_service(spec, rep, TdrBasis::Time, 100.0, {});
    CHECK_FALSE(v.unsafe);
    CHECK(v.slr_gap < 0.0);
  }
}

TEST_CASE("violation probability follows the geometric window model") {
  // 20 update opportunities in a 2 s window at a 100 ms interval.
  CHECK(violation_probability(0.8468, 2.0, 100.0) ==
        doctest::Approx(1.0 - std::pow(0.8468, 20)).epsilon(1e-12));
  CHECK(1.0 - std::pow(0.8468, 20) == doctest::Approx(0.9641).epsilon(1e-3));
  CHECK(violation_probability(1.0, 2.0, 100.0) == doctest::Approx(0.0));
  CHECK(violation_probability(0.0, 2.0, 100.0) == doctest::Approx(1.0));
}

TEST_CASE("violation probability is monotone in both arguments") {
  double prev = -1.0;
  for (const double h : {0.1, 0.5, 1.0, 2.0, 3.0}) {
    const double p = violation_probability(0.9, h, 100.0);
    CHECK(p >= prev);
    prev = p;
  }
  prev = 2.0;
  for (const double tdr : {0.5, 0.8, 0.95, 0.9999}) {
    const double p = violation_probability(tdr, 2.0, 100.0);
    CHECK(p <= prev);
    prev = p;
  }
}

TEST_CASE("windows with no update opportunity are rejected") {
  CHECK_THROWS_AS(violation_probability(0.9, 0.05, 100.0), ValidationError);
  CHECK_THROWS_AS(violation_probability(1.5, 2.0, 100.0), ValidationError);
  CHECK_THROWS_AS(violation_probability(0.9, 2.0, 0.0), ValidationError);
}

TEST_CASE("verdicts carry the requested violation curve") {
  const auto rep = report_with_tdr(0.9, 0.92, 0.95);
  const auto v = evaluate_service(builtin_services()[0], rep, TdrBasis::Time,
                                  100.0, {0.5, 1.0, 2.0});
  REQUIRE(v.horizons_s.size() == 3);
  CHECK(v.violation_probability[0] ==
        doctest::Approx(1.0 - std::pow(0.9, 5)));
  CHECK(v.violation_probability[2] ==
        doctest::Approx(1.0 - std::pow(0.9, 20)));
  CHECK(v.violation_probability[0] < v.violation_probability[1]);
  CHECK(v.violation_probability[1] < v.violation_probability[2]);
}

TEST_CASE("a report without the required threshold is an error") {
  MetricsReport rep;
  rep.has_data = true;
  rep.tdr_time = {{100.0, 0.9}};
  const ServiceSpec ebw = builtin_services()[1];  // needs 120 ms
  CHECK_THROWS_AS(evaluate_service(ebw, rep, TdrBasis::Time, 100.0, {}),
                  ValidationError);
  MetricsReport empty;
  CHECK_THROWS_AS(evaluate_service(ebw, empty, TdrBasis::Time, 100.0, {}),
                  ValidationError);
}

TEST_CASE("service catalogs load from CSV and reject junk") {
  const char* path = "test_services_tmp.csv";
  {
    std::ofstream out(path);
    out << "name,threshold_ms,target_slr\n"
        << "# comment\n"
        << "ICA,300,0.999\n"
        << "DNPW,200,0.9995\n";
  }
  const auto specs = load_services_csv(path);
  REQUIRE(specs.size() == 2);
  CHECK(specs[0].name == "ICA");
  CHECK(specs[0].aoi_threshold_ms == 300.0);
  CHECK(specs[1].target_slr == 0.9995);

  {
    std::ofstream out(path);
    out << "name,threshold_ms,target_slr\nBAD,-5,0.9\n";
  }
  CHECK_THROWS_AS(load_services_csv(path), ValidationError);
  std::remove(path);
  CHECK_THROWS_AS(load_services_csv(path), ValidationError);
}

TEST_CASE("export formats carry every verdict field") {
  const auto rep = report_with_tdr(0.8468, 0.8494, 0.8606);
  const auto verdicts =
      evaluate_all(builtin_services(), rep, TdrBasis::Sample, 100.0, {2.0});
  const std::string json = verdicts_to_json(verdicts);
  CHECK(json.find("\"FCW\"") != std::string::npos);
  CHECK(json.find("violation_curve") != std::string::npos);
  const std::string csv = verdicts_to_csv(verdicts);
  CHECK(csv.find("service,aoi_threshold_ms,target_slr,tdr_basis,measured_tdr,"
                 "slr_gap,unsafe") == 0);
  CHECK(csv.find("LCW") != std::string::npos);
}
