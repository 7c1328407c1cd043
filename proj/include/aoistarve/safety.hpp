#pragma once

#include <string>
#include <vector>

#include "aoistarve/metrics.hpp"

namespace aoistarve {

// A V2X safety service with its information-freshness requirement: updates
// older than aoi_threshold_ms are useless to the service, and the long-run
// fraction of timely updates must reach target_slr (service-level
// reliability).
struct ServiceSpec {
  std::string name;
  double aoi_threshold_ms = 0.0;
  double target_slr = 0.0;
};

// Which TDR measurement a verdict is based on.
enum class TdrBasis { Time, Sample };

struct SafetyVerdict {
  ServiceSpec service;
  TdrBasis basis = TdrBasis::Time;
  double measured_tdr = 0.0;
  double slr_gap = 0.0;  // target_slr - measured_tdr; positive means unmet
  bool unsafe = false;
  // P(at least one stale update in a window of horizon_s seconds), for each
  // requested horizon.
  std::vector<double> horizons_s;
  std::vector<double> violation_probability;
};

// Built-in catalog: forward collision warning (100 ms, 0.9999), emergency
// brake warning (120 ms, 0.9999), lane change warning (400 ms, 0.9990).
std::vector<ServiceSpec> builtin_services();

// Loads a catalog from CSV with header "name,aoi_threshold_ms,target_slr".
std::vector<ServiceSpec> load_services_csv(const std::string& path);

// Probability that a window of horizon_s seconds, containing
// floor(1000 * horizon_s / update_interval_ms) update opportunities, sees at
// least one untimely update when each is timely independently w.p. tdr.
// Throws ValidationError when the window holds no opportunities.
double violation_probability(double tdr, double horizon_s,
                             double update_interval_ms);

// Evaluates one service against a measured report. The report must carry a
// TDR entry at the service's threshold. horizons_s may be empty.
SafetyVerdict evaluate_service(const ServiceSpec& spec,
                               const MetricsReport& report,
                               TdrBasis basis,
                               double update_interval_ms,
                               const std::vector<double>& horizons_s);

std::vector<SafetyVerdict> evaluate_all(const std::vector<ServiceSpec>& specs,
                                        const MetricsReport& report,
                                        TdrBasis basis,
                                        double update_interval_ms,
                                        const std::vector<double>& horizons_s);

std::string verdicts_to_json(const std::vector<SafetyVerdict>& verdicts);
std::string verdicts_to_csv(const std::vector<SafetyVerdict>& verdicts);

const char* to_string(TdrBasis basis);

}  // namespace aoistarve
