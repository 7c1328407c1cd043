#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "aoistarve/analytic.hpp"
#include "aoistarve/config.hpp"
#include "aoistarve/metrics.hpp"
#include "aoistarve/world.hpp"

namespace aoistarve {

struct RunOptions {
  std::vector<double> tdr_thresholds_ms = {100.0, 120.0, 400.0};
  std::int64_t warmup_ms = -1;  // default: 10 * gamma
  // Abstract PHY by default: a node can receive while transmitting. With
  // strictly periodic transmitters a half-duplex constraint turns subframe
  // alignment into epoch-long outages, which the renewal model (and the
  // reference results) deliberately abstracts away.
  bool half_duplex = false;
  std::ostream* reset_sample_sink = nullptr;  // per-reception CSV rows
  std::ostream* event_sink = nullptr;         // full event dump CSV rows
};

struct RunRecord {
  Config config;
  std::uint64_t config_hash = 0;
  MetricsReport report;
  std::optional<AoiPrediction> prediction;  // absent when x = 1 degenerate
  double wall_ms = 0.0;

  std::string to_json() const;
};

// Runs one simulation to its configured horizon and collects metrics plus the
// matching analytical prediction.
RunRecord run_simulation(const Config& cfg, const RunOptions& opt = {});

// CSV event sink:
//   type,tx_id,rx_id,gen_ms,time_ms,subframe,subchannel,outcome
// with type in {tx, rx}; rx_id and outcome are empty on tx rows.
class CsvEventSink : public EventSink {
 public:
  explicit CsvEventSink(std::ostream& out);
  void on_tx(const TxEvent& ev) override;
  void on_rx(const RxEvent& ev) override;

 private:
  std::ostream& out_;
};

// ---------------------------------------------------------------------------
// Parameter sweeps

enum class SweepAxis { AttackX, NVehicles, PKeep, Phi };

SweepAxis sweep_axis_from_string(const std::string& s);
const char* to_string(SweepAxis axis);
void apply_sweep_value(Config& cfg, SweepAxis axis, double value);

struct SweepSpec {
  SweepAxis axis = SweepAxis::AttackX;
  std::vector<double> values;
  int replicas = 1;
  std::uint64_t root_seed = 1;
};

struct SweepPoint {
  double value = 0.0;
  int replicas_ok = 0;
  int replicas_failed = 0;
  double avg_aoi_mean = 0.0;
  double avg_aoi_std = 0.0;
  double prr_mean = 0.0;
  double availability_mean = 0.0;
  std::map<double, double> tdr_time_mean;
  std::map<double, double> tdr_sample_mean;
  double predicted_aoi_ms = 0.0;  // NaN when the prediction is degenerate
  std::vector<double> avg_aoi_samples;
  std::vector<std::string> errors;
};

// Runs replicas x values simulations, up to `jobs` in parallel. Replica seeds
// are derived deterministically from (root_seed, point index, replica index),
// so results do not depend on scheduling. A failed replica is recorded in the
// point's errors and the remaining replicas still run.
std::vector<SweepPoint> run_sweep(const Config& base, const SweepSpec& spec,
                                  int jobs = 1, const RunOptions& opt = {});

std::string sweep_to_json(const SweepSpec& spec,
                          const std::vector<SweepPoint>& points);
std::string sweep_to_csv(const std::vector<SweepPoint>& points,
                         const std::vector<double>& tdr_thresholds);

// ---------------------------------------------------------------------------
// Self-validation checks (model vs. independent computations vs. simulator)

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Closed-form sanity: Table-style pinned values and agreement of the two
// published forms of the average-AoI expression.
CheckResult check_closed_form(double expected_benign_aoi = 201.5);

// Markov-chain model vs. closed form across a (gamma, sched prob) grid.
CheckResult check_dtmc_against_closed_form(double tolerance = 1e-8);

// Monte-Carlo inter-success moments vs. the closed form.
CheckResult check_geometric_moments(std::uint64_t seed, std::int64_t draws,
                                    double tolerance = 0.01);

// End-to-end: simulated average AoI vs. the analytical prediction over a
// grid of starvation fractions.
CheckResult check_sim_against_analytic(std::uint64_t seed,
                                       std::int64_t sim_ms,
                                       double benign_tolerance = 0.025,
                                       double attacked_tolerance = 0.08);

std::vector<CheckResult> run_validation_checks(std::uint64_t seed,
                                               std::int64_t sim_ms);

}  // namespace aoistarve
