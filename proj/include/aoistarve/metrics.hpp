#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "aoistarve/events.hpp"
#include "aoistarve/params.hpp"

namespace aoistarve {

// Aggregated run-level metrics. All ages / thresholds are in milliseconds.
struct MetricsReport {
  bool has_data = false;

  // Age of information, pooled across all tracked links (time average of the
  // information-age sawtooth), plus the unweighted mean of per-link averages.
  double avg_aoi_ms = 0.0;
  double avg_aoi_per_link_ms = 0.0;
  double reset_aoi_mean_ms = 0.0;  // mean age immediately after a reception
  double mean_update_gap_ms = 0.0; // mean time between consecutive receptions

  // Timely delivery ratio per threshold.
  //  - sample basis: fraction of inter-reception gaps <= threshold
  //  - time basis:   fraction of tracked time with update age <= threshold
  std::map<double, double> tdr_sample;
  std::map<double, double> tdr_time;

  // Packet reception ratio over attempted in-range receptions.
  double prr = 0.0;
  std::int64_t rx_ok = 0;
  std::int64_t rx_collision = 0;
  std::int64_t rx_phy_loss = 0;

  // Mean fraction of selectable resources left unreserved per subframe.
  double available_resource_fraction = 0.0;

  std::int64_t n_links = 0;
  std::int64_t n_links_no_data = 0;
  std::int64_t n_receptions = 0;  // receptions counted into AoI statistics
  double tracked_time_ms = 0.0;   // total link-time under accounting

  std::string to_json() const;
  std::string to_text() const;
};

// Collects AoI / PRR / TDR / availability statistics from the event stream of
// a run. Links (ordered transmitter/receiver pairs within awareness range)
// are registered up front; events for unknown pairs are ignored.
//
// Age accounting for a link starts at its first successful reception at or
// after the warm-up cut and runs until finalize(). Two clocks are kept per
// link: the information age (reset to rx - gen on each delivered packet,
// where gen is the generation time of the oldest packet still pending since
// the last delivery) and the update age (reset to zero on each delivery),
// which drives the time-basis TDR.
class MetricsCollector : public EventSink {
 public:
  MetricsCollector(int n_ues, std::vector<std::pair<int, int>> links,
                   std::vector<double> tdr_thresholds_ms,
                   double warmup_ms);

  // Optional CSV sink receiving one row per counted reception:
  //   tx_id,rx_id,rx_ms,reset_ms,gap_ms   (gap_ms empty for the first row of
  // a link).
  void set_reset_sample_sink(std::ostream* sink);

  void on_tx(const TxEvent& ev) override;
  void on_rx(const RxEvent& ev) override;
  void on_subframe_end(std::int64_t t_ms, double free_fraction) override;

  // Closes every link's sawtooth at the given horizon and produces the
  // aggregate report. Throws ValidationError if the horizon does not extend
  // past the warm-up cut.
  MetricsReport finalize(double horizon_ms);

  const std::vector<double>& thresholds() const { return thresholds_; }
  double warmup_ms() const { return warmup_ms_; }

 private:
  struct LinkState {
    double last_rx = -1.0;     // time of last successful reception
    double age_after = 0.0;    // information age right after last_rx
    double pending_gen = -1.0; // generation time of the delivery in progress
    double area = 0.0;         // integral of information age over tracked time
    double tracked = 0.0;      // tracked time
    std::vector<double> exceed; // per-threshold time with update age > thr
    std::vector<std::int64_t> gap_within;  // per-threshold gaps <= thr
    std::int64_t n_gaps = 0;
    double gap_sum = 0.0;
    std::int64_t n_resets = 0;
    double reset_sum = 0.0;
  };

  int slot_of(int tx, int rx) const;
  void account_segment(LinkState& link, double from, double to);

  int n_ues_;
  std::vector<std::pair<int, int>> links_;
  std::vector<int> slot_lookup_;  // n_ues * n_ues, -1 for untracked pairs
  std::vector<double> thresholds_;
  double warmup_ms_;
  std::vector<LinkState> state_;

  std::int64_t rx_ok_ = 0;
  std::int64_t rx_collision_ = 0;
  std::int64_t rx_phy_loss_ = 0;

  double avail_sum_ = 0.0;
  std::int64_t avail_n_ = 0;

  double last_event_ms_ = -1.0;
  bool finalized_ = false;
  std::ostream* reset_sink_ = nullptr;
};

// Convenience: the tracked links of a scenario, i.e. all ordered pairs of
// distinct UEs whose spacing is within the awareness range.
std::vector<std::pair<int, int>> links_within_range(
    const std::vector<double>& positions_m, double range_m);

}  // namespace aoistarve
