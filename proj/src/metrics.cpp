#include "aoistarve/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "nlohmann/json.hpp"

#include "aoistarve/params.hpp"

namespace aoistarve {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::vector<std::pair<int, int>> links_within_range(
    const std::vector<double>& positions_m, double range_m) {
  std::vector<std::pair<int, int>> links;
  const int n = static_cast<int>(positions_m.size());
  for (int tx = 0; tx < n; ++tx) {
    for (int rx = 0; rx < n; ++rx) {
      if (tx == rx) continue;
      if (std::abs(positions_m[tx] - positions_m[rx]) <= range_m) {
        links.emplace_back(tx, rx);
      }
    }
  }
  return links;
}

MetricsCollector::MetricsCollector(int n_ues,
                                   std::vector<std::pair<int, int>> links,
                                   std::vector<double> tdr_thresholds_ms,
                                   double warmup_ms)
    : n_ues_(n_ues),
      links_(std::move(links)),
      thresholds_(std::move(tdr_thresholds_ms)),
      warmup_ms_(warmup_ms) {
  if (n_ues_ <= 0) throw ValidationError("metrics: n_ues must be positive");
  if (warmup_ms_ < 0) throw ValidationError("metrics: warmup_ms must be >= 0");
  for (double thr : thresholds_) {
    if (!(thr > 0)) {
      throw ValidationError("metrics: tdr threshold must be positive");
    }
  }
  std::sort(thresholds_.begin(), thresholds_.end());
  slot_lookup_.assign(static_cast<std::size_t>(n_ues_) * n_ues_, -1);
  state_.resize(links_.size());
  for (std::size_t i = 0; i < links_.size(); ++i) {
    auto [tx, rx] = links_[i];
    if (tx < 0 || tx >= n_ues_ || rx < 0 || rx >= n_ues_ || tx == rx) {
      throw ValidationError("metrics: invalid link endpoint");
    }
    slot_lookup_[static_cast<std::size_t>(tx) * n_ues_ + rx] =
        static_cast<int>(i);
    state_[i].exceed.assign(thresholds_.size(), 0.0);
    state_[i].gap_within.assign(thresholds_.size(), 0);
  }
}

void MetricsCollector::set_reset_sample_sink(std::ostream* sink) {
  reset_sink_ = sink;
  if (reset_sink_) {
    *reset_sink_ << "tx_id,rx_id,rx_ms,reset_ms,gap_ms\n";
  }
}

int MetricsCollector::slot_of(int tx, int rx) const {
  if (tx < 0 || tx >= n_ues_ || rx < 0 || rx >= n_ues_) return -1;
  return slot_lookup_[static_cast<std::size_t>(tx) * n_ues_ + rx];
}

void MetricsCollector::on_tx(const TxEvent&) {}

void MetricsCollector::account_segment(LinkState& link, double from,
                                       double to) {
  // Integrates the information-age and update-age clocks over [from, to],
  // clipped to the post-warm-up window. Both clocks are anchored at
  // link.last_rx, where the information age equals link.age_after.
  if (link.last_rx < 0) return;
  const double a = std::max(from, warmup_ms_);
  const double b = to;
  if (b <= a) return;
  const double ra = a - link.last_rx;  // update age at segment start
  const double rb = b - link.last_rx;
  link.area += (b - a) * link.age_after + 0.5 * (rb * rb - ra * ra);
  link.tracked += b - a;
  for (std::size_t i = 0; i < thresholds_.size(); ++i) {
    const double cross = link.last_rx + thresholds_[i];
    link.exceed[i] += std::max(0.0, b - std::max(a, cross));
  }
}

void MetricsCollector::on_rx(const RxEvent& ev) {
  if (finalized_) throw ValidationError("metrics: collector already finalized");
  if (ev.rx_time_ms < last_event_ms_) {
    throw ValidationError("metrics: reception timestamps must be monotone");
  }
  last_event_ms_ = ev.rx_time_ms;
  if (ev.outcome == RxOutcome::OutOfRange) return;
  const int slot = slot_of(static_cast<int>(ev.tx_id),
                           static_cast<int>(ev.rx_id));
  if (slot < 0) return;
  LinkState& link = state_[static_cast<std::size_t>(slot)];

  if (ev.rx_time_ms >= warmup_ms_) {
    switch (ev.outcome) {
      case RxOutcome::Ok: ++rx_ok_; break;
      case RxOutcome::Collision: ++rx_collision_; break;
      case RxOutcome::PhyLoss: ++rx_phy_loss_; break;
      case RxOutcome::OutOfRange: break;
    }
  }

  // The delivery in progress conveys the oldest generation attempted since
  // the last successful reception on this link.
  if (link.pending_gen < 0) link.pending_gen = ev.gen_time_ms;
  if (ev.outcome != RxOutcome::Ok) return;

  account_segment(link, link.last_rx, ev.rx_time_ms);

  const double reset = ev.rx_time_ms - link.pending_gen;
  if (reset < 0) {
    throw ValidationError("metrics: reception precedes generation");
  }
  if (ev.rx_time_ms >= warmup_ms_) {
    bool first_of_link = link.n_resets == 0;
    ++link.n_resets;
    link.reset_sum += reset;
    double gap = -1.0;
    if (link.last_rx >= warmup_ms_) {
      gap = ev.rx_time_ms - link.last_rx;
      ++link.n_gaps;
      link.gap_sum += gap;
      for (std::size_t i = 0; i < thresholds_.size(); ++i) {
        if (gap <= thresholds_[i]) ++link.gap_within[i];
      }
    }
    if (reset_sink_) {
      *reset_sink_ << ev.tx_id << ',' << ev.rx_id << ',' << fmt(ev.rx_time_ms)
                   << ',' << fmt(reset) << ',';
      if (gap >= 0) *reset_sink_ << fmt(gap);
      *reset_sink_ << '\n';
    }
    (void)first_of_link;
  }

  link.last_rx = ev.rx_time_ms;
  link.age_after = reset;
  link.pending_gen = -1.0;
}

void MetricsCollector::on_subframe_end(std::int64_t t_ms,
                                       double free_fraction) {
  if (t_ms >= warmup_ms_) {
    avail_sum_ += free_fraction;
    ++avail_n_;
  }
}

MetricsReport MetricsCollector::finalize(double horizon_ms) {
  if (finalized_) throw ValidationError("metrics: collector already finalized");
  if (horizon_ms <= warmup_ms_) {
    throw ValidationError(
        "metrics: horizon_ms must extend past the warm-up cut");
  }
  finalized_ = true;

  MetricsReport rep;
  rep.n_links = static_cast<std::int64_t>(links_.size());

  double area_sum = 0.0;
  double tracked_sum = 0.0;
  double per_link_mean_sum = 0.0;
  std::int64_t links_with_data = 0;
  std::vector<double> exceed_sum(thresholds_.size(), 0.0);
  std::vector<std::int64_t> gap_within_sum(thresholds_.size(), 0);
  std::int64_t gaps = 0;
  double gap_sum = 0.0;
  std::int64_t resets = 0;
  double reset_sum = 0.0;

  for (auto& link : state_) {
    account_segment(link, link.last_rx, horizon_ms);
    if (link.tracked <= 0.0) continue;
    ++links_with_data;
    area_sum += link.area;
    tracked_sum += link.tracked;
    per_link_mean_sum += link.area / link.tracked;
    for (std::size_t i = 0; i < thresholds_.size(); ++i) {
      exceed_sum[i] += link.exceed[i];
      gap_within_sum[i] += link.gap_within[i];
    }
    gaps += link.n_gaps;
    gap_sum += link.gap_sum;
    resets += link.n_resets;
    reset_sum += link.reset_sum;
  }

  rep.n_links_no_data = rep.n_links - links_with_data;
  rep.has_data = links_with_data > 0;
  rep.tracked_time_ms = tracked_sum;
  rep.n_receptions = resets;
  if (rep.has_data) {
    rep.avg_aoi_ms = area_sum / tracked_sum;
    rep.avg_aoi_per_link_ms = per_link_mean_sum / links_with_data;
    rep.reset_aoi_mean_ms = resets > 0 ? reset_sum / resets : 0.0;
    rep.mean_update_gap_ms = gaps > 0 ? gap_sum / gaps : 0.0;
    for (std::size_t i = 0; i < thresholds_.size(); ++i) {
      rep.tdr_time[thresholds_[i]] = 1.0 - exceed_sum[i] / tracked_sum;
      rep.tdr_sample[thresholds_[i]] =
          gaps > 0 ? static_cast<double>(gap_within_sum[i]) / gaps : 1.0;
    }
  }

  rep.rx_ok = rx_ok_;
  rep.rx_collision = rx_collision_;
  rep.rx_phy_loss = rx_phy_loss_;
  const std::int64_t attempts = rx_ok_ + rx_collision_ + rx_phy_loss_;
  rep.prr = attempts > 0 ? static_cast<double>(rx_ok_) / attempts : 0.0;
  rep.available_resource_fraction =
      avail_n_ > 0 ? avail_sum_ / avail_n_ : 0.0;
  return rep;
}

std::string MetricsReport::to_json() const {
  nlohmann::json j;
  j["has_data"] = has_data;
  j["avg_aoi_ms"] = avg_aoi_ms;
  j["avg_aoi_per_link_ms"] = avg_aoi_per_link_ms;
  j["reset_aoi_mean_ms"] = reset_aoi_mean_ms;
  j["mean_update_gap_ms"] = mean_update_gap_ms;
  j["prr"] = prr;
  j["rx_ok"] = rx_ok;
  j["rx_collision"] = rx_collision;
  j["rx_phy_loss"] = rx_phy_loss;
  j["available_resource_fraction"] = available_resource_fraction;
  j["n_links"] = n_links;
  j["n_links_no_data"] = n_links_no_data;
  j["n_receptions"] = n_receptions;
  j["tracked_time_ms"] = tracked_time_ms;
  j["tdr_sample"] = nlohmann::json::object();
  j["tdr_time"] = nlohmann::json::object();
  for (const auto& [thr, v] : tdr_sample) j["tdr_sample"][fmt(thr)] = v;
  for (const auto& [thr, v] : tdr_time) j["tdr_time"][fmt(thr)] = v;
  return j.dump(2);
}

std::string MetricsReport::to_text() const {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "links tracked        : " << n_links
     << " (" << n_links_no_data << " without data)\n";
  os << "receptions counted   : " << n_receptions << "\n";
  os << "avg AoI (pooled)     : " << avg_aoi_ms << " ms\n";
  os << "avg AoI (per link)   : " << avg_aoi_per_link_ms << " ms\n";
  os << "mean reset AoI       : " << reset_aoi_mean_ms << " ms\n";
  os << "mean update gap      : " << mean_update_gap_ms << " ms\n";
  os << "PRR                  : " << prr << "  (ok " << rx_ok << ", collision "
     << rx_collision << ", phy " << rx_phy_loss << ")\n";
  os << "resource availability: " << available_resource_fraction << "\n";
  for (const auto& [thr, v] : tdr_time) {
    auto it = tdr_sample.find(thr);
    os << "TDR @ " << std::setprecision(0) << thr << " ms"
       << std::setprecision(4) << "        : time " << v << ", sample "
       << (it != tdr_sample.end() ? it->second : 0.0) << "\n";
  }
  return os.str();
}

}  // namespace aoistarve
