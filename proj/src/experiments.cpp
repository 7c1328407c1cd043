#include "aoistarve/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "nlohmann/json.hpp"

#include "aoistarve/dtmc.hpp"
#include "aoistarve/rng.hpp"

namespace aoistarve {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

class TeeSink : public EventSink {
 public:
  void add(EventSink* s) {
    if (s) sinks_.push_back(s);
  }
  void on_tx(const TxEvent& ev) override {
    for (auto* s : sinks_) s->on_tx(ev);
  }
  void on_rx(const RxEvent& ev) override {
    for (auto* s : sinks_) s->on_rx(ev);
  }
  void on_subframe_end(std::int64_t t, double f) override {
    for (auto* s : sinks_) s->on_subframe_end(t, f);
  }

 private:
  std::vector<EventSink*> sinks_;
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / v.size();
}

double stddev_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / (v.size() - 1));
}

}  // namespace

CsvEventSink::CsvEventSink(std::ostream& out) : out_(out) {
  out_ << "type,tx_id,rx_id,gen_ms,time_ms,subframe,subchannel,outcome\n";
}

void CsvEventSink::on_tx(const TxEvent& ev) {
  out_ << "tx," << ev.tx_id << ",," << fmt(ev.gen_time_ms) << ','
       << fmt(ev.tx_time_ms) << ',' << ev.csr.subframe_offset << ','
       << ev.csr.subchannel_start << ",\n";
}

void CsvEventSink::on_rx(const RxEvent& ev) {
  out_ << "rx," << ev.tx_id << ',' << ev.rx_id << ',' << fmt(ev.gen_time_ms)
       << ',' << fmt(ev.rx_time_ms) << ",,," << to_string(ev.outcome) << '\n';
}

RunRecord run_simulation(const Config& cfg, const RunOptions& opt) {
  const auto wall_start = std::chrono::steady_clock::now();
  Config validated = validate_params(cfg.sps, cfg.scenario, cfg.attack,
                                     cfg.seed, cfg.sim_duration_ms);

  WorldOptions wopt;
  wopt.half_duplex = opt.half_duplex;
  wopt.warmup_ms = opt.warmup_ms;
  World world(validated, wopt);

  MetricsCollector metrics(
      validated.scenario.n_vehicles,
      links_within_range(world.positions(), validated.sps.raw_m),
      opt.tdr_thresholds_ms, static_cast<double>(world.warmup_ms()));
  if (opt.reset_sample_sink) {
    metrics.set_reset_sample_sink(opt.reset_sample_sink);
  }

  TeeSink tee;
  tee.add(&metrics);
  std::optional<CsvEventSink> event_csv;
  if (opt.event_sink) {
    event_csv.emplace(*opt.event_sink);
    tee.add(&*event_csv);
  }

  world.run(validated.sim_duration_ms, &tee);

  RunRecord rec;
  rec.config = validated;
  rec.config_hash = config_hash(validated);
  rec.report = metrics.finalize(static_cast<double>(validated.sim_duration_ms));
  try {
    rec.prediction = average_aoi(validated.sps.p_sch,
                                 validated.attack.effective_x(),
                                 validated.sps.gamma, validated.sps.phi);
  } catch (const ValidationError&) {
    rec.prediction.reset();
  }
  rec.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - wall_start)
                    .count();
  return rec;
}

std::string RunRecord::to_json() const {
  nlohmann::json j;
  j["config_hash"] = config_hash;
  j["seed"] = config.seed;
  j["sim_duration_ms"] = config.sim_duration_ms;
  j["wall_ms"] = wall_ms;
  j["report"] = nlohmann::json::parse(report.to_json());
  if (prediction) {
    j["prediction"] = {
        {"c0_ms", prediction->c0_ms},
        {"expected_reset_ms", prediction->expected_reset_ms},
        {"mean_inter_success_ms", prediction->mean_inter_success_ms},
        {"second_moment_inter_success",
         prediction->second_moment_inter_success},
        {"average_aoi_ms", prediction->average_aoi_ms},
    };
  } else {
    j["prediction"] = nullptr;
  }
  return j.dump(2);
}

SweepAxis sweep_axis_from_string(const std::string& s) {
  if (s == "x" || s == "attack_x") return SweepAxis::AttackX;
  if (s == "n_vehicles" || s == "n") return SweepAxis::NVehicles;
  if (s == "p_keep") return SweepAxis::PKeep;
  if (s == "phi") return SweepAxis::Phi;
  throw ValidationError("unknown sweep axis: " + s +
                        " (expected x, n_vehicles, p_keep, or phi)");
}

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::AttackX: return "attack_x";
    case SweepAxis::NVehicles: return "n_vehicles";
    case SweepAxis::PKeep: return "p_keep";
    case SweepAxis::Phi: return "phi";
  }
  return "?";
}

void apply_sweep_value(Config& cfg, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::AttackX:
      cfg.attack.x = value;
      break;
    case SweepAxis::NVehicles: {
      const double rounded = std::round(value);
      if (std::abs(rounded - value) > 1e-9 || rounded < 1) {
        throw ValidationError("n_vehicles sweep values must be integers >= 1");
      }
      cfg.scenario.n_vehicles = static_cast<int>(rounded);
      // Keep the configured density: the road stretches with the fleet.
      cfg.scenario.road_length_m = 0.0;
      break;
    }
    case SweepAxis::PKeep:
      cfg.sps.p_keep = value;
      break;
    case SweepAxis::Phi:
      cfg.sps.phi = value;
      break;
  }
}

std::vector<SweepPoint> run_sweep(const Config& base, const SweepSpec& spec,
                                  int jobs, const RunOptions& opt) {
  if (spec.values.empty()) throw ValidationError("sweep: no values given");
  if (spec.replicas < 1) throw ValidationError("sweep: replicas must be >= 1");
  if (jobs < 1) jobs = 1;

  struct Task {
    int point;
    int replica;
  };
  std::vector<Task> tasks;
  for (int p = 0; p < static_cast<int>(spec.values.size()); ++p) {
    for (int r = 0; r < spec.replicas; ++r) tasks.push_back({p, r});
  }

  std::vector<SweepPoint> points(spec.values.size());
  std::mutex mu;
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task task = tasks[i];
      Config cfg = base;
      apply_sweep_value(cfg, spec.axis, spec.values[task.point]);
      cfg.seed = derive_substream(spec.root_seed,
                                  static_cast<std::uint64_t>(task.point),
                                  static_cast<std::uint64_t>(task.replica))
                     .next_u64();
      RunOptions ropt = opt;
      ropt.reset_sample_sink = nullptr;  // per-replica sinks are not shared
      ropt.event_sink = nullptr;
      try {
        RunRecord rec = run_simulation(cfg, ropt);
        std::lock_guard<std::mutex> lock(mu);
        SweepPoint& pt = points[task.point];
        ++pt.replicas_ok;
        pt.avg_aoi_samples.push_back(rec.report.avg_aoi_ms);
        pt.prr_mean += rec.report.prr;
        pt.availability_mean += rec.report.available_resource_fraction;
        for (const auto& [thr, v] : rec.report.tdr_time)
          pt.tdr_time_mean[thr] += v;
        for (const auto& [thr, v] : rec.report.tdr_sample)
          pt.tdr_sample_mean[thr] += v;
        if (rec.prediction) {
          pt.predicted_aoi_ms = rec.prediction->average_aoi_ms;
        } else {
          pt.predicted_aoi_ms = std::nan("");
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(mu);
        SweepPoint& pt = points[task.point];
        ++pt.replicas_failed;
        pt.errors.push_back(e.what());
      }
    }
  };

  const int n_threads = std::min<int>(jobs, static_cast<int>(tasks.size()));
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  for (std::size_t p = 0; p < points.size(); ++p) {
    SweepPoint& pt = points[p];
    pt.value = spec.values[p];
    if (pt.replicas_ok > 0) {
      pt.avg_aoi_mean = mean_of(pt.avg_aoi_samples);
      pt.avg_aoi_std = stddev_of(pt.avg_aoi_samples, pt.avg_aoi_mean);
      pt.prr_mean /= pt.replicas_ok;
      pt.availability_mean /= pt.replicas_ok;
      for (auto& [thr, v] : pt.tdr_time_mean) v /= pt.replicas_ok;
      for (auto& [thr, v] : pt.tdr_sample_mean) v /= pt.replicas_ok;
    }
  }
  return points;
}

std::string sweep_to_json(const SweepSpec& spec,
                          const std::vector<SweepPoint>& points) {
  nlohmann::json j;
  j["axis"] = to_string(spec.axis);
  j["replicas"] = spec.replicas;
  j["root_seed"] = spec.root_seed;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& pt : points) {
    nlohmann::json p;
    p["value"] = pt.value;
    p["replicas_ok"] = pt.replicas_ok;
    p["replicas_failed"] = pt.replicas_failed;
    p["avg_aoi_mean_ms"] = pt.avg_aoi_mean;
    p["avg_aoi_std_ms"] = pt.avg_aoi_std;
    p["prr_mean"] = pt.prr_mean;
    p["availability_mean"] = pt.availability_mean;
    p["predicted_aoi_ms"] =
        std::isnan(pt.predicted_aoi_ms)
            ? nlohmann::json(nullptr)
            : nlohmann::json(pt.predicted_aoi_ms);
    p["tdr_time_mean"] = nlohmann::json::object();
    p["tdr_sample_mean"] = nlohmann::json::object();
    for (const auto& [thr, v] : pt.tdr_time_mean)
      p["tdr_time_mean"][fmt(thr)] = v;
    for (const auto& [thr, v] : pt.tdr_sample_mean)
      p["tdr_sample_mean"][fmt(thr)] = v;
    p["avg_aoi_samples_ms"] = pt.avg_aoi_samples;
    p["errors"] = pt.errors;
    arr.push_back(p);
  }
  j["points"] = arr;
  return j.dump(2);
}

std::string sweep_to_csv(const std::vector<SweepPoint>& points,
                         const std::vector<double>& tdr_thresholds) {
  std::ostringstream os;
  os << "value,replicas_ok,avg_aoi_mean_ms,avg_aoi_std_ms,prr_mean,"
        "availability_mean,predicted_aoi_ms";
  for (double thr : tdr_thresholds) os << ",tdr_time_" << thr;
  os << '\n' << std::setprecision(17);
  for (const auto& pt : points) {
    os << pt.value << ',' << pt.replicas_ok << ',' << pt.avg_aoi_mean << ','
       << pt.avg_aoi_std << ',' << pt.prr_mean << ',' << pt.availability_mean
       << ',';
    if (!std::isnan(pt.predicted_aoi_ms)) os << pt.predicted_aoi_ms;
    for (double thr : tdr_thresholds) {
      auto it = pt.tdr_time_mean.find(thr);
      os << ',';
      if (it != pt.tdr_time_mean.end()) os << it->second;
    }
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------

CheckResult check_closed_form(double expected_benign_aoi) {
  CheckResult res{"closed_form_identities", false, ""};
  std::ostringstream detail;
  bool ok = true;

  const double benign = average_aoi(1.0, 0.0, 100, 1.0).average_aoi_ms;
  if (std::abs(benign - expected_benign_aoi) > 1e-9) {
    ok = false;
    detail << "benign avg AoI " << benign << " != " << expected_benign_aoi
           << "; ";
  }
  const double attacked = average_aoi(1.0, 0.9, 100, 1.0).average_aoi_ms;
  if (std::abs(attacked - 210.5) > 1e-9) {
    ok = false;
    detail << "x=0.9 avg AoI " << attacked << " != 210.5; ";
  }
  const double lossy = average_aoi(1.0, 0.0, 100, 0.5).average_aoi_ms;
  if (std::abs(lossy - 401.5) > 1e-9) {
    ok = false;
    detail << "phi=0.5 avg AoI " << lossy << " != 401.5; ";
  }
  // average_aoi() itself asserts the two published forms agree; exercise it
  // over a grid to confirm no configuration trips the internal consistency
  // check.
  Rng rng(7, 0, 99);
  for (int i = 0; i < 100; ++i) {
    const double p_sch = 0.05 + 0.95 * rng.uniform01();
    const double x = 0.95 * rng.uniform01();
    const int gamma = 1 + static_cast<int>(rng.uniform_int(0, 299));
    const double phi = 0.05 + 0.95 * rng.uniform01();
    (void)average_aoi(p_sch, x, gamma, phi);
  }
  res.passed = ok;
  res.detail = ok ? "pinned values and both closed forms agree"
                  : detail.str();
  return res;
}

CheckResult check_dtmc_against_closed_form(double tolerance) {
  CheckResult res{"dtmc_vs_closed_form", false, ""};
  std::ostringstream detail;
  bool ok = true;
  for (int gamma : {2, 10, 100}) {
    for (double p : {1.0, 0.5, 0.1}) {
      SpsParams sps;
      sps.gamma = gamma;
      auto m = build_sps_dtmc(sps, p);
      const double mfpt = mean_first_passage_idle_to_tx(m);
      const double expect = 1.0 / p + (gamma - 1) / 2.0 + gamma;
      if (std::abs(mfpt - expect) > tolerance * std::max(1.0, expect)) {
        ok = false;
        detail << "gamma=" << gamma << " p=" << p << ": mfpt " << mfpt
               << " != " << expect << "; ";
      }
      auto pi = stationary_distribution(m);
      double sum = 0.0;
      for (double v : pi) sum += v;
      if (std::abs(sum - 1.0) > 1e-9) {
        ok = false;
        detail << "gamma=" << gamma << " p=" << p
               << ": stationary mass " << sum << "; ";
      }
    }
  }
  res.passed = ok;
  res.detail = ok ? "first-passage times match on the full grid"
                  : detail.str();
  return res;
}

CheckResult check_geometric_moments(std::uint64_t seed, std::int64_t draws,
                                    double tolerance) {
  CheckResult res{"inter_success_moments_mc", false, ""};
  std::ostringstream detail;
  bool ok = true;
  struct Case {
    int gamma;
    double phi;
  };
  for (const Case c : {Case{100, 0.5}, Case{50, 0.25}, Case{10, 0.9}}) {
    Rng rng(seed, static_cast<std::uint64_t>(c.gamma), 2);
    double sum = 0.0, sum2 = 0.0;
    for (std::int64_t i = 0; i < draws; ++i) {
      // Independent per-attempt Bernoulli(phi): T = gamma * (#attempts).
      std::int64_t attempts = 1;
      while (!rng.bernoulli(c.phi)) ++attempts;
      const double t = static_cast<double>(c.gamma) * attempts;
      sum += t;
      sum2 += t * t;
    }
    const auto [m1, m2] = inter_success_moments(c.gamma, c.phi);
    const double mc1 = sum / draws;
    const double mc2 = sum2 / draws;
    if (std::abs(mc1 - m1) > tolerance * m1 ||
        std::abs(mc2 - m2) > tolerance * m2) {
      ok = false;
      detail << "gamma=" << c.gamma << " phi=" << c.phi << ": MC (" << mc1
             << ", " << mc2 << ") vs closed (" << m1 << ", " << m2 << "); ";
    }
  }
  res.passed = ok;
  res.detail = ok ? "Monte-Carlo moments within tolerance" : detail.str();
  return res;
}

CheckResult check_sim_against_analytic(std::uint64_t seed,
                                       std::int64_t sim_ms,
                                       double benign_tolerance,
                                       double attacked_tolerance) {
  CheckResult res{"sim_vs_analytic_aoi", false, ""};
  std::ostringstream detail;
  bool ok = true;
  for (double x : {0.0, 0.5, 0.9}) {
    Config cfg;
    cfg.attack.mode = x > 0 ? AttackMode::Probabilistic : AttackMode::Off;
    cfg.attack.x = x;
    cfg.seed = seed + static_cast<std::uint64_t>(x * 1000);
    cfg.sim_duration_ms = sim_ms;
    RunRecord rec = run_simulation(cfg);
    const double predicted = rec.prediction->average_aoi_ms;
    const double rel =
        std::abs(rec.report.avg_aoi_ms - predicted) / predicted;
    const double tol = x > 0 ? attacked_tolerance : benign_tolerance;
    std::ostringstream line;
    line << "x=" << x << ": sim " << std::fixed << std::setprecision(2)
         << rec.report.avg_aoi_ms << " vs model " << predicted << " ("
         << std::setprecision(2) << rel * 100 << "%)";
    if (rel > tol) {
      ok = false;
      detail << line.str() << " exceeds " << tol * 100 << "%; ";
    } else {
      detail << line.str() << "; ";
    }
  }
  res.passed = ok;
  res.detail = detail.str();
  return res;
}

std::vector<CheckResult> run_validation_checks(std::uint64_t seed,
                                               std::int64_t sim_ms) {
  std::vector<CheckResult> out;
  out.push_back(check_closed_form());
  out.push_back(check_dtmc_against_closed_form());
  out.push_back(check_geometric_moments(seed, 1000000));
  out.push_back(check_sim_against_analytic(seed, sim_ms));
  return out;
}

}  // namespace aoistarve
