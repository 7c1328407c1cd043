// aoi_starve: experiment front end for the SPS resource-starvation study.
//
// Subcommands: analytic | simulate | sweep | safety | validate.
// Exit codes: 0 ok, 2 config error, 3 I/O error, 4 validation failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nlohmann/json.hpp"

#include "aoistarve/analytic.hpp"
#include "aoistarve/config.hpp"
#include "aoistarve/experiments.hpp"
#include "aoistarve/safety.hpp"

namespace fs = std::filesystem;
using namespace aoistarve;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitValidation = 4;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> duration_ms;
  std::optional<std::string> attack_mode;
  std::optional<double> x;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path,
                  "Path to a key=value config file");
  cmd->add_option("--out", args.out_dir,
                  "Output directory (env AOI_STARVE_OUT overrides)");
  cmd->add_option("--seed", args.seed, "Override the config seed");
  cmd->add_option("--duration-ms", args.duration_ms,
                  "Override the simulated horizon in ms");
  cmd->add_option("--attack-mode", args.attack_mode,
                  "Override attack_mode: off | probabilistic | active-eve");
  cmd->add_option("--x", args.x, "Override the starvation fraction");
}

Config load_config(const CommonArgs& args) {
  Config cfg;
  if (!args.config_path.empty()) {
    cfg = load_config_file(args.config_path);
  }
  if (args.seed) cfg.seed = *args.seed;
  if (args.duration_ms) cfg.sim_duration_ms = *args.duration_ms;
  if (args.attack_mode) cfg.attack.mode = attack_mode_from_string(*args.attack_mode);
  if (args.x) cfg.attack.x = *args.x;
  return validate_params(cfg.sps, cfg.scenario, cfg.attack, cfg.seed,
                         cfg.sim_duration_ms);
}

fs::path resolve_out_dir(const CommonArgs& args, const std::string& fallback) {
  if (const char* env = std::getenv("AOI_STARVE_OUT"); env && *env) {
    return fs::path(env);
  }
  if (!args.out_dir.empty()) return fs::path(args.out_dir);
  return fs::path(fallback);
}

fs::path prepare_out_dir(const CommonArgs& args, const std::string& fallback) {
  const fs::path dir = resolve_out_dir(args, fallback);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string());
  return dir;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<double> parse_value_list(const std::string& csv) {
  std::vector<double> out;
  std::istringstream in(csv);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (tok.empty()) continue;
    std::size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw ValidationError("bad numeric value: " + tok);
    out.push_back(v);
  }
  if (out.empty()) throw ValidationError("empty value list");
  return out;
}

// ---------------------------------------------------------------------------

int cmd_analytic(const CommonArgs& args, const std::string& x_grid_csv) {
  Config cfg = load_config(args);
  std::vector<double> xs;
  if (args.x) {
    xs = {*args.x};
  } else if (!x_grid_csv.empty()) {
    xs = parse_value_list(x_grid_csv);
  } else {
    xs = {0.0, 0.5, 0.8, 0.9};
  }

  std::ostringstream csv;
  csv << "x,avg_aoi_ms,c0_ms,expected_reset_ms,mean_inter_success_ms,"
         "second_moment_inter_success\n";
  csv << std::setprecision(17);
  std::cout << "  x        avg AoI [ms]      C0 [ms]    E[D] [ms]     E[T]"
            << "         E[T^2]\n";
  for (double x : xs) {
    const AoiPrediction p =
        average_aoi(cfg.sps.p_sch, x, cfg.sps.gamma, cfg.sps.phi);
    csv << x << ',' << p.average_aoi_ms << ',' << p.c0_ms << ','
        << p.expected_reset_ms << ',' << p.mean_inter_success_ms << ','
        << p.second_moment_inter_success << '\n';
    std::cout << std::fixed << std::setprecision(2) << std::setw(5) << x
              << std::setw(15) << p.average_aoi_ms << std::setw(13) << p.c0_ms
              << std::setw(13) << p.expected_reset_ms << std::setw(11)
              << p.mean_inter_success_ms << std::setw(15)
              << p.second_moment_inter_success << "\n";
  }
  if (!args.out_dir.empty() || std::getenv("AOI_STARVE_OUT")) {
    const fs::path dir = prepare_out_dir(args, "aoi_starve_out");
    write_file(dir / "analytic.csv", csv.str());
    write_file(dir / "config.echo", serialize_config(cfg));
  }
  return kExitOk;
}

int cmd_simulate(const CommonArgs& args, bool dump_events) {
  Config cfg = load_config(args);
  const fs::path dir = prepare_out_dir(args, "aoi_starve_out");

  std::ostringstream resets;
  std::ostringstream events;
  RunOptions opt;
  opt.reset_sample_sink = &resets;
  if (dump_events) opt.event_sink = &events;

  const RunRecord rec = run_simulation(cfg, opt);

  write_file(dir / "config.echo", serialize_config(rec.config));
  write_file(dir / "summary.json", rec.to_json() + "\n");
  write_file(dir / "reset_samples.csv", resets.str());
  if (dump_events) write_file(dir / "events.csv", events.str());

  std::cout << rec.report.to_text();
  if (rec.prediction) {
    std::cout << "model avg AoI        : " << std::fixed
              << std::setprecision(4) << rec.prediction->average_aoi_ms
              << " ms\n";
  }
  std::cout << "outputs written to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_sweep(const CommonArgs& args, const std::string& axis,
              const std::string& values_csv, int replicas, int jobs) {
  Config cfg = load_config(args);
  SweepSpec spec;
  spec.axis = sweep_axis_from_string(axis);
  spec.values = parse_value_list(values_csv);
  spec.replicas = replicas;
  spec.root_seed = cfg.seed;
  for (double v : spec.values) {
    Config probe = cfg;
    apply_sweep_value(probe, spec.axis, v);
    validate_params(probe.sps, probe.scenario, probe.attack, probe.seed,
                    probe.sim_duration_ms);  // fail fast on bad grid values
  }

  const auto points = run_sweep(cfg, spec, jobs);

  const fs::path dir = prepare_out_dir(args, "aoi_starve_out");
  write_file(dir / "config.echo", serialize_config(cfg));
  write_file(dir / "summary.json", sweep_to_json(spec, points) + "\n");
  RunOptions defaults;
  write_file(dir / "sweep.csv",
             sweep_to_csv(points, defaults.tdr_thresholds_ms));

  bool any_failed = false;
  std::cout << std::fixed << std::setprecision(3);
  std::cout << to_string(spec.axis)
            << "      avg AoI [ms] (mean +- std)    PRR     avail\n";
  for (const auto& pt : points) {
    std::cout << std::setw(8) << pt.value << "   " << std::setw(10)
              << pt.avg_aoi_mean << " +- " << std::setw(8) << pt.avg_aoi_std
              << "   " << std::setw(6) << pt.prr_mean << "   " << std::setw(6)
              << pt.availability_mean << "\n";
    if (pt.replicas_failed > 0) {
      any_failed = true;
      for (const auto& e : pt.errors) {
        std::cerr << "replica failure at " << to_string(spec.axis) << "="
                  << pt.value << ": " << e << "\n";
      }
    }
  }
  std::cout << "outputs written to " << dir.string() << "\n";
  if (any_failed) {
    std::cerr << "sweep aborted with partial results preserved in "
              << dir.string() << "\n";
    return kExitIo;
  }
  return kExitOk;
}

MetricsReport report_from_json(const nlohmann::json& j) {
  MetricsReport rep;
  rep.has_data = j.at("has_data").get<bool>();
  rep.avg_aoi_ms = j.at("avg_aoi_ms").get<double>();
  rep.prr = j.at("prr").get<double>();
  rep.available_resource_fraction =
      j.at("available_resource_fraction").get<double>();
  for (const auto& [key, v] : j.at("tdr_sample").items()) {
    rep.tdr_sample[std::stod(key)] = v.get<double>();
  }
  for (const auto& [key, v] : j.at("tdr_time").items()) {
    rep.tdr_time[std::stod(key)] = v.get<double>();
  }
  return rep;
}

int cmd_safety(const CommonArgs& args, const std::string& runs_dir,
               const std::string& x_grid_csv, const std::string& basis_name,
               const std::string& catalog_path) {
  Config cfg = load_config(args);
  const std::vector<double> xs = x_grid_csv.empty()
                                     ? std::vector<double>{0.0, 0.5, 0.8, 0.9}
                                     : parse_value_list(x_grid_csv);
  const TdrBasis basis =
      basis_name == "time" ? TdrBasis::Time : TdrBasis::Sample;
  const std::vector<ServiceSpec> services =
      catalog_path.empty() ? builtin_services()
                           : load_services_csv(catalog_path);
  std::vector<double> horizons;
  for (int i = 1; i <= 30; ++i) horizons.push_back(0.1 * i);

  // Gather the per-x reports: from prior simulate outputs when --runs is
  // given, otherwise by running the simulations here.
  std::vector<std::pair<double, MetricsReport>> reports;
  if (!runs_dir.empty()) {
    std::vector<std::pair<double, MetricsReport>> found;
    std::error_code ec;
    for (const auto& entry :
         fs::recursive_directory_iterator(runs_dir, ec)) {
      if (entry.path().filename() != "summary.json") continue;
      std::ifstream in(entry.path());
      nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
      if (j.is_discarded() || !j.contains("report")) continue;
      const fs::path echo = entry.path().parent_path() / "config.echo";
      std::ifstream echo_in(echo);
      if (!echo_in) continue;
      std::stringstream buf;
      buf << echo_in.rdbuf();
      const Config run_cfg = parse_config(buf.str());
      found.emplace_back(run_cfg.attack.effective_x(),
                         report_from_json(j["report"]));
    }
    if (ec) throw IoError("cannot scan runs directory " + runs_dir);
    std::vector<double> missing;
    for (double x : xs) {
      bool matched = false;
      for (const auto& [rx, rep] : found) {
        if (std::abs(rx - x) < 1e-9) {
          reports.emplace_back(x, rep);
          matched = true;
          break;
        }
      }
      if (!matched) missing.push_back(x);
    }
    if (!missing.empty()) {
      std::ostringstream os;
      os << "no completed run found for x =";
      for (double x : missing) os << ' ' << x;
      throw ValidationError(os.str());
    }
  } else {
    for (double x : xs) {
      Config run_cfg = cfg;
      run_cfg.attack.x = x;
      if (x > 0 && run_cfg.attack.mode == AttackMode::Off) {
        run_cfg.attack.mode = AttackMode::Probabilistic;
      }
      reports.emplace_back(x, run_simulation(run_cfg).report);
    }
  }

  const double rri_ms = static_cast<double>(cfg.sps.gamma) * cfg.sps.delta_ms;
  nlohmann::json all = nlohmann::json::array();
  std::ostringstream csv;
  csv << "service,x,measured_tdr,gap,h_s,violation_prob\n"
      << std::setprecision(17);
  std::cout << "service   x      TDR(" << to_string(basis)
            << ")   gap        verdict\n";
  for (const auto& [x, rep] : reports) {
    const auto verdicts =
        evaluate_all(services, rep, basis, rri_ms, horizons);
    for (const auto& v : verdicts) {
      std::cout << std::left << std::setw(10) << v.service.name << std::right
                << std::fixed << std::setprecision(2) << x << "   "
                << std::setprecision(4) << v.measured_tdr << "    "
                << std::showpos << v.slr_gap << std::noshowpos << "    "
                << (v.unsafe ? "UNSAFE" : "ok") << "\n";
      nlohmann::json j = nlohmann::json::parse(verdicts_to_json({v}))[0];
      j["x"] = x;
      all.push_back(j);
      for (std::size_t i = 0; i < v.horizons_s.size(); ++i) {
        csv << v.service.name << ',' << x << ',' << v.measured_tdr << ','
            << v.slr_gap << ',' << v.horizons_s[i] << ','
            << v.violation_probability[i] << '\n';
      }
    }
  }
  const fs::path dir = prepare_out_dir(args, "aoi_starve_out");
  write_file(dir / "verdicts.json", all.dump(2) + "\n");
  write_file(dir / "safety.csv", csv.str());
  std::cout << "outputs written to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_validate(const CommonArgs& args, std::int64_t sim_ms) {
  Config cfg = load_config(args);
  const auto checks = run_validation_checks(cfg.seed, sim_ms);
  bool all_ok = true;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks) {
    all_ok = all_ok && c.passed;
    std::cout << (c.passed ? "PASS" : "FAIL") << "  " << c.name << ": "
              << c.detail << "\n";
    arr.push_back({{"name", c.name},
                   {"passed", c.passed},
                   {"detail", c.detail}});
  }
  if (!args.out_dir.empty() || std::getenv("AOI_STARVE_OUT")) {
    const fs::path dir = prepare_out_dir(args, "aoi_starve_out");
    write_file(dir / "validate.json", arr.dump(2) + "\n");
  }
  return all_ok ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Age-of-information impact of SPS resource starvation in NR-V2X "
      "sidelink mode 2"};
  app.require_subcommand(1);

  CommonArgs args;

  auto* analytic = app.add_subcommand(
      "analytic", "Evaluate the closed-form AoI model over an attack grid");
  add_common(analytic, args);
  std::string x_grid;
  analytic->add_option("--x-grid", x_grid,
                       "Comma-separated starvation fractions");

  auto* simulate =
      app.add_subcommand("simulate", "Run one simulation and export metrics");
  add_common(simulate, args);
  bool dump_events = false;
  simulate->add_flag("--dump-events", dump_events,
                     "Also export the full event stream CSV");

  auto* sweep = app.add_subcommand(
      "sweep", "Run replicated simulations over one parameter axis");
  add_common(sweep, args);
  std::string axis = "x";
  std::string values_csv = "0,0.5,0.8,0.9";
  int replicas = 10;
  int jobs = 1;
  sweep->add_option("--axis", axis, "x | n_vehicles | p_keep | phi");
  sweep->add_option("--values", values_csv, "Comma-separated axis values");
  sweep->add_option("--replicas", replicas, "Replicas per point");
  sweep->add_option("--jobs", jobs, "Max parallel replicas");

  auto* safety = app.add_subcommand(
      "safety", "Judge V2X safety services against measured timeliness");
  add_common(safety, args);
  std::string runs_dir;
  std::string safety_x_grid;
  std::string basis_name = "sample";
  std::string catalog_path;
  safety->add_option("--runs", runs_dir,
                     "Directory of prior simulate outputs to reuse");
  safety->add_option("--x-grid", safety_x_grid,
                     "Comma-separated starvation fractions");
  safety->add_option("--tdr-basis", basis_name, "sample | time")
      ->check(CLI::IsMember({"sample", "time"}));
  safety->add_option("--services", catalog_path,
                     "Service catalog CSV (name,threshold_ms,target_slr)");

  auto* validate = app.add_subcommand(
      "validate", "Cross-check model, Markov chain, and simulator");
  add_common(validate, args);
  std::int64_t validate_sim_ms = 300000;
  validate->add_option("--sim-ms", validate_sim_ms,
                       "Horizon per validation simulation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (analytic->parsed()) return cmd_analytic(args, x_grid);
    if (simulate->parsed()) return cmd_simulate(args, dump_events);
    if (sweep->parsed())
      return cmd_sweep(args, axis, values_csv, replicas, jobs);
    if (safety->parsed())
      return cmd_safety(args, runs_dir, safety_x_grid, basis_name,
                        catalog_path);
    if (validate->parsed()) return cmd_validate(args, validate_sim_ms);
  } catch (const ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitConfig;
}
