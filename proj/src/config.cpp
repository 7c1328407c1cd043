#include "aoistarve/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace aoistarve {

std::string to_string(AttackMode mode) {
  switch (mode) {
    case AttackMode::Off: return "off";
    case AttackMode::Probabilistic: return "probabilistic";
    case AttackMode::ActiveEve: return "active_eve";
  }
  return "off";
}

AttackMode attack_mode_from_string(const std::string& s) {
  if (s == "off") return AttackMode::Off;
  if (s == "probabilistic") return AttackMode::Probabilistic;
  if (s == "active_eve" || s == "active-eve") return AttackMode::ActiveEve;
  throw ValidationError("attack_mode: unknown value '" + s +
                        "' (expected off|probabilistic|active_eve)");
}

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

std::string fmt_double(double v) {
  // Shortest round-trip representation, stable across platforms.
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back = std::strtod(buf, nullptr);
  for (int prec = 1; prec < 17; ++prec) {
    char t[64];
    std::snprintf(t, sizeof(t), "%.*g", prec, v);
    if (std::strtod(t, nullptr) == back) return t;
  }
  return buf;
}

}  // namespace

Config validate_params(const SpsParams& sps, const ScenarioParams& scen,
                       const AttackParams& atk, std::uint64_t seed,
                       std::int64_t sim_duration_ms) {
  require(sps.delta_ms > 0.0, "delta_ms must be > 0");
  require(sps.gamma >= 1, "gamma must be >= 1");
  require(sps.m_subchannels >= 1, "m_subchannels must be >= 1");
  require(sps.k_contiguous >= 1 && sps.k_contiguous <= sps.m_subchannels,
          "k_contiguous must satisfy 1 <= k_contiguous <= m_subchannels");
  require(sps.p_keep >= 0.0 && sps.p_keep <= 1.0, "p_keep must be in [0,1]");
  require(sps.rc_min >= 1 && sps.rc_min <= sps.rc_max,
          "rc_min/rc_max must satisfy 1 <= rc_min <= rc_max");
  require(sps.p_sch > 0.0 && sps.p_sch <= 1.0, "p_sch must be in (0,1]");
  require(sps.phi > 0.0 && sps.phi <= 1.0, "phi must be in (0,1]");
  require(sps.raw_m == 50.0 || sps.raw_m == 150.0 || sps.raw_m == 300.0,
          "raw_m must be one of {50,150,300}");

  require(scen.n_vehicles >= 1, "n_vehicles must be >= 1");
  require(scen.density_per_km > 0.0, "density_per_km must be > 0");
  require(scen.lanes >= 1, "lanes must be >= 1");
  require(scen.speed_kmh >= 0.0, "speed_kmh must be >= 0");

  require(atk.x >= 0.0 && atk.x <= 1.0, "attack_x must be in [0,1]");
  require(atk.eve_rri_ms >= 1, "eve_rri_ms must be >= 1");
  if (atk.mode != AttackMode::Off) {
    require(atk.x < 1.0,
            "attack_x: degenerate starvation, no CSR ever found (x = 1)");
  }
  require(sim_duration_ms >= 0, "sim_duration_ms must be >= 0");

  Config c;
  c.sps = sps;
  c.scenario = scen;
  c.attack = atk;
  c.seed = seed;
  c.sim_duration_ms = sim_duration_ms;
  c.scenario.road_length_m = 1000.0 * scen.n_vehicles / scen.density_per_km;
  return c;
}

namespace {

const std::vector<std::string> kConfigKeys = {
    "delta_ms", "gamma", "m_subchannels", "k_contiguous", "p_keep",
    "rc_min", "rc_max", "p_sch", "phi", "sensing_threshold_dbm", "raw_m",
    "n_vehicles", "density_per_km", "lanes", "speed_kmh",
    "attack_mode", "attack_x", "eve_rri_ms", "seed", "sim_duration_ms"};

}  // namespace

Config parse_config(const std::string& text) {
  SpsParams sps;
  ScenarioParams scen;
  AttackParams atk;
  std::uint64_t seed = 1;
  std::int64_t duration = 1000000;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(lineno) +
                            ": expected key=value");
    auto trim = [](std::string s) {
      auto b2 = s.find_first_not_of(" \t");
      auto e2 = s.find_last_not_of(" \t");
      if (b2 == std::string::npos) return std::string();
      return s.substr(b2, e2 - b2 + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));

    auto as_double = [&](const char* field) {
      try {
        size_t pos = 0;
        double v = std::stod(val, &pos);
        if (pos != val.size()) throw std::invalid_argument(val);
        return v;
      } catch (const std::exception&) {
        throw ValidationError(std::string(field) + ": cannot parse '" + val + "'");
      }
    };
    auto as_int = [&](const char* field) {
      try {
        size_t pos = 0;
        long long v = std::stoll(val, &pos);
        if (pos != val.size()) throw std::invalid_argument(val);
        return v;
      } catch (const std::exception&) {
        throw ValidationError(std::string(field) + ": cannot parse '" + val + "'");
      }
    };

    if (key == "delta_ms") sps.delta_ms = as_double("delta_ms");
    else if (key == "gamma") sps.gamma = static_cast<int>(as_int("gamma"));
    else if (key == "m_subchannels") sps.m_subchannels = static_cast<int>(as_int("m_subchannels"));
    else if (key == "k_contiguous") sps.k_contiguous = static_cast<int>(as_int("k_contiguous"));
    else if (key == "p_keep") sps.p_keep = as_double("p_keep");
    else if (key == "rc_min") sps.rc_min = static_cast<int>(as_int("rc_min"));
    else if (key == "rc_max") sps.rc_max = static_cast<int>(as_int("rc_max"));
    else if (key == "p_sch") sps.p_sch = as_double("p_sch");
    else if (key == "phi") sps.phi = as_double("phi");
    else if (key == "sensing_threshold_dbm") sps.sensing_threshold_dbm = as_double("sensing_threshold_dbm");
    else if (key == "raw_m") sps.raw_m = as_double("raw_m");
    else if (key == "n_vehicles") scen.n_vehicles = static_cast<int>(as_int("n_vehicles"));
    else if (key == "density_per_km") scen.density_per_km = as_double("density_per_km");
    else if (key == "lanes") scen.lanes = static_cast<int>(as_int("lanes"));
    else if (key == "speed_kmh") scen.speed_kmh = as_double("speed_kmh");
    else if (key == "attack_mode") atk.mode = attack_mode_from_string(val);
    else if (key == "attack_x") atk.x = as_double("attack_x");
    else if (key == "eve_rri_ms") atk.eve_rri_ms = static_cast<int>(as_int("eve_rri_ms"));
    else if (key == "seed") seed = static_cast<std::uint64_t>(as_int("seed"));
    else if (key == "sim_duration_ms") duration = as_int("sim_duration_ms");
    else throw ValidationError("unknown config key '" + key + "'");
  }
  return validate_params(sps, scen, atk, seed, duration);
}

Config load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const Config& c) {
  std::ostringstream out;
  out << "delta_ms=" << fmt_double(c.sps.delta_ms) << "\n";
  out << "gamma=" << c.sps.gamma << "\n";
  out << "m_subchannels=" << c.sps.m_subchannels << "\n";
  out << "k_contiguous=" << c.sps.k_contiguous << "\n";
  out << "p_keep=" << fmt_double(c.sps.p_keep) << "\n";
  out << "rc_min=" << c.sps.rc_min << "\n";
  out << "rc_max=" << c.sps.rc_max << "\n";
  out << "p_sch=" << fmt_double(c.sps.p_sch) << "\n";
  out << "phi=" << fmt_double(c.sps.phi) << "\n";
  out << "sensing_threshold_dbm=" << fmt_double(c.sps.sensing_threshold_dbm) << "\n";
  out << "raw_m=" << fmt_double(c.sps.raw_m) << "\n";
  out << "n_vehicles=" << c.scenario.n_vehicles << "\n";
  out << "density_per_km=" << fmt_double(c.scenario.density_per_km) << "\n";
  out << "lanes=" << c.scenario.lanes << "\n";
  out << "speed_kmh=" << fmt_double(c.scenario.speed_kmh) << "\n";
  out << "attack_mode=" << to_string(c.attack.mode) << "\n";
  out << "attack_x=" << fmt_double(c.attack.x) << "\n";
  out << "eve_rri_ms=" << c.attack.eve_rri_ms << "\n";
  out << "seed=" << c.seed << "\n";
  out << "sim_duration_ms=" << c.sim_duration_ms << "\n";
  return out.str();
}

std::uint64_t config_hash(const Config& c) {
  // FNV-1a over the canonical serialization.
  const std::string s = serialize_config(c);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool operator==(const Config& a, const Config& b) {
  return serialize_config(a) == serialize_config(b);
}

}  // namespace aoistarve
