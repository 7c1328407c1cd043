#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace aoistarve {

class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// MAC/timing parameters of the NR-V2X Mode 2 sidelink pool.
struct SpsParams {
  double delta_ms = 1.0;            // subframe duration
  int gamma = 100;                  // subframes per RRI
  int m_subchannels = 5;            // subchannels per subframe
  int k_contiguous = 1;             // contiguous subchannels per BSM
  double p_keep = 0.4;              // keep probability at RC expiry
  int rc_min = 5;                   // reselection counter bounds
  int rc_max = 15;
  double p_sch = 1.0;               // baseline per-ms scheduling success
  double phi = 1.0;                 // per-attempt reception success
  double sensing_threshold_dbm = -126.0;
  double raw_m = 150.0;             // awareness range, one of {50,150,300}

  int selectable_starts() const { return m_subchannels - k_contiguous + 1; }
  int total_selectable_csrs() const { return gamma * selectable_starts(); }
};

struct ScenarioParams {
  int n_vehicles = 100;
  double density_per_km = 100.0;
  int lanes = 3;
  double speed_kmh = 70.0;
  double road_length_m = 0.0;  // derived: n_vehicles / density
};

enum class AttackMode { Off, Probabilistic, ActiveEve };

struct AttackParams {
  double x = 0.0;            // starvation fraction
  AttackMode mode = AttackMode::Off;
  int eve_rri_ms = 1;        // adversary transmission periodicity

  double effective_x() const { return mode == AttackMode::Off ? 0.0 : x; }
};

// A candidate subframe resource: one subframe slot and K contiguous
// subchannels starting at subchannel_start.
struct Csr {
  int subframe_offset = 0;   // in [0, gamma)
  int subchannel_start = 0;  // in [0, M - K]
  int width = 1;             // == k_contiguous

  friend bool operator==(const Csr&, const Csr&) = default;
};

std::string to_string(AttackMode mode);
AttackMode attack_mode_from_string(const std::string& s);

}  // namespace aoistarve
