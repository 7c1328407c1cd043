#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "aoistarve/params.hpp"

namespace aoistarve {

// Fully validated run configuration. Immutable after validate_params();
// safe to share read-only across concurrent workers.
struct Config {
  SpsParams sps;
  ScenarioParams scenario;
  AttackParams attack;
  std::uint64_t seed = 1;
  std::int64_t sim_duration_ms = 1000000;

  double effective_sch_prob_or_zero() const {
    return (1.0 - attack.effective_x()) * sps.p_sch;
  }
};

// Checks every invariant and fills derived fields (road_length_m).
// Throws ValidationError naming the offending field.
Config validate_params(const SpsParams& sps, const ScenarioParams& scen,
                       const AttackParams& atk, std::uint64_t seed = 1,
                       std::int64_t sim_duration_ms = 1000000);

// Flat key=value config text. Unknown key -> ValidationError.
Config parse_config(const std::string& text);
Config load_config_file(const std::string& path);

// Canonical serialization; parse(serialize(c)) == c.
std::string serialize_config(const Config& c);

// Stable 64-bit hash of the canonical serialization.
std::uint64_t config_hash(const Config& c);

bool operator==(const Config& a, const Config& b);

}  // namespace aoistarve
