#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "aoistarve/config.hpp"
#include "aoistarve/events.hpp"
#include "aoistarve/rng.hpp"

namespace aoistarve {

// Per-vehicle SPS state machine: exactly one variant at a time.
struct UeState {
  enum class Phase { Idle, Wait, Active };
  Phase phase = Phase::Idle;
  std::int64_t ms_in_idle = 0;  // Idle
  int wait_remaining = 0;       // Wait
  int rc = 0;                   // Active
  int tau = 0;                  // Active, countdown in [0, gamma)
  Csr csr;                      // Active
};

// Occupancy of the gamma x (M-K+1) grid of selectable CSRs.
class ReservationMap {
public:
  ReservationMap() = default;
  ReservationMap(int gamma, int selectable_starts);

  int total() const { return gamma_ * starts_; }
  int csr_id(const Csr& c) const { return c.subframe_offset * starts_ + c.subchannel_start; }
  Csr csr_from_id(int id, int width) const {
    return Csr{id / starts_, id % starts_, width};
  }

  bool is_free(int id, std::int64_t t) const {
    return benign_holder_[id] < 0 && eve_until_[id] <= t;
  }
  int benign_holder(int id) const { return benign_holder_[id]; }
  bool eve_reserved(int id, std::int64_t t) const { return eve_until_[id] > t; }

  void reserve_benign(int id, int ue);
  void release_benign(int id);
  // Creates (or extends) an Eve reservation valid until `until` (exclusive).
  void reserve_eve(int id, std::int64_t now, std::int64_t until);
  void expire_eve(std::int64_t t);

  int free_count(std::int64_t t) const;
  double free_fraction(std::int64_t t) const {
    return static_cast<double>(free_count(t)) / total();
  }
  int eve_reserved_count(std::int64_t t) const;

private:
  int gamma_ = 0;
  int starts_ = 0;
  std::vector<int> benign_holder_;          // -1 when unheld
  std::vector<std::int64_t> eve_until_;     // expiry, 0 when never reserved
  mutable std::vector<std::pair<std::int64_t, int>> eve_queue_;  // FIFO by expiry
  int benign_count_ = 0;
  int eve_count_ = 0;
};

// One per-ms allocation attempt. Probabilistic/off mode: Bernoulli(P'_sch)
// then a uniformly random free CSR. Active-Eve mode: a uniform probe over
// the whole grid gated by Bernoulli(p_sch); the probe fails when the CSR is
// sensed as reserved (by Eve or by another UE). Returns nullopt on
// not_found. Does not mutate the map.
std::optional<Csr> sense_and_select(const SpsParams& sps, AttackMode mode,
                                    double x, const ReservationMap& rmap,
                                    std::int64_t t, Rng& rng);

// Reception resolution for the TxEvents of a single subframe, all receivers.
std::vector<RxEvent> resolve_receptions(const std::vector<TxEvent>& txs,
                                        const std::vector<double>& positions,
                                        const SpsParams& sps,
                                        std::vector<Rng>& rx_phi_rngs,
                                        bool half_duplex = true,
                                        bool emit_out_of_range = false);

struct WorldOptions {
  bool half_duplex = true;
  std::int64_t warmup_ms = -1;  // default 10 * gamma
};

// Deterministic per-subframe simulator of N benign SPS state machines plus
// an optional adversary agent.
class World {
public:
  explicit World(const Config& cfg, WorldOptions opt = {});

  // Steps subframes [current_time, current_time + duration_ms).
  void run(std::int64_t duration_ms, EventSink* sink);
  void step(EventSink* sink);

  std::int64_t now() const { return t_; }
  std::int64_t warmup_ms() const { return warmup_ms_; }
  const Config& config() const { return cfg_; }
  const std::vector<double>& positions() const { return positions_; }
  const std::vector<std::vector<int>>& neighbors() const { return neighbors_; }
  const ReservationMap& reservation_map() const { return rmap_; }
  const UeState& ue_state(int ue) const { return ues_[ue].state; }

  // Test hook: place a UE directly into Active on a given CSR.
  void force_active(int ue, const Csr& csr, int rc, int tau,
                    std::int64_t epoch_start);

  struct Stats {
    std::int64_t idle_attempts = 0;
    std::int64_t idle_successes = 0;
    std::int64_t keep_decisions = 0;
    std::int64_t keeps = 0;
    std::int64_t tx_count = 0;
    std::vector<std::int64_t> rc_histogram;  // indexed by drawn RC
  };
  const Stats& stats() const { return stats_; }

  // Largest starvation fraction Eve can sustain at the configured
  // periodicity (one subframe-column of reservations per transmission).
  static double eve_max_fraction(const SpsParams& sps, int eve_rri_ms);

private:
  struct Ue {
    UeState state;
    std::int64_t epoch_start = 0;   // last reselection decision (Idle entry)
    std::int64_t tx_in_epoch = 0;   // packets sent since epoch_start
    Rng sched_rng;
    Rng phi_rng;
  };

  void eve_step();
  void transmit(int ue_idx, std::vector<TxEvent>& txs);
  void resolve_subframe(const std::vector<TxEvent>& txs, EventSink* sink);

  Config cfg_;
  WorldOptions opt_;
  std::int64_t t_ = 0;
  std::int64_t warmup_ms_ = 0;
  std::vector<Ue> ues_;
  std::vector<double> positions_;
  std::vector<std::vector<int>> neighbors_;  // in-RAW, excluding self
  ReservationMap rmap_;
  Stats stats_;

  // Eve agent
  Rng eve_rng_;
  int eve_cursor_ = 0;
  double eve_budget_ = 0.0;
};

}  // namespace aoistarve
