#include "aoistarve/world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aoistarve {

const char* to_string(RxOutcome o) {
  switch (o) {
    case RxOutcome::Ok: return "ok";
    case RxOutcome::Collision: return "collision";
    case RxOutcome::PhyLoss: return "phy_loss";
    case RxOutcome::OutOfRange: return "out_of_range";
  }
  return "?";
}

ReservationMap::ReservationMap(int gamma, int selectable_starts)
    : gamma_(gamma),
      starts_(selectable_starts),
      benign_holder_(static_cast<size_t>(gamma) * selectable_starts, -1),
      eve_until_(static_cast<size_t>(gamma) * selectable_starts, 0) {}

void ReservationMap::reserve_benign(int id, int ue) {
  if (benign_holder_[id] >= 0)
    throw std::logic_error("CSR already reserved by another announced holder");
  benign_holder_[id] = ue;
  ++benign_count_;
}

void ReservationMap::release_benign(int id) {
  if (benign_holder_[id] < 0) throw std::logic_error("CSR not held");
  benign_holder_[id] = -1;
  --benign_count_;
}

void ReservationMap::reserve_eve(int id, std::int64_t now, std::int64_t until) {
  if (until <= now) return;
  if (eve_until_[id] <= now) ++eve_count_;  // fresh reservation, not an extension
  if (eve_until_[id] < until) {
    eve_until_[id] = until;
    eve_queue_.emplace_back(until, id);
  }
}

void ReservationMap::expire_eve(std::int64_t t) {
  size_t i = 0;
  while (i < eve_queue_.size() && eve_queue_[i].first <= t) {
    const auto [until, id] = eve_queue_[i];
    if (eve_until_[id] == until) --eve_count_;
    ++i;
  }
  if (i > 0) eve_queue_.erase(eve_queue_.begin(), eve_queue_.begin() + i);
}

int ReservationMap::free_count(std::int64_t /*t*/) const {
  return total() - benign_count_ - eve_count_;
}

int ReservationMap::eve_reserved_count(std::int64_t /*t*/) const {
  return eve_count_;
}

std::optional<Csr> sense_and_select(const SpsParams& sps, AttackMode mode,
                                    double x, const ReservationMap& rmap,
                                    std::int64_t t, Rng& rng) {
  const int total = rmap.total();
  if (mode == AttackMode::ActiveEve) {
    // A single uniform probe over the grid; the attempt fails when the
    // probed CSR is sensed as reserved. The empirical success rate then
    // tracks (1 - x) * p_sch.
    if (!rng.bernoulli(sps.p_sch)) return std::nullopt;
    const int probe = static_cast<int>(rng.uniform_int(0, total - 1));
    if (!rmap.is_free(probe, t)) return std::nullopt;
    return rmap.csr_from_id(probe, sps.k_contiguous);
  }
  const double x_eff = mode == AttackMode::Off ? 0.0 : x;
  const double p_eff = (1.0 - x_eff) * sps.p_sch;
  if (!rng.bernoulli(p_eff)) return std::nullopt;
  const int nf = rmap.free_count(t);
  if (nf == 0) return std::nullopt;
  int r = static_cast<int>(rng.uniform_int(0, nf - 1));
  for (int id = 0; id < total; ++id) {
    if (rmap.is_free(id, t)) {
      if (r == 0) return rmap.csr_from_id(id, sps.k_contiguous);
      --r;
    }
  }
  return std::nullopt;  // unreachable
}

namespace {

bool subchannels_overlap(const Csr& a, const Csr& b) {
  return a.subchannel_start < b.subchannel_start + b.width &&
         b.subchannel_start < a.subchannel_start + a.width;
}

}  // namespace

std::vector<RxEvent> resolve_receptions(const std::vector<TxEvent>& txs,
                                        const std::vector<double>& positions,
                                        const SpsParams& sps,
                                        std::vector<Rng>& rx_phi_rngs,
                                        bool half_duplex,
                                        bool emit_out_of_range) {
  std::vector<RxEvent> out;
  const int n = static_cast<int>(positions.size());
  std::vector<char> busy(n, 0);
  for (const auto& e : txs) busy[e.tx_id] = 1;

  for (const auto& e : txs) {
    for (int rx = 0; rx < n; ++rx) {
      if (rx == static_cast<int>(e.tx_id)) continue;
      RxEvent ev{e.tx_id, static_cast<std::uint32_t>(rx), e.gen_time_ms,
                 e.tx_time_ms + 1, RxOutcome::Ok};
      const double d = std::abs(positions[e.tx_id] - positions[rx]);
      if (d > sps.raw_m) {
        if (emit_out_of_range) {
          ev.outcome = RxOutcome::OutOfRange;
          out.push_back(ev);
        }
        continue;
      }
      if (half_duplex && busy[rx]) {
        ev.outcome = RxOutcome::PhyLoss;
        out.push_back(ev);
        continue;
      }
      bool collided = false;
      for (const auto& other : txs) {
        if (other.tx_id == e.tx_id) continue;
        if (subchannels_overlap(other.csr, e.csr) &&
            std::abs(positions[other.tx_id] - positions[rx]) <= sps.raw_m) {
          collided = true;
          break;
        }
      }
      if (collided) {
        ev.outcome = RxOutcome::Collision;
      } else if (sps.phi < 1.0 && !rx_phi_rngs[rx].bernoulli(sps.phi)) {
        ev.outcome = RxOutcome::PhyLoss;
      }
      out.push_back(ev);
    }
  }
  return out;
}

namespace {
constexpr std::uint64_t kPurposePosition = 0;
constexpr std::uint64_t kPurposeSched = 1;
constexpr std::uint64_t kPurposePhi = 2;
constexpr std::uint64_t kPurposeEve = 3;
constexpr std::uint64_t kEveEntity = 0xe5e5e5e5ULL;
}  // namespace

double World::eve_max_fraction(const SpsParams& sps, int eve_rri_ms) {
  // One subframe-column of reservations per transmission instant, each
  // valid for one RRI.
  return std::min(1.0, sps.delta_ms * sps.gamma /
                           (eve_rri_ms * static_cast<double>(sps.gamma)));
}

World::World(const Config& cfg, WorldOptions opt)
    : cfg_(cfg),
      opt_(opt),
      rmap_(cfg.sps.gamma, cfg.sps.selectable_starts()),
      eve_rng_(cfg.seed, kEveEntity, kPurposeEve) {
  warmup_ms_ = opt_.warmup_ms >= 0 ? opt_.warmup_ms : 10 * cfg_.sps.gamma;

  if (cfg_.attack.mode == AttackMode::ActiveEve) {
    const double xmax = eve_max_fraction(cfg_.sps, cfg_.attack.eve_rri_ms);
    if (cfg_.attack.x > xmax + 1e-12)
      throw ValidationError(
          "requested starvation fraction " + std::to_string(cfg_.attack.x) +
          " unachievable with eve_rri_ms=" + std::to_string(cfg_.attack.eve_rri_ms) +
          "; max achievable fraction is " + std::to_string(xmax));
  }

  const int n = cfg_.scenario.n_vehicles;
  ues_.resize(n);
  positions_.resize(n);
  for (int i = 0; i < n; ++i) {
    Rng pos_rng(cfg_.seed, static_cast<std::uint64_t>(i), kPurposePosition);
    positions_[i] = pos_rng.uniform01() * cfg_.scenario.road_length_m;
    ues_[i].sched_rng = Rng(cfg_.seed, static_cast<std::uint64_t>(i), kPurposeSched);
    ues_[i].phi_rng = Rng(cfg_.seed, static_cast<std::uint64_t>(i), kPurposePhi);
    ues_[i].state.phase = UeState::Phase::Idle;
    ues_[i].epoch_start = 0;
  }
  neighbors_.resize(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && std::abs(positions_[i] - positions_[j]) <= cfg_.sps.raw_m)
        neighbors_[i].push_back(j);
  stats_.rc_histogram.assign(cfg_.sps.rc_max + 1, 0);
}

void World::force_active(int ue, const Csr& csr, int rc, int tau,
                         std::int64_t epoch_start) {
  auto& u = ues_[ue];
  u.state.phase = UeState::Phase::Active;
  u.state.csr = csr;
  u.state.rc = rc;
  u.state.tau = tau;
  u.epoch_start = epoch_start;
  u.tx_in_epoch = 0;
  const int id = rmap_.csr_id(csr);
  if (rmap_.benign_holder(id) < 0) rmap_.reserve_benign(id, ue);
}

void World::eve_step() {
  const int total = rmap_.total();
  const int starts = cfg_.sps.selectable_starts();
  const int gamma = cfg_.sps.gamma;
  // Steady-state target: x * total reservations, each alive one RRI.
  eve_budget_ += cfg_.attack.x * total * cfg_.attack.eve_rri_ms / gamma;
  int batch = static_cast<int>(eve_budget_);
  eve_budget_ -= batch;
  batch = std::min(batch, starts);  // per-transmission capacity
  int scanned = 0;
  while (batch > 0 && scanned < total) {
    const int id = eve_cursor_;
    eve_cursor_ = (eve_cursor_ + 1) % total;
    ++scanned;
    // Never transmit over a benign UE's held CSR; skip already-reserved ones.
    if (rmap_.benign_holder(id) >= 0 || rmap_.eve_reserved(id, t_)) continue;
    rmap_.reserve_eve(id, t_, t_ + gamma);
    --batch;
  }
}

void World::transmit(int ue_idx, std::vector<TxEvent>& txs) {
  auto& u = ues_[ue_idx];
  const int gamma = cfg_.sps.gamma;
  TxEvent e;
  e.tx_id = static_cast<std::uint32_t>(ue_idx);
  e.gen_time_ms = u.epoch_start + u.tx_in_epoch * gamma;
  e.tx_time_ms = t_;
  e.csr = u.state.csr;
  txs.push_back(e);
  ++u.tx_in_epoch;
  ++stats_.tx_count;

  --u.state.rc;
  if (u.state.rc == 0) {
    ++stats_.keep_decisions;
    if (u.sched_rng.bernoulli(cfg_.sps.p_keep)) {
      ++stats_.keeps;
      u.state.rc = static_cast<int>(
          u.sched_rng.uniform_int(cfg_.sps.rc_min, cfg_.sps.rc_max));
      stats_.rc_histogram[u.state.rc]++;
      u.state.tau = gamma - 1;
    } else {
      rmap_.release_benign(rmap_.csr_id(u.state.csr));
      u.state.phase = UeState::Phase::Idle;
      u.state.ms_in_idle = 0;
      // The new sampling epoch starts with the first Idle subframe, which is
      // the one after this (final) transmission.
      u.epoch_start = t_ + 1;
      u.tx_in_epoch = 0;
    }
  } else {
    u.state.tau = gamma - 1;
  }
}

void World::step(EventSink* sink) {
  const int gamma = cfg_.sps.gamma;
  rmap_.expire_eve(t_);
  if (cfg_.attack.mode == AttackMode::ActiveEve &&
      t_ % cfg_.attack.eve_rri_ms == 0)
    eve_step();

  std::vector<TxEvent> txs;
  for (int i = 0; i < static_cast<int>(ues_.size()); ++i) {
    auto& u = ues_[i];
    switch (u.state.phase) {
      case UeState::Phase::Active:
        if (u.state.tau == 0) {
          transmit(i, txs);
        } else {
          --u.state.tau;
        }
        break;
      case UeState::Phase::Wait:
        if (--u.state.wait_remaining == 0) {
          u.state.phase = UeState::Phase::Active;
          u.state.rc = static_cast<int>(
              u.sched_rng.uniform_int(cfg_.sps.rc_min, cfg_.sps.rc_max));
          stats_.rc_histogram[u.state.rc]++;
          u.state.tau = gamma - 1;
          if (u.state.tau == 0) transmit(i, txs);
        }
        break;
      case UeState::Phase::Idle: {
        ++u.state.ms_in_idle;
        ++stats_.idle_attempts;
        auto picked = sense_and_select(cfg_.sps, cfg_.attack.mode,
                                       cfg_.attack.x, rmap_, t_, u.sched_rng);
        if (picked) {
          ++stats_.idle_successes;
          rmap_.reserve_benign(rmap_.csr_id(*picked), i);
          u.state.csr = *picked;
          const int w = static_cast<int>(
              ((picked->subframe_offset - (t_ % gamma)) % gamma + gamma) % gamma);
          u.state.wait_remaining = w + 1;
          u.state.phase = UeState::Phase::Wait;
        }
        break;
      }
    }
  }

  resolve_subframe(txs, sink);
  if (sink) sink->on_subframe_end(t_, rmap_.free_fraction(t_));
  ++t_;
}

void World::resolve_subframe(const std::vector<TxEvent>& txs, EventSink* sink) {
  if (!sink || txs.empty()) return;
  const double raw = cfg_.sps.raw_m;
  const double phi = cfg_.sps.phi;

  for (const auto& e : txs) sink->on_tx(e);

  // Overlapping concurrent transmitters (for the collision rule).
  std::vector<std::vector<int>> overlap(txs.size());
  for (size_t a = 0; a + 1 < txs.size(); ++a)
    for (size_t b = a + 1; b < txs.size(); ++b)
      if (subchannels_overlap(txs[a].csr, txs[b].csr)) {
        overlap[a].push_back(static_cast<int>(txs[b].tx_id));
        overlap[b].push_back(static_cast<int>(txs[a].tx_id));
      }

  std::vector<char> busy(ues_.size(), 0);
  for (const auto& e : txs) busy[e.tx_id] = 1;

  for (size_t a = 0; a < txs.size(); ++a) {
    const auto& e = txs[a];
    for (int rx : neighbors_[e.tx_id]) {
      RxEvent ev{e.tx_id, static_cast<std::uint32_t>(rx), e.gen_time_ms,
                 e.tx_time_ms + 1, RxOutcome::Ok};
      if (opt_.half_duplex && busy[rx]) {
        ev.outcome = RxOutcome::PhyLoss;
      } else {
        bool collided = false;
        for (int other : overlap[a])
          if (std::abs(positions_[other] - positions_[rx]) <= raw) {
            collided = true;
            break;
          }
        if (collided)
          ev.outcome = RxOutcome::Collision;
        else if (phi < 1.0 && !ues_[rx].phi_rng.bernoulli(phi))
          ev.outcome = RxOutcome::PhyLoss;
      }
      sink->on_rx(ev);
    }
  }
}

void World::run(std::int64_t duration_ms, EventSink* sink) {
  const std::int64_t end = t_ + duration_ms;
  while (t_ < end) step(sink);
}

}  // namespace aoistarve
