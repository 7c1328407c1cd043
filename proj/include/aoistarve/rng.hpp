#pragma once

#include <cstdint>
#include <cmath>

namespace aoistarve {

// Deterministic counter-style PRNG with per-entity substreams.
//
// Every draw is a pure function of (root seed, entity id, purpose tag, draw
// index), so adding or removing entities never perturbs the draws of
// unrelated entities. Output is identical across platforms: only 64-bit
// integer arithmetic and IEEE-754 double division are used.
class Rng {
public:
  Rng() : state_(0) {}

  Rng(std::uint64_t root_seed, std::uint64_t entity_id, std::uint64_t purpose_tag) {
    // Injective-in-practice stream derivation: feed each component through
    // the SplitMix64 finalizer with distinct round constants.
    std::uint64_t s = mix(root_seed ^ 0x9e3779b97f4a7c15ULL);
    s = mix(s + 0xbf58476d1ce4e5b9ULL * (entity_id + 1));
    s = mix(s + 0x94d049bb133111ebULL * (purpose_tag + 1));
    state_ = s;
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Uniform double in [0, 1) with 53 bits of precision.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Uniform integer on [lo, hi] inclusive (fixed-point multiply, no
  // platform-dependent rejection loop).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t x = next_u64();
    const unsigned __int128 m =
        static_cast<unsigned __int128>(x) * static_cast<unsigned __int128>(range);
    return lo + static_cast<std::int64_t>(static_cast<std::uint64_t>(m >> 64));
  }

  // Geometric number of trials until first success, support {1, 2, ...}.
  std::int64_t geometric1(double p) {
    if (p >= 1.0) return 1;
    const double u = 1.0 - uniform01();  // avoid log(0)
    return 1 + static_cast<std::int64_t>(std::floor(std::log(u) / std::log1p(-p)));
  }

private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

inline Rng derive_substream(std::uint64_t root_seed, std::uint64_t entity_id,
                            std::uint64_t purpose_tag) {
  return Rng(root_seed, entity_id, purpose_tag);
}

}  // namespace aoistarve
