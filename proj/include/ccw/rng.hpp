// Deterministic random-number streams. Each logical stream (master seed,
// stream id, subject index) is hashed to an independent SplitMix64 sequence,
// so simulated subjects are reproducible regardless of sample size, thread
// count, or draw order across subjects.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>

namespace ccw {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Independent stream for a (seed, stream, unit) triple.
  static Rng for_unit(std::uint64_t master_seed, std::uint64_t stream_id, std::uint64_t unit) {
    std::uint64_t s = mix(master_seed + 0x9e3779b97f4a7c15ULL * (stream_id + 1));
    s = mix(s ^ mix(unit + 0x632be59bd9b4e019ULL));
    return Rng(s);
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on (0, 1): strictly interior so log() and logit transforms are safe.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller. Always consumes exactly two uniforms and
  // discards the second variate, keeping the draw count per call fixed.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Exponential with the given rate; +inf when rate == 0.
  double exponential(double rate) {
    double u = uniform();
    if (rate <= 0.0) return std::numeric_limits<double>::infinity();
    return -std::log(u) / rate;
  }

  double bernoulli(double p) { return uniform() < p ? 1.0 : 0.0; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdULL;
    z = (z ^ (z >> 33)) * 0xc4ceb9fe1a85ec53ULL;
    return z ^ (z >> 33);
  }

  std::uint64_t state_;
};

// Stream ids keep draws for different purposes from colliding.
namespace stream {
inline constexpr std::uint64_t kBaselineDgp = 1;
inline constexpr std::uint64_t kTimedepDgp = 2;
inline constexpr std::uint64_t kOracle = 3;
}  // namespace stream

// Per-replicate seed for Monte Carlo runs: a pure function of the master
// seed and the run coordinates, so any replicate can be regenerated alone.
inline std::uint64_t replicate_seed(std::uint64_t master_seed, std::uint64_t scenario_hash,
                                    std::uint64_t sample_size, std::uint64_t replicate) {
  std::uint64_t z = master_seed;
  auto fold = [&z](std::uint64_t v) {
    z ^= v + 0x9e3779b97f4a7c15ULL + (z << 6) + (z >> 2);
  };
  fold(scenario_hash);
  fold(sample_size);
  fold(replicate);
  Rng r(z);
  return r.next_u64();
}

// FNV-1a hash for scenario names used in seed derivation.
inline std::uint64_t name_hash(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace ccw
