/*
 * Seedable, portable random draws with a documented stream order.
 *
 * mt19937_64 output is fully specified by the standard; the distribution
 * helpers below avoid std::uniform_int_distribution and friends, whose
 * sequences are implementation-defined, so identical seeds reproduce
 * identical tables across toolchains.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace patrol {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [lo, hi], hi >= lo. Modulo reduction; the tiny bias is
  // irrelevant for simulation inputs and keeps the draw a single engine call.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1u;
    return lo + static_cast<std::int64_t>(engine_() % span);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Exponential via inverse CDF; one engine call.
  double exponential(double lambda) {
    return -std::log(1.0 - uniform01()) / lambda;
  }

 private:
  std::mt19937_64 engine_;
};

// splitmix64 step, used to derive per-scenario seeds from a master seed.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace patrol
