#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace grm {

// splitmix64 step (Steele, Lea, Flood 2014).
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Hash (seed, a, b) into a fresh 64-bit seed. Used to derive independent
// sub-seeds for item sampling, data simulation, and resimulation attempts.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t s = seed;
  std::uint64_t h = splitmix64(s);
  s ^= a + 0x9e3779b97f4a7c15ULL;
  h ^= splitmix64(s);
  s ^= b + 0x632be59bd9b4e019ULL;
  h ^= splitmix64(s);
  return h;
}

// Counter-based generator: a splitmix64 walk whose start is hashed from
// (seed, stream). Streams with distinct ids are independent, so replicates
// can be simulated in parallel with reproducible results.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream) : state_(derive_seed(seed, stream)) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Uniform on [0, 1), 53 random mantissa bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe to pass to log().
  double next_double_open0() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Box-Muller; no spare caching so the draw sequence is position-independent.
  double normal() {
    const double u1 = next_double_open0();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double lognormal(double meanlog, double sdlog) {
    return std::exp(meanlog + sdlog * normal());
  }

 private:
  std::uint64_t state_;
};

}  // namespace grm
