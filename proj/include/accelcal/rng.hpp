#pragma once

#include <cstdint>

namespace accelcal {

// Counter-based deterministic random numbers.
//
// Every value is a pure function of (seed, index), so streams can be
// evaluated in any order or in parallel and still reproduce bit-identically
// on any platform. std::normal_distribution and friends are deliberately
// avoided: their output is implementation-defined.
namespace rng {

// SplitMix64 output function.
inline std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t at(std::uint64_t seed, std::uint64_t index) {
  return mix(mix(seed) ^ mix(index));
}

// Uniform in [0, 1), 53-bit resolution.
inline double uniform01(std::uint64_t seed, std::uint64_t index) {
  return static_cast<double>(at(seed, index) >> 11) * 0x1.0p-53;
}

inline double uniform(std::uint64_t seed, std::uint64_t index, double lo, double hi) {
  return lo + (hi - lo) * uniform01(seed, index);
}

struct GaussPair {
  double first = 0.0;
  double second = 0.0;
};

// Box-Muller transform over two counter values; pair k consumes
// uniform indices 2k and 2k+1.
GaussPair gauss_pair(std::uint64_t seed, std::uint64_t pair_index);

// Sequential convenience wrapper over the counter scheme.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : seed_(seed) {}

  double next_uniform01() { return uniform01(seed_, next_++); }
  double next_uniform(double lo, double hi) { return uniform(seed_, next_++, lo, hi); }

 private:
  std::uint64_t seed_;
  std::uint64_t next_ = 0;
};

}  // namespace rng
}  // namespace accelcal
