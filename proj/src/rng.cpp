#include "accelcal/rng.hpp"

#include <cmath>

namespace accelcal::rng {

namespace {
constexpr double kTwoPi = 6.28318530717958647692;
}

GaussPair gauss_pair(std::uint64_t seed, std::uint64_t pair_index) {
  // 1 - u keeps the log argument in (0, 1]; u2 spins the phase.
  const double u1 = 1.0 - uniform01(seed, 2 * pair_index);
  const double u2 = uniform01(seed, 2 * pair_index + 1);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = kTwoPi * u2;
  return {r * std::cos(a), r * std::sin(a)};
}

}  // namespace accelcal::rng
