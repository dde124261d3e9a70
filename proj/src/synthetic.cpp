#include "accelcal/synthetic.hpp"

#include <cmath>
#include <stdexcept>

#include "accelcal/geometry.hpp"
#include "accelcal/rng.hpp"

namespace accelcal {

PoseDataset generate(const TruthScenario& scenario) {
  validate(scenario.params);
  if (!std::isfinite(scenario.noise_std) || scenario.noise_std < 0.0)
    throw std::invalid_argument("noise std must be finite and non-negative");

  const Mat3 u = orthonormalization_matrix(scenario.params.angles);
  const Mat3 g = gram_matrix(scenario.params.angles);
  const double gmag = scenario.g.mps2();

  PoseDataset out;
  out.samples.reserve(scenario.pose_directions.size());
  for (std::size_t i = 0; i < scenario.pose_directions.size(); ++i) {
    const Vec3& d = scenario.pose_directions[i];
    if (std::abs(norm(d) - 1.0) > 1e-12)
      throw std::invalid_argument("pose direction " + std::to_string(i) +
                                  " is not unit length");
    const Vec3 orth = gmag * d;
    // Back-substitute u * abar = orth (u is upper triangular).
    Vec3 abar;
    abar.z = orth.z / u(2, 2);
    abar.y = (orth.y - u(1, 2) * abar.z) / u(1, 1);
    abar.x = orth.x - u(0, 1) * abar.y - u(0, 2) * abar.z;
    const Vec3 a = g * abar;

    RawSample raw;
    raw.ax = scenario.params.scale[0] * a.x + scenario.params.shift[0];
    raw.ay = scenario.params.scale[1] * a.y + scenario.params.shift[1];
    raw.az = scenario.params.scale[2] * a.z + scenario.params.shift[2];
    if (scenario.noise_std > 0.0) {
      // Two Box-Muller pairs per pose, indexed by pose so the stream is
      // order-independent.
      const rng::GaussPair n01 = rng::gauss_pair(scenario.seed, 2 * i);
      const rng::GaussPair n23 = rng::gauss_pair(scenario.seed, 2 * i + 1);
      raw.ax += scenario.noise_std * n01.first;
      raw.ay += scenario.noise_std * n01.second;
      raw.az += scenario.noise_std * n23.first;
    }
    out.samples.push_back(raw);
  }
  return out;
}

std::vector<Vec3> fibonacci_directions(std::size_t n) {
  if (n == 0) throw std::invalid_argument("need at least one direction");
  const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
  std::vector<Vec3> dirs;
  dirs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double az = golden_angle * static_cast<double>(i);
    dirs.push_back({r * std::cos(az), r * std::sin(az), z});
  }
  return dirs;
}

}  // namespace accelcal
