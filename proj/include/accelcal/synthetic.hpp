#pragma once

#include <cstdint>
#include <vector>

#include "accelcal/calibration.hpp"
#include "accelcal/types.hpp"

namespace accelcal {

// Ground-truth scenario for generating raw accelerometer readings: a known
// sensor held static in a set of orientations, measuring only gravity.
struct TruthScenario {
  CalibrationParams params;
  GravityConstant g;
  std::vector<Vec3> pose_directions;  // unit gravity directions, orthonormal frame
  double noise_std = 0.0;             // per-component Gaussian noise, raw units
  std::uint64_t seed = 42;
};

// Runs the sensor model backwards for each pose direction d:
// orthonormal coordinates g*d -> affine coordinates (triangular back-solve)
// -> measured components (Gram matrix) -> raw = b .* a + s, plus optional
// seeded Gaussian noise on each raw component.
PoseDataset generate(const TruthScenario& scenario);

// n near-uniform unit vectors on the sphere (spherical Fibonacci lattice).
std::vector<Vec3> fibonacci_directions(std::size_t n);

}  // namespace accelcal
