#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "accelcal/types.hpp"

namespace accelcal {

// Mean raw readings collected at distinct static orientations. When counts
// are present, pose i is the average of counts[i] readings and the fit
// weighs its squared residual accordingly.
struct PoseDataset {
  std::vector<RawSample> samples;
  std::vector<std::size_t> counts;  // optional; empty or one entry per sample
};

struct FitOptions {
  int max_iterations = 200;
  double tolerance = 1e-10;  // stop when step and gradient inf-norms fall below
  int restarts = 1;
  std::uint64_t seed = 42;
  double angle_tolerance = kDefaultAngleTol;
};

struct FitReport {
  CalibrationParams params;
  double residual_rms = 0.0;  // m/s^2
  int iterations = 0;
  bool converged = false;
  std::vector<double> per_pose_residuals;  // m/s^2
  std::vector<double> objective_history;   // sum of squares after each accepted step
};

// The magnitude-only residual cannot pin down nine parameters unless the
// poses span enough distinct orientations; detected via a Jacobian condition
// estimate at the starting point.
class IllPosedDatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Gravity-magnitude residuals r_i = |calibrated sample i| - g, where the
// magnitude accounts for the axis angles in params.
std::vector<double> residuals(const PoseDataset& dataset, const CalibrationParams& params,
                              const GravityConstant& g);

// Nine-parameter damped least-squares fit (shifts, scales, angles) of the
// gravity-magnitude residuals. Angle bounds and b > 0 are enforced through
// smooth reparameterizations; the solve is deterministic for a given seed.
//
// Throws std::invalid_argument for fewer than 9 poses or non-finite data and
// IllPosedDatasetError when the dataset cannot identify the parameters.
FitReport fit(const PoseDataset& dataset, const GravityConstant& g,
              const FitOptions& options = {});

}  // namespace accelcal
