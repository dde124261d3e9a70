#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "accelcal/types.hpp"

namespace accelcal {

// Magnitude error from wrongly assuming orthogonal axes:
// |magnitude_nonorth(a) - magnitude_orth(a)|, in m/s^2.
double abs_error(const Vec3& measured, const AxisAngles& angles);

// abs_error relative to the true magnitude; scale-invariant. a must be
// nonzero.
double rel_error(const Vec3& measured, const AxisAngles& angles);

struct SolverOptions {
  int grid_points = 25;       // per dimension of the coarse 5-d scan
  int refine_top = 10;        // simplex refinements seeded from the best cells
  int simplex_max_iter = 400;
  double simplex_tol = 1e-12;
};

struct ErrorProblemResult {
  double max_value = 0.0;  // m/s^2 for problem 1, dimensionless for problem 2
  Vec3 argmax_accel;
  AxisAngles argmax_angles = AxisAngles::orthogonal();
  std::uint64_t evaluations = 0;
};

// Worst absolute error over accelerations of true magnitude g and angles
// within (pi/2)(1 +- angle_tol). The magnitude constraint is eliminated by
// homogeneity: only the direction of a matters, and the reported argmax is
// rescaled so its true magnitude is exactly g.
ErrorProblemResult solve_problem1(const GravityConstant& g, double angle_tol,
                                  const SolverOptions& options = {});

// Worst relative error over the cube [-h, h]^3 and the same angle box. The
// objective is scale-invariant, so the box size cannot move the optimum;
// callers can verify by running several box sizes.
ErrorProblemResult solve_problem2(double box_half_width, double angle_tol,
                                  const SolverOptions& options = {});

// Angle set used by the distribution studies when none is given: estimates
// for a real part, with phi a hair below the default 2% band edge, so the
// triple is constructed with a slightly relaxed tolerance.
AxisAngles default_analysis_angles();

struct HistogramSpec {
  AxisAngles angles = default_analysis_angles();
  double box_half_width = 20.0;
  std::size_t sample_count = 1000000;
  std::size_t bin_count = 60;
  std::uint64_t seed = 42;
  // Bin edges span [first, second] when set, [0, max observed] otherwise.
  std::optional<std::pair<double, double>> range;
};

struct Histogram {
  std::vector<double> edges;        // bin_count + 1, strictly increasing
  std::vector<std::size_t> counts;  // one per bin; sums to kept_samples
  std::size_t kept_samples = 0;     // samples surviving the near-zero discard
};

// Relative-error distribution over uniform draws from the cube, deterministic
// for a given seed. Samples with |a| < 1e-9 are discarded (relative error is
// undefined at zero).
Histogram histogram(const HistogramSpec& spec);

enum class Comparison { kLessEqual, kGreaterEqual };

struct CloudPoint {
  Vec3 a;
  double rel = 0.0;
};

struct DomainCloudSpec {
  AxisAngles angles = default_analysis_angles();
  double box_half_width = 20.0;
  std::size_t sample_count = 1000000;
  std::size_t max_points = 20000;  // deterministic every-k-th thinning budget
  std::uint64_t seed = 42;
};

struct DomainCloud {
  double threshold = 0.0;
  Comparison comparison = Comparison::kLessEqual;
  std::vector<CloudPoint> points;
  std::size_t matched_samples = 0;  // matches before thinning
  std::size_t kept_samples = 0;
};

// Cube samples whose relative error lies on the chosen side of the
// threshold. Uses the same sample stream as histogram() for equal spec
// fields, so clouds at an equal threshold partition the kept samples
// (boundary points land in both).
DomainCloud domain_cloud(double threshold, Comparison comparison,
                         const DomainCloudSpec& spec);

}  // namespace accelcal
