#include "accelcal/types.hpp"

#include <string>

namespace accelcal {

namespace {

// Below ~0.9 the axis geometry is far outside anything a +-10% tolerance
// band allows; treat as corrupt input rather than degrading silently.
constexpr double kMinSinPhi = 0.9;
constexpr double kMinDetGram = 1e-6;

double det_gram_of(double phi, double psi, double theta) {
  const double cphi = axis_cos(phi);
  const double cpsi = axis_cos(psi);
  const double cth = axis_cos(theta);
  return 1.0 - cphi * cphi - cpsi * cpsi - cth * cth + 2.0 * cphi * cpsi * cth;
}

void check_angle(const char* name, double value, double lo, double hi) {
  if (!std::isfinite(value) || value < lo || value > hi)
    throw std::domain_error(std::string("axis angle ") + name + " = " + std::to_string(value) +
                            " outside allowed range [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + "]");
}

}  // namespace

AxisAngles::AxisAngles(double phi, double psi, double theta, double tolerance)
    : phi_(phi), psi_(psi), theta_(theta) {
  if (!std::isfinite(tolerance) || tolerance < 0.0 || tolerance > kMaxAngleTol)
    throw std::invalid_argument("angle tolerance must be in [0, " +
                                std::to_string(kMaxAngleTol) + "]");
  const double lo = lower_bound(tolerance);
  const double hi = upper_bound(tolerance);
  check_angle("phi", phi_, lo, hi);
  check_angle("psi", psi_, lo, hi);
  check_angle("theta", theta_, lo, hi);
  if (std::abs(std::sin(phi_)) < kMinSinPhi)
    throw std::domain_error("axis angle phi too far from pi/2 (|sin phi| < 0.9)");
  const double d = det_gram_of(phi_, psi_, theta_);
  if (!(d > kMinDetGram))
    throw std::domain_error("axis angles give a degenerate Gram matrix (det <= 1e-6)");
}

double AxisAngles::det_gram() const { return det_gram_of(phi_, psi_, theta_); }

void validate(const CalibrationParams& params) {
  for (int i = 0; i < 3; ++i) {
    if (!std::isfinite(params.shift[static_cast<std::size_t>(i)]))
      throw std::invalid_argument("calibration shift s" + std::to_string(i + 1) +
                                  " is not finite");
    const double b = params.scale[static_cast<std::size_t>(i)];
    if (!std::isfinite(b) || b <= 0.0)
      throw std::invalid_argument("calibration scale b" + std::to_string(i + 1) +
                                  " must be finite and positive");
  }
}

}  // namespace accelcal
