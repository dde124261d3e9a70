#include "accelcal/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace accelcal {

Mat3 gram_matrix(const AxisAngles& angles) {
  const double cphi = axis_cos(angles.phi());
  const double cpsi = axis_cos(angles.psi());
  const double cth = axis_cos(angles.theta());
  Mat3 g;
  g(0, 0) = 1.0;
  g(0, 1) = cphi;
  g(0, 2) = cpsi;
  g(1, 0) = cphi;
  g(1, 1) = 1.0;
  g(1, 2) = cth;
  g(2, 0) = cpsi;
  g(2, 1) = cth;
  g(2, 2) = 1.0;
  return g;
}

Mat3 tbar_matrix(const AxisAngles& angles) {
  const double cphi = axis_cos(angles.phi());
  const double cpsi = axis_cos(angles.psi());
  const double cth = axis_cos(angles.theta());
  const double sphi = std::sin(angles.phi());
  const double spsi = std::sin(angles.psi());
  const double sth = std::sin(angles.theta());
  // den = -det G; negative throughout the allowed range.
  const double den =
      -1.0 + cphi * cphi + cpsi * cpsi + cth * cth - 2.0 * cphi * cpsi * cth;
  Mat3 t;
  t(0, 0) = -sth * sth / den;
  t(0, 1) = (cphi - cth * cpsi) / den;
  t(0, 2) = (cpsi - cphi * cth) / den;
  t(1, 0) = t(0, 1);
  t(1, 1) = -spsi * spsi / den;
  t(1, 2) = (cth - cphi * cpsi) / den;
  t(2, 0) = t(0, 2);
  t(2, 1) = t(1, 2);
  t(2, 2) = -sphi * sphi / den;
  return t;
}

Mat3 orthonormalization_matrix(const AxisAngles& angles) {
  const double cphi = axis_cos(angles.phi());
  const double cpsi = axis_cos(angles.psi());
  const double cth = axis_cos(angles.theta());
  const double sphi = std::sin(angles.phi());
  const double det = angles.det_gram();
  if (!(det > 0.0))
    throw std::domain_error("orthonormalization requires det(G) > 0");
  Mat3 t;
  t(0, 0) = 1.0;
  t(0, 1) = cphi;
  t(0, 2) = cpsi;
  t(1, 0) = 0.0;
  t(1, 1) = sphi;
  t(1, 2) = (cth - cphi * cpsi) / sphi;
  t(2, 0) = 0.0;
  t(2, 1) = 0.0;
  t(2, 2) = std::sqrt(det) / sphi;
  return t;
}

Vec3 affine_from_measured(const Vec3& measured, const AxisAngles& angles) {
  return tbar_matrix(angles) * measured;
}

double magnitude_orth(const Vec3& measured) { return norm(measured); }

double magnitude_nonorth(const Vec3& measured, const AxisAngles& angles) {
  const double cphi = axis_cos(angles.phi());
  const double cpsi = axis_cos(angles.psi());
  const double cth = axis_cos(angles.theta());
  const double c2phi = std::cos(2.0 * angles.phi());
  const double c2psi = std::cos(2.0 * angles.psi());
  const double c2th = std::cos(2.0 * angles.theta());
  const double ax = measured.x, ay = measured.y, az = measured.z;
  const double num = 2.0 * (-1.0 + c2th) * ax * ax + 2.0 * (-1.0 + c2psi) * ay * ay +
                     2.0 * (-1.0 + c2phi) * az * az +
                     8.0 * (cphi - cpsi * cth) * ax * ay +
                     8.0 * (cth - cphi * cpsi) * ay * az +
                     8.0 * (cpsi - cphi * cth) * ax * az;
  const double den =
      2.0 + 2.0 * c2phi + 2.0 * c2psi + 2.0 * c2th - 8.0 * cphi * cpsi * cth;
  const double ratio = num / den;
  if (ratio < 0.0) {
    // The quadratic form is positive semidefinite in-range; anything below
    // rounding noise means the inputs were not a real measurement.
    if (ratio < -1e-12 * (ax * ax + ay * ay + az * az))
      throw std::domain_error("magnitude_nonorth: quadratic form is negative");
    return 0.0;
  }
  return std::sqrt(ratio);
}

double magnitude_nonorth_affine(const Vec3& affine, const AxisAngles& angles) {
  const double cphi = axis_cos(angles.phi());
  const double cpsi = axis_cos(angles.psi());
  const double cth = axis_cos(angles.theta());
  const double q = affine.x * affine.x + affine.y * affine.y + affine.z * affine.z +
                   2.0 * affine.x * affine.y * cphi + 2.0 * affine.x * affine.z * cpsi +
                   2.0 * affine.y * affine.z * cth;
  // abar^T G abar; cancellation can leave a tiny negative residue at zero.
  return std::sqrt(q > 0.0 ? q : 0.0);
}

Corrector::Corrector(const CalibrationParams& params) {
  validate(params);
  const Mat3 ortho = orthonormalization_matrix(params.angles) * tbar_matrix(params.angles);
  Mat3 scaled;  // ortho * diag(1/b)
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      scaled(i, j) = ortho(i, j) / params.scale[static_cast<std::size_t>(j)];
  matrix_ = scaled;
  // ortho * (s ./ b) folded through the scaled matrix, so a reading equal to
  // the shift vector corrects to exactly zero.
  offset_ = matrix_ * Vec3{params.shift[0], params.shift[1], params.shift[2]};
}

Vec3 correct_sample(const RawSample& raw, const CalibrationParams& params) {
  return Corrector(params)(raw);
}

}  // namespace accelcal
