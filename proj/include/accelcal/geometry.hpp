#pragma once

#include "accelcal/types.hpp"

namespace accelcal {

// Gram matrix G of the accelerometer axes: unit diagonal, off-diagonals
// cos(phi), cos(psi), cos(theta). Symmetric and strictly diagonally dominant
// for in-range angles.
Mat3 gram_matrix(const AxisAngles& angles);

// Closed-form inverse of the Gram matrix (shared denominator evaluated once).
// Satisfies gram_matrix(angles) * tbar_matrix(angles) == I.
Mat3 tbar_matrix(const AxisAngles& angles);

// Upper-triangular change of basis from affine axis coordinates to an
// orthonormal frame (f1 along the x axis, f2 in the x-y axis plane).
// Its transpose times itself reproduces the Gram matrix, and its diagonal
// is strictly positive.
Mat3 orthonormalization_matrix(const AxisAngles& angles);

// Affine coordinates abar solving G * abar = a.
Vec3 affine_from_measured(const Vec3& measured, const AxisAngles& angles);

// Acceleration magnitude when the axes are assumed orthogonal: |a|_2.
double magnitude_orth(const Vec3& measured);

// True acceleration magnitude for skewed axes, directly from the measured
// components: sqrt(a^T G^-1 a) via the explicit rational form.
double magnitude_nonorth(const Vec3& measured, const AxisAngles& angles);

// Same magnitude evaluated from affine coordinates: sqrt(abar^T G abar).
double magnitude_nonorth_affine(const Vec3& affine, const AxisAngles& angles);

// Precomputed correction pipeline. Applies, in order: per-component shift and
// scale inversion, Gram solve, orthonormalization. Collapses to a single
// affine map  a_orth = M * raw - offset.
class Corrector {
 public:
  explicit Corrector(const CalibrationParams& params);

  Vec3 operator()(const RawSample& raw) const {
    return matrix_ * Vec3{raw.ax, raw.ay, raw.az} - offset_;
  }

  const Mat3& matrix() const { return matrix_; }
  const Vec3& offset() const { return offset_; }

 private:
  Mat3 matrix_;
  Vec3 offset_;
};

// One-shot form of Corrector for single samples.
Vec3 correct_sample(const RawSample& raw, const CalibrationParams& params);

}  // namespace accelcal
