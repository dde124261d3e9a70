#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace accelcal {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kHalfPi = 0.5 * kPi;

// MEMS axes are close to mutually orthogonal; angle bounds are
// (pi/2)*(1 - tol) .. (pi/2)*(1 + tol).
inline constexpr double kDefaultAngleTol = 0.02;
inline constexpr double kMaxAngleTol = 0.1;

// Standard gravity, m/s^2.
inline constexpr double kStandardGravity = 9.80665;

// Cosine of an inter-axis angle. The stored kHalfPi stands for an exact
// right angle, so its cosine is exactly zero instead of the ~6e-17 that
// std::cos returns at the nearest double; this keeps the orthogonal case
// an exact identity throughout the library.
inline double axis_cos(double angle) {
  return angle == kHalfPi ? 0.0 : std::cos(angle);
}

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) {
  return {a.x + b.x, a.y + b.y, a.z + b.z};
}

inline Vec3 operator-(const Vec3& a, const Vec3& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}

inline Vec3 operator*(double s, const Vec3& v) {
  return {s * v.x, s * v.y, s * v.z};
}

inline double dot(const Vec3& a, const Vec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

// Row-major 3x3 matrix.
struct Mat3 {
  std::array<double, 9> m{};

  double& operator()(int r, int c) { return m[static_cast<std::size_t>(3 * r + c)]; }
  double operator()(int r, int c) const { return m[static_cast<std::size_t>(3 * r + c)]; }

  static Mat3 identity() {
    Mat3 e;
    e(0, 0) = e(1, 1) = e(2, 2) = 1.0;
    return e;
  }
};

inline Vec3 operator*(const Mat3& a, const Vec3& v) {
  return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
          a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
          a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
}

inline Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 c;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      c(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j) + a(i, 2) * b(2, j);
  return c;
}

inline Mat3 transpose(const Mat3& a) {
  Mat3 t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t(i, j) = a(j, i);
  return t;
}

// Inter-axis angles phi = angle(Ox,Oy), psi = angle(Ox,Oz), theta = angle(Oy,Oz),
// in radians. Construction validates the range and the Gram-matrix determinant,
// so a live AxisAngles always describes a usable (invertible) axis geometry.
class AxisAngles {
 public:
  AxisAngles(double phi, double psi, double theta, double tolerance = kDefaultAngleTol);

  static AxisAngles orthogonal() { return AxisAngles(kHalfPi, kHalfPi, kHalfPi, 0.0); }

  // Exact bound values shared by every range check in the library.
  static double lower_bound(double tolerance) { return kHalfPi * (1.0 - tolerance); }
  static double upper_bound(double tolerance) { return kHalfPi * (1.0 + tolerance); }

  double phi() const { return phi_; }
  double psi() const { return psi_; }
  double theta() const { return theta_; }

  // det of the Gram matrix: 1 - cos^2(phi) - cos^2(psi) - cos^2(theta)
  //                         + 2 cos(phi) cos(psi) cos(theta).
  double det_gram() const;

 private:
  double phi_;
  double psi_;
  double theta_;
};

// Physical gravity magnitude used as the calibration reference, m/s^2.
class GravityConstant {
 public:
  GravityConstant() = default;
  explicit GravityConstant(double mps2) : value_(mps2) {
    if (!std::isfinite(value_) || value_ <= 0.0)
      throw std::invalid_argument("gravity constant must be finite and positive");
  }
  double mps2() const { return value_; }

 private:
  double value_ = kStandardGravity;
};

// One raw accelerometer reading (sensor units, uncalibrated).
struct RawSample {
  double ax = 0.0;
  double ay = 0.0;
  double az = 0.0;
};

// Full sensor model: raw = b .* a + s component-wise, axes skewed by angles.
struct CalibrationParams {
  std::array<double, 3> shift{0.0, 0.0, 0.0};  // s_i, raw units
  std::array<double, 3> scale{1.0, 1.0, 1.0};  // b_i, raw units per m/s^2
  AxisAngles angles = AxisAngles::orthogonal();
};

// Throws std::invalid_argument when shifts are not finite or scales are not
// strictly positive. Angle validity is enforced by AxisAngles itself.
void validate(const CalibrationParams& params);

}  // namespace accelcal
