#pragma once

// Slow reference implementations the tests compare the library against.
// Everything here is built from first principles (long-double Gaussian
// elimination on pairwise axis cosines) rather than from the closed forms
// in src/, so agreement is meaningful.

#include <array>
#include <cmath>
#include <stdexcept>

#include "accelcal/rng.hpp"
#include "accelcal/types.hpp"

namespace oracle {

using Mat = std::array<std::array<long double, 3>, 3>;
using Col = std::array<long double, 3>;

inline Mat gram(double phi, double psi, double theta) {
  const long double cphi = std::cos(static_cast<long double>(phi));
  const long double cpsi = std::cos(static_cast<long double>(psi));
  const long double cth = std::cos(static_cast<long double>(theta));
  return {{{1.0L, cphi, cpsi}, {cphi, 1.0L, cth}, {cpsi, cth, 1.0L}}};
}

// Partial-pivot solve of A x = b.
inline Col solve(Mat a, Col b) {
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    if (a[col][col] == 0.0L) throw std::runtime_error("singular system");
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const long double f = a[r][col] / a[col][col];
      for (int c = 0; c < 3; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  return {b[0] / a[0][0], b[1] / a[1][1], b[2] / a[2][2]};
}

inline Mat inverse(const Mat& a) {
  Mat inv;
  for (int col = 0; col < 3; ++col) {
    Col e{};
    e[col] = 1.0L;
    const Col x = solve(a, e);
    for (int r = 0; r < 3; ++r) inv[r][col] = x[r];
  }
  return inv;
}

// sqrt(a^T G^{-1} a) via the linear system, no closed form involved.
inline double magnitude_nonorth(const accelcal::Vec3& a, double phi, double psi,
                                double theta) {
  const Mat g = gram(phi, psi, theta);
  const Col x = solve(g, {a.x, a.y, a.z});
  const long double q =
      static_cast<long double>(a.x) * x[0] + a.y * x[1] + a.z * x[2];
  return static_cast<double>(std::sqrt(q > 0.0L ? q : 0.0L));
}

inline double magnitude_orth(const accelcal::Vec3& a) {
  return static_cast<double>(std::sqrt(static_cast<long double>(a.x) * a.x +
                                       static_cast<long double>(a.y) * a.y +
                                       static_cast<long double>(a.z) * a.z));
}

inline double rel_error(const accelcal::Vec3& a, double phi, double psi, double theta) {
  const double mn = oracle::magnitude_nonorth(a, phi, psi, theta);
  return std::abs(mn - oracle::magnitude_orth(a)) / mn;
}

// Element-wise expected entries of the orthonormalization map: row 1 along
// the first axis, row 2 in the plane of the first two.
inline Mat orthonormalization(double phi, double psi, double theta) {
  const long double cphi = std::cos(static_cast<long double>(phi));
  const long double cpsi = std::cos(static_cast<long double>(psi));
  const long double cth = std::cos(static_cast<long double>(theta));
  const long double sphi = std::sin(static_cast<long double>(phi));
  const long double det =
      1.0L - cphi * cphi - cpsi * cpsi - cth * cth + 2.0L * cphi * cpsi * cth;
  return {{{1.0L, cphi, cpsi},
           {0.0L, sphi, (cth - cphi * cpsi) / sphi},
           {0.0L, 0.0L, std::sqrt(det) / sphi}}};
}

// Deterministic test-point generators (the library RNG is fine for picking
// points; the expected values above never touch library math).
inline accelcal::Vec3 random_vec(std::uint64_t seed, std::uint64_t k, double lo,
                                 double hi) {
  return {accelcal::rng::uniform(seed, 3 * k, lo, hi),
          accelcal::rng::uniform(seed, 3 * k + 1, lo, hi),
          accelcal::rng::uniform(seed, 3 * k + 2, lo, hi)};
}

inline accelcal::AxisAngles random_angles(std::uint64_t seed, std::uint64_t k,
                                          double tol) {
  const double lo = accelcal::AxisAngles::lower_bound(tol);
  const double hi = accelcal::AxisAngles::upper_bound(tol);
  return accelcal::AxisAngles(accelcal::rng::uniform(seed, 3 * k, lo, hi),
                              accelcal::rng::uniform(seed, 3 * k + 1, lo, hi),
                              accelcal::rng::uniform(seed, 3 * k + 2, lo, hi), tol);
}

}  // namespace oracle
