#include "accelcal/error_analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "accelcal/geometry.hpp"
#include "accelcal/rng.hpp"

namespace accelcal {

namespace {

// Coefficients of the explicit magnitude form, precomputed once per angle
// triple; mirrors magnitude_nonorth term for term.
struct QuadCoeffs {
  double cxx, cyy, czz, cxy, cyz, cxz, den;

  static QuadCoeffs from_angles(double phi, double psi, double theta) {
    const double cphi = axis_cos(phi), cpsi = axis_cos(psi), cth = axis_cos(theta);
    const double c2phi = std::cos(2.0 * phi), c2psi = std::cos(2.0 * psi),
                 c2th = std::cos(2.0 * theta);
    QuadCoeffs q;
    q.cxx = 2.0 * (-1.0 + c2th);
    q.cyy = 2.0 * (-1.0 + c2psi);
    q.czz = 2.0 * (-1.0 + c2phi);
    q.cxy = 8.0 * (cphi - cpsi * cth);
    q.cyz = 8.0 * (cth - cphi * cpsi);
    q.cxz = 8.0 * (cpsi - cphi * cth);
    q.den = 2.0 + 2.0 * c2phi + 2.0 * c2psi + 2.0 * c2th - 8.0 * cphi * cpsi * cth;
    return q;
  }

  double magnitude(double x, double y, double z) const {
    const double num = cxx * x * x + cyy * y * y + czz * z * z + cxy * x * y +
                       cyz * y * z + cxz * x * z;
    const double ratio = num / den;
    return std::sqrt(ratio > 0.0 ? ratio : 0.0);
  }

  double relative_error(double x, double y, double z) const {
    const double mn = magnitude(x, y, z);
    const double mo = std::sqrt(x * x + y * y + z * z);
    return std::abs(mn - mo) / mn;
  }
};

struct Point5 {
  std::array<double, 5> x{};  // alpha, beta (direction), phi, psi, theta
};

// Shared search engine for both extremal problems over the reduced
// 5-dimensional space (2 sphere angles + 3 axis angles).
class ExtremalSearch {
 public:
  // scale_to_box: evaluate on the cube surface (problem 2, dimensionless);
  // otherwise evaluate the g-normalized absolute error (problem 1, m/s^2).
  ExtremalSearch(bool scale_to_box, double magnitude_or_half_width, double angle_tol,
                 const SolverOptions& opts)
      : scale_to_box_(scale_to_box),
        scale_(magnitude_or_half_width),
        angle_tol_(angle_tol),
        lo_(AxisAngles::lower_bound(angle_tol)),
        hi_(AxisAngles::upper_bound(angle_tol)),
        opts_(opts) {}

  double objective(const Point5& p) {
    ++evaluations_;
    const double alpha = p.x[0], beta = p.x[1];
    const double phi = clamp_angle(p.x[2]);
    const double psi = clamp_angle(p.x[3]);
    const double theta = clamp_angle(p.x[4]);
    const QuadCoeffs q = QuadCoeffs::from_angles(phi, psi, theta);
    const double sa = std::sin(alpha);
    double ux = sa * std::cos(beta), uy = sa * std::sin(beta), uz = std::cos(alpha);
    if (scale_to_box_) {
      const double uinf = std::max({std::abs(ux), std::abs(uy), std::abs(uz)});
      const double f = scale_ / uinf;  // project onto the cube surface
      ux *= f;
      uy *= f;
      uz *= f;
      return q.relative_error(ux, uy, uz);
    }
    const double mn = q.magnitude(ux, uy, uz);
    const double mo = std::sqrt(ux * ux + uy * uy + uz * uz);
    return scale_ * std::abs(1.0 - mo / mn);
  }

  ErrorProblemResult run() {
    grid_scan();
    for (const Point5& seed : top_seeds()) {
      const Point5 refined = nelder_mead(seed);
      consider(refined);
    }
    return finish();
  }

 private:
  double clamp_angle(double v) const { return std::clamp(v, lo_, hi_); }

  static double lerp(double a, double b, int i, int n) {
    if (n <= 1) return a;
    return a + (b - a) * (static_cast<double>(i) / static_cast<double>(n - 1));
  }

  void grid_scan() {
    const int n = opts_.grid_points;
    struct Dir {
      double ux, uy, uz;
    };
    std::vector<Dir> dirs;
    dirs.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    std::vector<double> alphas(static_cast<std::size_t>(n)), betas(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      alphas[static_cast<std::size_t>(i)] = lerp(0.0, kPi, i, n);
      betas[static_cast<std::size_t>(i)] = lerp(0.0, 2.0 * kPi, i, n);
    }
    for (int ia = 0; ia < n; ++ia)
      for (int ib = 0; ib < n; ++ib) {
        const double sa = std::sin(alphas[static_cast<std::size_t>(ia)]);
        dirs.push_back({sa * std::cos(betas[static_cast<std::size_t>(ib)]),
                        sa * std::sin(betas[static_cast<std::size_t>(ib)]),
                        std::cos(alphas[static_cast<std::size_t>(ia)])});
      }

    for (int ip = 0; ip < n; ++ip) {
      const double phi = lerp(lo_, hi_, ip, n);
      for (int iq = 0; iq < n; ++iq) {
        const double psi = lerp(lo_, hi_, iq, n);
        for (int ir = 0; ir < n; ++ir) {
          const double theta = lerp(lo_, hi_, ir, n);
          const QuadCoeffs q = QuadCoeffs::from_angles(phi, psi, theta);
          for (int ia = 0; ia < n; ++ia) {
            for (int ib = 0; ib < n; ++ib) {
              const Dir& d = dirs[static_cast<std::size_t>(n * ia + ib)];
              ++evaluations_;
              double value;
              if (scale_to_box_) {
                const double uinf =
                    std::max({std::abs(d.ux), std::abs(d.uy), std::abs(d.uz)});
                const double f = scale_ / uinf;
                value = q.relative_error(f * d.ux, f * d.uy, f * d.uz);
              } else {
                const double mn = q.magnitude(d.ux, d.uy, d.uz);
                const double mo =
                    std::sqrt(d.ux * d.ux + d.uy * d.uy + d.uz * d.uz);
                value = scale_ * std::abs(1.0 - mo / mn);
              }
              if (!std::isfinite(value)) continue;
              remember(value, {alphas[static_cast<std::size_t>(ia)],
                               betas[static_cast<std::size_t>(ib)], phi, psi, theta});
            }
          }
        }
      }
    }
  }

  void remember(double value, const std::array<double, 5>& x) {
    if (static_cast<int>(top_.size()) < opts_.refine_top) {
      top_.push_back({value, {x}});
      std::push_heap(top_.begin(), top_.end(), heap_greater);
      return;
    }
    if (value > top_.front().first) {
      std::pop_heap(top_.begin(), top_.end(), heap_greater);
      top_.back() = {value, {x}};
      std::push_heap(top_.begin(), top_.end(), heap_greater);
    }
  }

  static bool heap_greater(const std::pair<double, Point5>& a,
                           const std::pair<double, Point5>& b) {
    return a.first > b.first;  // min-heap on value
  }

  std::vector<Point5> top_seeds() {
    std::sort(top_.begin(), top_.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<Point5> seeds;
    seeds.reserve(top_.size());
    for (const auto& [value, point] : top_) {
      consider_value(value, point);
      seeds.push_back(point);
    }
    return seeds;
  }

  // Maximizing Nelder-Mead with the angle box enforced by clamping inside
  // the objective; fully deterministic.
  Point5 nelder_mead(const Point5& start) {
    const int n = opts_.grid_points;
    const std::array<double, 5> step{0.5 * kPi / (n - 1), 0.5 * 2.0 * kPi / (n - 1),
                                     0.5 * (hi_ - lo_) / (n - 1),
                                     0.5 * (hi_ - lo_) / (n - 1),
                                     0.5 * (hi_ - lo_) / (n - 1)};
    std::array<Point5, 6> v;
    std::array<double, 6> f;
    v[0] = start;
    f[0] = objective(v[0]);
    for (int i = 0; i < 5; ++i) {
      v[static_cast<std::size_t>(i + 1)] = start;
      double h = step[static_cast<std::size_t>(i)];
      if (h == 0.0) h = 1e-8;  // degenerate angle box (tol = 0)
      v[static_cast<std::size_t>(i + 1)].x[static_cast<std::size_t>(i)] += h;
      f[static_cast<std::size_t>(i + 1)] = objective(v[static_cast<std::size_t>(i + 1)]);
    }

    std::array<int, 6> order{0, 1, 2, 3, 4, 5};
    for (int it = 0; it < opts_.simplex_max_iter; ++it) {
      std::stable_sort(order.begin(), order.end(),
                       [&](int a, int b) { return f[static_cast<std::size_t>(a)] > f[static_cast<std::size_t>(b)]; });
      const double fbest = f[static_cast<std::size_t>(order[0])];
      const double fworst = f[static_cast<std::size_t>(order[5])];
      if (fbest - fworst < opts_.simplex_tol * std::max(1.0, std::abs(fbest))) break;

      Point5 centroid;
      for (int k = 0; k < 5; ++k) {
        double s = 0.0;
        for (int i = 0; i < 5; ++i)
          s += v[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])].x[static_cast<std::size_t>(k)];
        centroid.x[static_cast<std::size_t>(k)] = s / 5.0;
      }
      const int iw = order[5];
      auto blend = [&](double t) {
        Point5 p;
        for (int k = 0; k < 5; ++k)
          p.x[static_cast<std::size_t>(k)] =
              centroid.x[static_cast<std::size_t>(k)] +
              t * (centroid.x[static_cast<std::size_t>(k)] -
                   v[static_cast<std::size_t>(iw)].x[static_cast<std::size_t>(k)]);
        return p;
      };

      const Point5 reflected = blend(1.0);
      const double fr = objective(reflected);
      if (fr > fbest) {
        const Point5 expanded = blend(2.0);
        const double fe = objective(expanded);
        if (fe > fr) {
          v[static_cast<std::size_t>(iw)] = expanded;
          f[static_cast<std::size_t>(iw)] = fe;
        } else {
          v[static_cast<std::size_t>(iw)] = reflected;
          f[static_cast<std::size_t>(iw)] = fr;
        }
        continue;
      }
      if (fr > f[static_cast<std::size_t>(order[4])]) {
        v[static_cast<std::size_t>(iw)] = reflected;
        f[static_cast<std::size_t>(iw)] = fr;
        continue;
      }
      const Point5 contracted = blend(-0.5);
      const double fc = objective(contracted);
      if (fc > f[static_cast<std::size_t>(iw)]) {
        v[static_cast<std::size_t>(iw)] = contracted;
        f[static_cast<std::size_t>(iw)] = fc;
        continue;
      }
      // Shrink toward the best vertex.
      const Point5& bestv = v[static_cast<std::size_t>(order[0])];
      for (int i = 1; i < 6; ++i) {
        Point5& p = v[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
        for (int k = 0; k < 5; ++k)
          p.x[static_cast<std::size_t>(k)] =
              bestv.x[static_cast<std::size_t>(k)] +
              0.5 * (p.x[static_cast<std::size_t>(k)] - bestv.x[static_cast<std::size_t>(k)]);
        f[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = objective(p);
      }
    }

    int ibest = 0;
    for (int i = 1; i < 6; ++i)
      if (f[static_cast<std::size_t>(i)] > f[static_cast<std::size_t>(ibest)]) ibest = i;
    return v[static_cast<std::size_t>(ibest)];
  }

  void consider(const Point5& p) { consider_value(objective(p), p); }

  void consider_value(double value, const Point5& p) {
    if (value > best_value_) {
      best_value_ = value;
      best_ = p;
    }
  }

  ErrorProblemResult finish() const {
    ErrorProblemResult res;
    const double tol_lo = lo_, tol_hi = hi_;
    const double phi = std::clamp(best_.x[2], tol_lo, tol_hi);
    const double psi = std::clamp(best_.x[3], tol_lo, tol_hi);
    const double theta = std::clamp(best_.x[4], tol_lo, tol_hi);
    res.argmax_angles = AxisAngles(phi, psi, theta, angle_tol_);
    const double sa = std::sin(best_.x[0]);
    Vec3 u{sa * std::cos(best_.x[1]), sa * std::sin(best_.x[1]), std::cos(best_.x[0])};
    if (scale_to_box_) {
      const double uinf = std::max({std::abs(u.x), std::abs(u.y), std::abs(u.z)});
      res.argmax_accel = (scale_ / uinf) * u;
      res.max_value = rel_error(res.argmax_accel, res.argmax_angles);
    } else {
      const double mn = magnitude_nonorth(u, res.argmax_angles);
      res.argmax_accel = (scale_ / mn) * u;
      res.max_value = abs_error(res.argmax_accel, res.argmax_angles);
    }
    res.evaluations = evaluations_;
    return res;
  }

  bool scale_to_box_;
  double scale_;
  double angle_tol_;
  double lo_, hi_;
  SolverOptions opts_;
  std::uint64_t evaluations_ = 0;
  std::vector<std::pair<double, Point5>> top_;
  double best_value_ = -1.0;
  Point5 best_;
};

void check_solver_inputs(double angle_tol, const SolverOptions& opts) {
  if (!std::isfinite(angle_tol) || angle_tol < 0.0 || angle_tol > kMaxAngleTol)
    throw std::invalid_argument("angle tolerance must be in [0, " +
                                std::to_string(kMaxAngleTol) + "]");
  if (opts.grid_points < 2) throw std::invalid_argument("grid_points must be >= 2");
  if (opts.refine_top < 1) throw std::invalid_argument("refine_top must be >= 1");
  if (opts.simplex_max_iter < 0 || !(opts.simplex_tol > 0.0))
    throw std::invalid_argument("invalid simplex options");
}

}  // namespace

double abs_error(const Vec3& measured, const AxisAngles& angles) {
  return std::abs(magnitude_nonorth(measured, angles) - magnitude_orth(measured));
}

double rel_error(const Vec3& measured, const AxisAngles& angles) {
  const double mn = magnitude_nonorth(measured, angles);
  if (mn == 0.0) throw std::domain_error("relative error is undefined at a = 0");
  return std::abs(mn - magnitude_orth(measured)) / mn;
}

AxisAngles default_analysis_angles() { return AxisAngles(1.53938, 1.60221, 1.60221, 0.03); }

ErrorProblemResult solve_problem1(const GravityConstant& g, double angle_tol,
                                  const SolverOptions& options) {
  check_solver_inputs(angle_tol, options);
  ExtremalSearch search(false, g.mps2(), angle_tol, options);
  return search.run();
}

ErrorProblemResult solve_problem2(double box_half_width, double angle_tol,
                                  const SolverOptions& options) {
  check_solver_inputs(angle_tol, options);
  if (!std::isfinite(box_half_width) || box_half_width <= 0.0)
    throw std::invalid_argument("box half-width must be finite and positive");
  ExtremalSearch search(true, box_half_width, angle_tol, options);
  return search.run();
}

namespace {

void check_sampling_inputs(double half_width, std::size_t sample_count) {
  if (!std::isfinite(half_width) || half_width <= 0.0)
    throw std::invalid_argument("box half-width must be finite and positive");
  if (sample_count == 0) throw std::invalid_argument("sample count must be >= 1");
}

// Visits every kept cube sample as (index, x, y, z, rel_error).
template <typename Visit>
std::size_t scan_cube(const AxisAngles& angles, double h, std::size_t n,
                      std::uint64_t seed, Visit&& visit) {
  const QuadCoeffs q = QuadCoeffs::from_angles(angles.phi(), angles.psi(), angles.theta());
  std::size_t kept = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng::uniform(seed, 3 * i, -h, h);
    const double y = rng::uniform(seed, 3 * i + 1, -h, h);
    const double z = rng::uniform(seed, 3 * i + 2, -h, h);
    if (std::sqrt(x * x + y * y + z * z) < 1e-9) continue;
    ++kept;
    visit(x, y, z, q.relative_error(x, y, z));
  }
  return kept;
}

}  // namespace

Histogram histogram(const HistogramSpec& spec) {
  check_sampling_inputs(spec.box_half_width, spec.sample_count);
  if (spec.bin_count == 0) throw std::invalid_argument("bin count must be >= 1");
  if (spec.range && !(spec.range->first < spec.range->second))
    throw std::invalid_argument("histogram range must be increasing");

  std::vector<double> values;
  values.reserve(spec.sample_count);
  Histogram out;
  out.kept_samples = scan_cube(spec.angles, spec.box_half_width, spec.sample_count,
                               spec.seed,
                               [&](double, double, double, double r) { values.push_back(r); });

  double lo = 0.0, hi = 0.0;
  if (spec.range) {
    lo = spec.range->first;
    hi = spec.range->second;
  } else {
    for (double v : values) hi = std::max(hi, v);
    if (!(hi > lo)) hi = lo + 1.0;  // all-zero errors: single left-most bin
  }

  const std::size_t bins = spec.bin_count;
  out.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i)
    out.edges[i] = lo + (hi - lo) * (static_cast<double>(i) / static_cast<double>(bins));
  out.counts.assign(bins, 0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (double v : values) {
    if (v < lo || v > hi) continue;
    double idx = std::floor((v - lo) / width);
    if (idx > static_cast<double>(bins - 1)) idx = static_cast<double>(bins - 1);
    ++out.counts[static_cast<std::size_t>(idx)];
  }
  return out;
}

DomainCloud domain_cloud(double threshold, Comparison comparison,
                         const DomainCloudSpec& spec) {
  check_sampling_inputs(spec.box_half_width, spec.sample_count);
  if (!std::isfinite(threshold) || threshold < 0.0)
    throw std::invalid_argument("threshold must be finite and non-negative");
  if (spec.max_points == 0) throw std::invalid_argument("point budget must be >= 1");

  const auto matches = [&](double r) {
    return comparison == Comparison::kLessEqual ? r <= threshold : r >= threshold;
  };

  DomainCloud out;
  out.threshold = threshold;
  out.comparison = comparison;

  std::size_t matched = 0;
  out.kept_samples = scan_cube(spec.angles, spec.box_half_width, spec.sample_count,
                               spec.seed, [&](double, double, double, double r) {
                                 if (matches(r)) ++matched;
                               });
  out.matched_samples = matched;
  if (matched == 0) return out;

  // Keep every stride-th matching point so the cloud fits the budget.
  const std::size_t stride = (matched + spec.max_points - 1) / spec.max_points;
  out.points.reserve((matched + stride - 1) / stride);
  std::size_t seen = 0;
  scan_cube(spec.angles, spec.box_half_width, spec.sample_count, spec.seed,
            [&](double x, double y, double z, double r) {
              if (!matches(r)) return;
              if (seen % stride == 0) out.points.push_back({{x, y, z}, r});
              ++seen;
            });
  return out;
}

}  // namespace accelcal
