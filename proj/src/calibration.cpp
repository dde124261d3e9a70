#include "accelcal/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "accelcal/geometry.hpp"
#include "accelcal/rng.hpp"

namespace accelcal {

namespace {

constexpr int kNumParams = 9;
constexpr double kConditionLimit = 1e8;
constexpr double kLambdaInit = 1e-3;
constexpr double kLambdaMin = 1e-12;
constexpr double kLambdaMax = 1e12;

using Params9 = std::array<double, kNumParams>;

// Internal parameterization: t = (s1,s2,s3, log b1..b3, w1..w3) with
// angle_k = (pi/2) * (1 + tol * sin(w_k)). The sine transform makes the
// closed angle interval reachable at finite w (sin hits +-1), unlike a
// sigmoid, which matters because real sensors sit close to the band edge.
struct Decoded {
  CalibrationParams params;
};

double angle_from_w(double w, double tol) { return kHalfPi * (1.0 + tol * std::sin(w)); }

Decoded decode(const Params9& t, double tol) {
  Decoded d;
  d.params.shift = {t[0], t[1], t[2]};
  d.params.scale = {std::exp(t[3]), std::exp(t[4]), std::exp(t[5])};
  d.params.angles = AxisAngles(angle_from_w(t[6], tol), angle_from_w(t[7], tol),
                               angle_from_w(t[8], tol), tol);
  return d;
}

struct Problem {
  const PoseDataset* data = nullptr;
  double g = kStandardGravity;
  double angle_tol = kDefaultAngleTol;
  std::vector<double> weights;  // pose multiplicities

  std::size_t size() const { return data->samples.size(); }

  // Residuals in m/s^2; false when the trial parameters produced
  // non-finite values (treated as an infinitely bad step).
  bool residuals_at(const Params9& t, std::vector<double>& out) const {
    const Decoded d = decode(t, angle_tol);
    out.resize(size());
    for (std::size_t i = 0; i < size(); ++i) {
      const RawSample& raw = data->samples[i];
      const Vec3 a{(raw.ax - d.params.shift[0]) / d.params.scale[0],
                   (raw.ay - d.params.shift[1]) / d.params.scale[1],
                   (raw.az - d.params.shift[2]) / d.params.scale[2]};
      const double r = magnitude_nonorth(a, d.params.angles) - g;
      if (!std::isfinite(r)) return false;
      out[i] = r;
    }
    return true;
  }

  bool cost_at(const Params9& t, std::vector<double>& r, double& cost) const {
    if (!residuals_at(t, r)) return false;
    long double acc = 0.0L;
    for (std::size_t i = 0; i < r.size(); ++i)
      acc += static_cast<long double>(weights[i]) * r[i] * r[i];
    cost = static_cast<double>(acc);
    return true;
  }

  // Central-difference Jacobian, step 1e-6 relative per parameter.
  bool jacobian_at(const Params9& t, std::vector<Params9>& jac) const {
    jac.resize(size());
    std::vector<double> rp, rm;
    for (int j = 0; j < kNumParams; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(t[static_cast<std::size_t>(j)]));
      Params9 tp = t, tm = t;
      tp[static_cast<std::size_t>(j)] += h;
      tm[static_cast<std::size_t>(j)] -= h;
      if (!residuals_at(tp, rp) || !residuals_at(tm, rm)) return false;
      for (std::size_t i = 0; i < size(); ++i)
        jac[i][static_cast<std::size_t>(j)] = (rp[i] - rm[i]) / (2.0 * h);
    }
    return true;
  }
};

// Normal-equation pieces accumulated in extended precision so the result is
// independent of pose ordering to double precision.
void accumulate_normal(const Problem& prob, const std::vector<Params9>& jac,
                       const std::vector<double>& r, std::array<long double, 81>& ata,
                       std::array<long double, 9>& atr) {
  ata.fill(0.0L);
  atr.fill(0.0L);
  for (std::size_t i = 0; i < jac.size(); ++i) {
    const long double w = prob.weights[i];
    for (int a = 0; a < kNumParams; ++a) {
      const long double ja = jac[i][static_cast<std::size_t>(a)];
      atr[static_cast<std::size_t>(a)] += w * ja * r[i];
      for (int b = a; b < kNumParams; ++b)
        ata[static_cast<std::size_t>(9 * a + b)] +=
            w * ja * jac[i][static_cast<std::size_t>(b)];
    }
  }
  for (int a = 0; a < kNumParams; ++a)
    for (int b = 0; b < a; ++b)
      ata[static_cast<std::size_t>(9 * a + b)] = ata[static_cast<std::size_t>(9 * b + a)];
}

// Gaussian elimination with partial pivoting for the damped normal equations.
bool solve9(std::array<double, 81> m, Params9 rhs, Params9& out) {
  std::array<int, 9> piv{};
  for (int i = 0; i < 9; ++i) piv[static_cast<std::size_t>(i)] = i;
  for (int col = 0; col < 9; ++col) {
    int best = col;
    double mag = std::abs(m[static_cast<std::size_t>(9 * col + col)]);
    for (int row = col + 1; row < 9; ++row) {
      const double v = std::abs(m[static_cast<std::size_t>(9 * row + col)]);
      if (v > mag) {
        mag = v;
        best = row;
      }
    }
    if (mag == 0.0) return false;
    if (best != col) {
      for (int k = 0; k < 9; ++k)
        std::swap(m[static_cast<std::size_t>(9 * best + k)],
                  m[static_cast<std::size_t>(9 * col + k)]);
      std::swap(rhs[static_cast<std::size_t>(best)], rhs[static_cast<std::size_t>(col)]);
    }
    const double d = m[static_cast<std::size_t>(9 * col + col)];
    for (int row = col + 1; row < 9; ++row) {
      const double f = m[static_cast<std::size_t>(9 * row + col)] / d;
      if (f == 0.0) continue;
      m[static_cast<std::size_t>(9 * row + col)] = 0.0;
      for (int k = col + 1; k < 9; ++k)
        m[static_cast<std::size_t>(9 * row + k)] -= f * m[static_cast<std::size_t>(9 * col + k)];
      rhs[static_cast<std::size_t>(row)] -= f * rhs[static_cast<std::size_t>(col)];
    }
  }
  for (int row = 8; row >= 0; --row) {
    double v = rhs[static_cast<std::size_t>(row)];
    for (int k = row + 1; k < 9; ++k)
      v -= m[static_cast<std::size_t>(9 * row + k)] * out[static_cast<std::size_t>(k)];
    out[static_cast<std::size_t>(row)] = v / m[static_cast<std::size_t>(9 * row + row)];
  }
  for (double v : out)
    if (!std::isfinite(v)) return false;
  return true;
}

// Cyclic Jacobi eigenvalues of a 9x9 symmetric matrix (for conditioning only).
std::array<double, 9> symmetric_eigenvalues(std::array<double, 81> a) {
  for (int sweep = 0; sweep < 50; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < 9; ++p)
      for (int q = p + 1; q < 9; ++q) off += std::abs(a[static_cast<std::size_t>(9 * p + q)]);
    if (off == 0.0) break;
    for (int p = 0; p < 9; ++p) {
      for (int q = p + 1; q < 9; ++q) {
        const double apq = a[static_cast<std::size_t>(9 * p + q)];
        if (apq == 0.0) continue;
        const double app = a[static_cast<std::size_t>(9 * p + p)];
        const double aqq = a[static_cast<std::size_t>(9 * q + q)];
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int k = 0; k < 9; ++k) {
          const double akp = a[static_cast<std::size_t>(9 * k + p)];
          const double akq = a[static_cast<std::size_t>(9 * k + q)];
          a[static_cast<std::size_t>(9 * k + p)] = c * akp - s * akq;
          a[static_cast<std::size_t>(9 * k + q)] = s * akp + c * akq;
        }
        for (int k = 0; k < 9; ++k) {
          const double apk = a[static_cast<std::size_t>(9 * p + k)];
          const double aqk = a[static_cast<std::size_t>(9 * q + k)];
          a[static_cast<std::size_t>(9 * p + k)] = c * apk - s * aqk;
          a[static_cast<std::size_t>(9 * q + k)] = s * apk + c * aqk;
        }
      }
    }
  }
  std::array<double, 9> eig{};
  for (int i = 0; i < 9; ++i) eig[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(9 * i + i)];
  std::sort(eig.begin(), eig.end());
  return eig;
}

double condition_estimate(const Problem& prob, const Params9& t) {
  std::vector<Params9> jac;
  std::vector<double> r;
  if (!prob.jacobian_at(t, jac) || !prob.residuals_at(t, r))
    return std::numeric_limits<double>::infinity();
  std::array<long double, 81> ata{};
  std::array<long double, 9> atr{};
  accumulate_normal(prob, jac, r, ata, atr);
  std::array<double, 81> b{};
  for (std::size_t i = 0; i < 81; ++i) b[i] = static_cast<double>(ata[i]);
  const std::array<double, 9> eig = symmetric_eigenvalues(b);
  const double lo = eig.front(), hi = eig.back();
  if (!(hi > 0.0) || lo <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(hi / lo);  // cond(J) = sqrt(cond(J^T J))
}

Params9 initial_point(const PoseDataset& data, double g) {
  // Shift init: midpoint of raw extremes per axis, but only when the poses
  // include a near-antipodal pair; otherwise the extremes carry no shift
  // information and zero is the safer guess.
  bool antipodal = false;
  const std::size_t n = data.samples.size();
  for (std::size_t i = 0; i < n && !antipodal; ++i) {
    const Vec3 vi{data.samples[i].ax, data.samples[i].ay, data.samples[i].az};
    const double ni = norm(vi);
    if (ni < 1e-12) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec3 vj{data.samples[j].ax, data.samples[j].ay, data.samples[j].az};
      const double nj = norm(vj);
      if (nj < 1e-12) continue;
      if (dot(vi, vj) / (ni * nj) < -0.8) {
        antipodal = true;
        break;
      }
    }
  }
  Vec3 s0{0.0, 0.0, 0.0};
  if (antipodal) {
    Vec3 lo{data.samples[0].ax, data.samples[0].ay, data.samples[0].az};
    Vec3 hi = lo;
    for (const RawSample& smp : data.samples) {
      lo = {std::min(lo.x, smp.ax), std::min(lo.y, smp.ay), std::min(lo.z, smp.az)};
      hi = {std::max(hi.x, smp.ax), std::max(hi.y, smp.ay), std::max(hi.z, smp.az)};
    }
    s0 = 0.5 * (lo + hi);
  }
  double maxn = 0.0;
  for (const RawSample& smp : data.samples)
    maxn = std::max(maxn, norm(Vec3{smp.ax, smp.ay, smp.az} - s0));
  if (!(maxn > 1e-12))
    throw IllPosedDatasetError("poses are numerically indistinguishable from the shift");
  const double b0 = maxn / g;
  return {s0.x, s0.y, s0.z, std::log(b0), std::log(b0), std::log(b0), 0.0, 0.0, 0.0};
}

struct RunResult {
  Params9 t{};
  double cost = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;
};

RunResult run_lm(const Problem& prob, const Params9& t0, const FitOptions& opt) {
  RunResult res;
  res.t = t0;
  std::vector<double> r, r_new;
  double cost;
  if (!prob.cost_at(res.t, r, cost)) return res;  // infinite cost, not converged
  res.cost = cost;
  res.history.push_back(cost);

  double lambda = kLambdaInit;
  std::vector<Params9> jac;
  std::array<long double, 81> ata{};
  std::array<long double, 9> atr{};

  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    if (!prob.jacobian_at(res.t, jac)) break;
    accumulate_normal(prob, jac, r, ata, atr);

    double gmax = 0.0;
    for (int a = 0; a < kNumParams; ++a)
      gmax = std::max(gmax, std::abs(2.0 * static_cast<double>(atr[static_cast<std::size_t>(a)])));
    if (gmax < opt.tolerance) {
      res.converged = true;
      break;
    }

    bool accepted = false;
    Params9 step{};
    while (lambda <= kLambdaMax) {
      std::array<double, 81> m{};
      for (std::size_t i = 0; i < 81; ++i) m[i] = static_cast<double>(ata[i]);
      for (int d = 0; d < 9; ++d) m[static_cast<std::size_t>(9 * d + d)] += lambda;
      Params9 rhs{};
      for (int a = 0; a < kNumParams; ++a)
        rhs[static_cast<std::size_t>(a)] = -static_cast<double>(atr[static_cast<std::size_t>(a)]);
      if (!solve9(m, rhs, step)) {
        lambda *= 10.0;
        continue;
      }
      Params9 t_new = res.t;
      for (int a = 0; a < kNumParams; ++a)
        t_new[static_cast<std::size_t>(a)] += step[static_cast<std::size_t>(a)];
      double cost_new;
      if (prob.cost_at(t_new, r_new, cost_new) && cost_new < res.cost) {
        res.t = t_new;
        res.cost = cost_new;
        r.swap(r_new);
        res.history.push_back(cost_new);
        ++res.iterations;
        lambda = std::max(kLambdaMin, lambda * 0.1);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }

    double smax = 0.0;
    for (double v : step) smax = std::max(smax, std::abs(v));
    if (accepted) {
      if (smax < opt.tolerance) {
        res.converged = true;
        break;
      }
    } else {
      // Damping exhausted: no direction improves the objective at floating
      // point resolution. A vanishing attempted step means we are at a
      // numerical stationary point.
      res.converged = smax < opt.tolerance;
      break;
    }
  }
  return res;
}

}  // namespace

std::vector<double> residuals(const PoseDataset& dataset, const CalibrationParams& params,
                              const GravityConstant& g) {
  if (dataset.samples.empty()) throw std::invalid_argument("dataset is empty");
  validate(params);
  std::vector<double> out;
  out.reserve(dataset.samples.size());
  for (const RawSample& raw : dataset.samples) {
    const Vec3 a{(raw.ax - params.shift[0]) / params.scale[0],
                 (raw.ay - params.shift[1]) / params.scale[1],
                 (raw.az - params.shift[2]) / params.scale[2]};
    out.push_back(magnitude_nonorth(a, params.angles) - g.mps2());
  }
  return out;
}

FitReport fit(const PoseDataset& dataset, const GravityConstant& g,
              const FitOptions& options) {
  if (dataset.samples.size() < 9)
    throw std::invalid_argument("fit needs at least 9 poses, got " +
                                std::to_string(dataset.samples.size()));
  for (const RawSample& s : dataset.samples)
    if (!std::isfinite(s.ax) || !std::isfinite(s.ay) || !std::isfinite(s.az))
      throw std::invalid_argument("dataset contains non-finite readings");
  if (!dataset.counts.empty() && dataset.counts.size() != dataset.samples.size())
    throw std::invalid_argument("counts must be empty or match the sample count");
  for (std::size_t c : dataset.counts)
    if (c == 0) throw std::invalid_argument("per-pose counts must be >= 1");
  if (options.max_iterations < 1 || options.restarts < 1)
    throw std::invalid_argument("max_iterations and restarts must be >= 1");
  if (!(options.tolerance > 0.0))
    throw std::invalid_argument("tolerance must be positive");
  if (!(options.angle_tolerance > 0.0) || options.angle_tolerance > kMaxAngleTol)
    throw std::invalid_argument("angle tolerance must be in (0, " +
                                std::to_string(kMaxAngleTol) + "]");

  Problem prob;
  prob.data = &dataset;
  prob.g = g.mps2();
  prob.angle_tol = options.angle_tolerance;
  prob.weights.assign(dataset.samples.size(), 1.0);
  if (!dataset.counts.empty())
    for (std::size_t i = 0; i < dataset.counts.size(); ++i)
      prob.weights[i] = static_cast<double>(dataset.counts[i]);

  const Params9 t0 = initial_point(dataset, prob.g);
  const double cond = condition_estimate(prob, t0);
  if (!(cond < kConditionLimit))
    throw IllPosedDatasetError(
        "dataset does not identify the nine parameters (Jacobian condition ~" +
        std::to_string(cond) + ")");

  RunResult best;
  for (int k = 0; k < options.restarts; ++k) {
    Params9 tk = t0;
    if (k > 0) {
      // Deterministic jitter per restart index; scales chosen relative to
      // the raw data magnitude for shifts.
      const double sscale = 0.01 * prob.g * std::exp(t0[3]);
      const rng::GaussPair j01 = rng::gauss_pair(options.seed, 4 * static_cast<std::uint64_t>(k));
      const rng::GaussPair j23 = rng::gauss_pair(options.seed, 4 * static_cast<std::uint64_t>(k) + 1);
      const rng::GaussPair j45 = rng::gauss_pair(options.seed, 4 * static_cast<std::uint64_t>(k) + 2);
      const rng::GaussPair j67 = rng::gauss_pair(options.seed, 4 * static_cast<std::uint64_t>(k) + 3);
      tk[0] += sscale * j01.first;
      tk[1] += sscale * j01.second;
      tk[2] += sscale * j23.first;
      tk[3] += 0.01 * j23.second;
      tk[4] += 0.01 * j45.first;
      tk[5] += 0.01 * j45.second;
      tk[6] += 0.1 * j67.first;
      tk[7] += 0.1 * j67.second;
      tk[8] += 0.1 * rng::gauss_pair(options.seed, 4 * static_cast<std::uint64_t>(k) + 100000).first;
    }
    RunResult run = run_lm(prob, tk, options);
    if (run.cost < best.cost) best = run;  // strict: ties keep the lower index
  }

  FitReport report;
  report.params = decode(best.t, options.angle_tolerance).params;
  report.iterations = best.iterations;
  report.converged = best.converged;
  report.objective_history = std::move(best.history);
  report.per_pose_residuals = residuals(dataset, report.params, g);
  long double acc = 0.0L;
  for (double r : report.per_pose_residuals) acc += static_cast<long double>(r) * r;
  report.residual_rms = std::sqrt(static_cast<double>(
      acc / static_cast<long double>(report.per_pose_residuals.size())));
  return report;
}

}  // namespace accelcal
