#pragma once

#include "chaosqfi/core.hpp"
#include "chaosqfi/dynamics.hpp"
#include "chaosqfi/models.hpp"
#include "chaosqfi/parallel.hpp"
#include "chaosqfi/predict.hpp"
#include "chaosqfi/spin_algebra.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace chaosqfi {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Point on the unit sphere (classical spin direction).
class SpherePoint {
 public:
  SpherePoint() : v_(0.0, 0.0, 1.0) {}
  explicit SpherePoint(const Vec3& v) : v_(v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw ArgumentError("sphere point needs a non-zero finite vector");
    v_ /= n;
  }
  SpherePoint(double x, double y, double z) : SpherePoint(Vec3(x, y, z)) {}

  static SpherePoint from_angles(double theta, double phi) {
    return SpherePoint(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
  }

  const Vec3& vec() const noexcept { return v_; }
  double x() const noexcept { return v_.x(); }
  double y() const noexcept { return v_.y(); }
  double z() const noexcept { return v_.z(); }

 private:
  Vec3 v_;
};

inline Vec3 unit_axis(Axis a) { return Vec3::Unit(static_cast<int>(a)); }

/// One stage of a stroboscopic map: a rigid rotation, or a torsion rotating
/// about `axis` by strength times the component along that axis.
struct MapStep {
  enum class Kind { Rotation, Torsion } kind;
  Axis axis;
  double value;

  static MapStep rotation(Axis a, double angle) { return {Kind::Rotation, a, angle}; }
  static MapStep torsion(Axis a, double strength) { return {Kind::Torsion, a, strength}; }
};

class ClassicalMap {
 public:
  ClassicalMap() = default;
  explicit ClassicalMap(std::vector<MapStep> steps) : steps_(std::move(steps)) {}

  const std::vector<MapStep>& steps() const noexcept { return steps_; }

  /// Advances p by one kick; if jac is given it is left-multiplied by the step Jacobians.
  Vec3 apply(Vec3 p, Mat3* jac = nullptr) const {
    for (const auto& s : steps_) {
      const Vec3 e = unit_axis(s.axis);
      const double angle = s.kind == MapStep::Kind::Rotation ? s.value : s.value * e.dot(p);
      const Mat3 r = Eigen::AngleAxisd(angle, e).toRotationMatrix();
      p = r * p;
      if (jac) {
        Mat3 j = r;
        if (s.kind == MapStep::Kind::Torsion) j += s.value * e.cross(p) * e.transpose();
        *jac = j * *jac;
      }
    }
    return p / p.norm();
  }

  SpherePoint operator()(const SpherePoint& p) const { return SpherePoint(apply(p.vec())); }

 private:
  std::vector<MapStep> steps_;
};

/// Rotation by A about x followed by torsion C z about z.
inline ClassicalMap kicked_top_classical_map(double a, double c) {
  return ClassicalMap({MapStep::rotation(Axis::X, a), MapStep::torsion(Axis::Z, c)});
}

/// Rotation by p about x, torsion lambda about z, then torsion lambda' about y.
inline ClassicalMap kicked_top_cue_classical_map(double p, double lambda, double lambda_prime) {
  return ClassicalMap(
      {MapStep::rotation(Axis::X, p), MapStep::torsion(Axis::Z, lambda), MapStep::torsion(Axis::Y, lambda_prime)});
}

struct LyapunovResult {
  double lambda_le = 0.0;
  std::size_t iterations = 0;
  std::size_t transient_discard = 0;
  bool converged = false;
  std::string initial_condition;
};

/// Benettin estimate from one tangent vector, projected onto the tangent plane
/// and renormalized every kick.
inline LyapunovResult lyapunov_exponent(const ClassicalMap& map, const SpherePoint& p0, std::size_t n_iter = 10000,
                                        std::size_t n_transient = 1000) {
  if (n_iter < 2) throw ArgumentError("Lyapunov estimate needs at least two iterations");
  Vec3 p = p0.vec();
  for (std::size_t i = 0; i < n_transient; ++i) p = map.apply(p);
  // any tangent direction works; pick one orthogonal to p
  Vec3 t = p.unitOrthogonal();
  double sum = 0.0, half_estimate = 0.0;
  const std::size_t half = n_iter / 2;
  for (std::size_t i = 0; i < n_iter; ++i) {
    Mat3 jac = Mat3::Identity();
    p = map.apply(p, &jac);
    t = jac * t;
    t -= t.dot(p) * p;
    const double g = t.norm();
    if (!(g > 0.0) || !std::isfinite(g)) throw NumericalError("tangent vector collapsed");
    sum += std::log(g);
    t /= g;
    if (i + 1 == half) half_estimate = sum / static_cast<double>(half);
  }
  LyapunovResult r;
  r.iterations = n_iter;
  r.transient_discard = n_transient;
  const double estimate = sum / static_cast<double>(n_iter);
  r.lambda_le = std::max(0.0, estimate);
  r.converged = std::abs(estimate - half_estimate) <= 0.01 * std::max(std::abs(estimate), 0.1);
  char buf[96];
  std::snprintf(buf, sizeof buf, "single orbit from (%.6f, %.6f, %.6f)", p0.x(), p0.y(), p0.z());
  r.initial_condition = buf;
  return r;
}

struct EnsembleLyapunovOptions {
  std::size_t points = 100;
  std::size_t n_iter = 10000;
  std::size_t n_transient = 1000;
  std::uint64_t seed = 1;
};

struct EnsembleLyapunov {
  LyapunovResult median;
  std::vector<double> values;
  std::size_t converged_count = 0;
};

/// Uniformly random point on the sphere.
template <typename Rng>
SpherePoint random_sphere_point(Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), ang(0.0, 2.0 * std::numbers::pi);
  const double z = u(rng), phi = ang(rng);
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  return SpherePoint(s * std::cos(phi), s * std::sin(phi), z);
}

/// Median LE over uniformly random initial points.
inline EnsembleLyapunov ensemble_lyapunov(const ClassicalMap& map, const EnsembleLyapunovOptions& opts = {},
                                          unsigned threads = 1) {
  if (opts.points == 0) throw ArgumentError("ensemble needs at least one initial point");
  std::mt19937_64 rng(opts.seed);
  std::vector<SpherePoint> starts;
  for (std::size_t i = 0; i < opts.points; ++i) starts.push_back(random_sphere_point(rng));
  std::vector<LyapunovResult> results(opts.points);
  parallel_for(opts.points, threads, [&](std::size_t i) {
    results[i] = lyapunov_exponent(map, starts[i], opts.n_iter, opts.n_transient);
  });
  EnsembleLyapunov out;
  for (const auto& r : results) {
    out.values.push_back(r.lambda_le);
    out.converged_count += r.converged ? 1 : 0;
  }
  std::vector<double> sorted = out.values;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  out.median.lambda_le = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  out.median.iterations = opts.n_iter;
  out.median.transient_discard = opts.n_transient;
  out.median.converged = 2 * out.converged_count >= n;
  out.median.initial_condition = "median over " + std::to_string(n) + " uniform random points, seed " +
                                 std::to_string(opts.seed);
  return out;
}

/// Classical LE of the LMG model: positive only in the unstable phase Omega (Omega - 2 xi) < 0.
inline double lmg_lyapunov(double omega, double xi) {
  const double v = omega * (2.0 * xi - omega);
  return v > 0.0 ? std::sqrt(v) : 0.0;
}

// ---------------------------------------------------------------------------
// (A, C) phase diagram of the COE top

struct PhaseDiagramOptions {
  double a_min = 0.0, a_max = 3.0;
  double c_min = 0.0, c_max = 15.0;
  int a_points = 50, c_points = 50;
  int n = 20;
  TimeWindow window{};
  EnsembleLyapunovOptions lyapunov{20, 3000, 500, 1};
  double le_threshold = 0.1;
  double qfi_threshold = 0.8;
};

struct PhaseCell {
  double a = 0.0, c = 0.0;
  double lambda_le = 0.0;
  double qfi_mean = 0.0;
  double qfi_over_prediction = 0.0;
};

struct PhaseDiagram {
  PhaseDiagramOptions options;
  std::vector<PhaseCell> cells;  // A-major order
  double mask_correlation = std::numeric_limits<double>::quiet_NaN();
};

inline double grid_value(double lo, double hi, int points, int i) {
  return points == 1 ? lo : lo + (hi - lo) * i / (points - 1);
}

/// Pearson correlation of two 0/1 masks; NaN when either is constant.
inline double mask_correlation(const std::vector<bool>& a, const std::vector<bool>& b) {
  if (a.size() != b.size() || a.empty()) throw ArgumentError("masks must be non-empty and aligned");
  const double n = static_cast<double>(a.size());
  double sa = 0, sb = 0, sab = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
    sab += a[i] && b[i];
  }
  const double va = sa / n * (1 - sa / n), vb = sb / n * (1 - sb / n);
  if (va <= 0.0 || vb <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (sab / n - sa / n * sb / n) / std::sqrt(va * vb);
}

/// Time-averaged QFI of the COE top from a CSS along -y, averaged over x, y, z.
inline double coe_cell_qfi(double a, double c, int n, const TimeWindow& window) {
  const auto u = floquet_coe(n, a, c);
  const auto spec = diagonalize(u);
  const auto psi0 = coherent_spin_state(n, std::numbers::pi / 2, -std::numbers::pi / 2, Representation::Symmetric);
  const auto trace = time_averaged_qfi(psi0, spec, build_collective_ops(n, Representation::Symmetric), window, 1);
  return (trace.mean[0] + trace.mean[1] + trace.mean[2]) / 3.0;
}

inline PhaseDiagram phase_diagram_scan(const PhaseDiagramOptions& opts, unsigned threads = 1) {
  if (opts.a_points < 10 || opts.c_points < 10) throw ArgumentError("phase diagram grid must be at least 10x10");
  if (!(opts.a_max >= opts.a_min) || !(opts.c_max >= opts.c_min)) throw ArgumentError("invalid parameter range");
  PhaseDiagram out;
  out.options = opts;
  out.cells.resize(static_cast<std::size_t>(opts.a_points) * opts.c_points);
  const double prediction = symmetric_prediction(opts.n);
  parallel_for(out.cells.size(), threads, [&](std::size_t idx) {
    PhaseCell& cell = out.cells[idx];
    cell.a = grid_value(opts.a_min, opts.a_max, opts.a_points, static_cast<int>(idx / opts.c_points));
    cell.c = grid_value(opts.c_min, opts.c_max, opts.c_points, static_cast<int>(idx % opts.c_points));
    cell.lambda_le = ensemble_lyapunov(kicked_top_classical_map(cell.a, cell.c), opts.lyapunov).median.lambda_le;
    cell.qfi_mean = coe_cell_qfi(cell.a, cell.c, opts.n, opts.window);
    cell.qfi_over_prediction = cell.qfi_mean / prediction;
  });
  std::vector<bool> le_mask, qfi_mask;
  for (const auto& c : out.cells) {
    le_mask.push_back(c.lambda_le > opts.le_threshold);
    qfi_mask.push_back(c.qfi_over_prediction > opts.qfi_threshold);
  }
  out.mask_correlation = mask_correlation(le_mask, qfi_mask);
  return out;
}

inline void write_phase_diagram_csv(std::ostream& os, const PhaseDiagram& pd) {
  os << "A,C,lambda_le,qfi_mean,qfi_over_prediction\n";
  char buf[160];
  for (const auto& c : pd.cells) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.12g,%.12g,%.12g\n", c.a, c.c, c.lambda_le, c.qfi_mean,
                  c.qfi_over_prediction);
    os << buf;
  }
}

}  // namespace chaosqfi
