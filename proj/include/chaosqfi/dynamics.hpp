#pragma once

#include "chaosqfi/core.hpp"
#include "chaosqfi/parallel.hpp"
#include "chaosqfi/spectral.hpp"
#include "chaosqfi/spin_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace chaosqfi {

/// Overlaps a_m = <b_m | psi0> with the eigenvectors of a spectral decomposition.
struct SpectralCoefficients {
  Vector a;

  static SpectralCoefficients of(const StateVector& psi0, const SpectralDecomposition& spec) {
    require_same_basis(psi0.basis(), spec.basis, "spectral_coefficients");
    SpectralCoefficients c{spec.vectors.adjoint() * psi0.amplitudes()};
    if (std::abs(c.a.squaredNorm() - 1.0) > 1e-10) throw NumericalError("eigenbasis is not complete for this state");
    return c;
  }
};

/// |psi(t)> = sum_m a_m e^{-i w_m t} |b_m>; for Floquet operators t is the kick count.
inline std::vector<StateVector> evolve(const StateVector& psi0, const SpectralDecomposition& spec,
                                       const std::vector<double>& times) {
  const auto coeffs = SpectralCoefficients::of(psi0, spec);
  const RealVector w = spec.frequencies();
  std::vector<StateVector> out;
  out.reserve(times.size());
  for (double t : times) {
    if (t == 0.0) {
      out.push_back(psi0);
      continue;
    }
    Vector c(coeffs.a.size());
    for (Index m = 0; m < c.size(); ++m) c(m) = coeffs.a(m) * std::polar(1.0, -w(m) * t);
    out.push_back(StateVector::normalized(spec.vectors * c, spec.basis));
  }
  return out;
}

inline StateVector evolve(const StateVector& psi0, const SpectralDecomposition& spec, double t) {
  return evolve(psi0, spec, std::vector<double>{t}).front();
}

/// Pure-state QFI 4 (<O^2> - <O>^2), clamped at zero against roundoff.
inline double qfi_pure(const StateVector& psi, const Operator& op) {
  if (!op.is_hermitian()) throw ArgumentError("QFI generator must be Hermitian");
  require_same_basis(psi.basis(), op.basis(), "qfi_pure");
  const Vector y = op.matrix() * psi.amplitudes();
  const double mean = psi.amplitudes().dot(y).real();
  const double second = y.squaredNorm();
  return std::max(0.0, 4.0 * (second - mean * mean));
}

/// QFI of the trajectory for each operator at each time; result[k][t].
///
/// Works in the eigenbasis: with c_t = a * e^{-i w t} and O' = V^dagger O V,
/// <O> = c_t^dagger O' c_t and <O^2> = |O' c_t|^2.
inline std::vector<std::vector<double>> qfi_series(const StateVector& psi0, const SpectralDecomposition& spec,
                                                   const std::vector<Operator>& ops,
                                                   const std::vector<double>& times, unsigned threads = 1) {
  const auto coeffs = SpectralCoefficients::of(psi0, spec);
  const RealVector w = spec.frequencies();
  std::vector<Matrix> rotated;
  rotated.reserve(ops.size());
  for (const auto& op : ops) {
    if (!op.is_hermitian()) throw ArgumentError("QFI generator must be Hermitian");
    require_same_basis(op.basis(), spec.basis, "qfi_series");
    rotated.push_back(spec.to_eigenbasis(op.matrix()));
  }
  std::vector<std::vector<double>> out(ops.size(), std::vector<double>(times.size()));
  constexpr std::size_t chunk = 128;
  const std::size_t chunks = (times.size() + chunk - 1) / chunk;
  const Index dim = coeffs.a.size();
  parallel_for(chunks, threads, [&](std::size_t ci) {
    const std::size_t begin = ci * chunk;
    const std::size_t end = std::min(times.size(), begin + chunk);
    Matrix c(dim, static_cast<Index>(end - begin));
    for (std::size_t t = begin; t < end; ++t)
      for (Index m = 0; m < dim; ++m) c(m, static_cast<Index>(t - begin)) = coeffs.a(m) * std::polar(1.0, -w(m) * times[t]);
    for (std::size_t k = 0; k < ops.size(); ++k) {
      const Matrix y = rotated[k] * c;
      for (std::size_t t = begin; t < end; ++t) {
        const Index col = static_cast<Index>(t - begin);
        const double mean = c.col(col).dot(y.col(col)).real();
        const double second = y.col(col).squaredNorm();
        out[k][t] = std::max(0.0, 4.0 * (second - mean * mean));
      }
    }
  });
  return out;
}

/// Sampling grid for time averages: t_start, t_start + step, ..., <= t_end.
struct TimeWindow {
  double t_start = 200.0;
  double t_end = 2000.0;
  double step = 1.0;
  /// Scrambling-time estimate the window must start after, when known.
  std::optional<double> t_star;

  std::vector<double> times() const {
    if (!(step > 0.0)) throw ArgumentError("time step must be positive");
    if (t_end < t_start) throw ArgumentError("empty averaging window");
    std::vector<double> t;
    const auto count = static_cast<std::size_t>(std::floor((t_end - t_start) / step + 1e-9)) + 1;
    t.reserve(count);
    for (std::size_t i = 0; i < count; ++i) t.push_back(t_start + static_cast<double>(i) * step);
    return t;
  }
};

/// QFI time series over an averaging window plus per-operator statistics.
struct QfiTrace {
  std::vector<double> times;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> qfi;
  double window_start = 0.0;
  double window_end = 0.0;
  std::optional<double> t_star;
  std::vector<double> mean;
  std::vector<double> stddev;

  std::size_t index_of(const std::string& label) const {
    const auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) throw ArgumentError("trace has no series '" + label + "'");
    return static_cast<std::size_t>(it - labels.begin());
  }
};

inline void fill_statistics(QfiTrace& trace) {
  trace.mean.assign(trace.qfi.size(), 0.0);
  trace.stddev.assign(trace.qfi.size(), 0.0);
  for (std::size_t k = 0; k < trace.qfi.size(); ++k) {
    double sum = 0.0, sumsq = 0.0, count = 0.0;
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
      if (trace.times[i] < trace.window_start || trace.times[i] > trace.window_end) continue;
      sum += trace.qfi[k][i];
      sumsq += trace.qfi[k][i] * trace.qfi[k][i];
      count += 1.0;
    }
    if (count == 0.0) throw ArgumentError("empty averaging window");
    trace.mean[k] = sum / count;
    trace.stddev[k] = std::sqrt(std::max(0.0, sumsq / count - trace.mean[k] * trace.mean[k]));
  }
}

/// Time-averaged QFI over the window for each generator.
inline QfiTrace time_averaged_qfi(const StateVector& psi0, const SpectralDecomposition& spec,
                                  const std::vector<Operator>& ops, const std::vector<std::string>& labels,
                                  const TimeWindow& window, unsigned threads = 1) {
  if (labels.size() != ops.size()) throw ArgumentError("one label per operator required");
  if (window.t_star && window.t_start < *window.t_star)
    throw ArgumentError("averaging window starts before the scrambling time estimate");
  QfiTrace trace;
  trace.times = window.times();
  if (trace.times.empty()) throw ArgumentError("empty averaging window");
  trace.labels = labels;
  trace.window_start = window.t_start;
  trace.window_end = window.t_end;
  trace.t_star = window.t_star;
  trace.qfi = qfi_series(psi0, spec, ops, trace.times, threads);
  fill_statistics(trace);
  return trace;
}

inline QfiTrace time_averaged_qfi(const StateVector& psi0, const SpectralDecomposition& spec, const CollectiveOps& j,
                                  const TimeWindow& window, unsigned threads = 1) {
  return time_averaged_qfi(psi0, spec, {j.x, j.y, j.z}, {"x", "y", "z"}, window, threads);
}

/// CSV with columns time, qfi_x, qfi_y, qfi_z; axes absent from the trace are written as nan.
inline void write_qfi_csv(std::ostream& os, const QfiTrace& trace) {
  os << "time,qfi_x,qfi_y,qfi_z\n";
  std::vector<std::optional<std::size_t>> cols;
  for (const char* name : {"x", "y", "z"}) {
    const auto it = std::find(trace.labels.begin(), trace.labels.end(), name);
    cols.push_back(it == trace.labels.end() ? std::nullopt
                                            : std::optional<std::size_t>(static_cast<std::size_t>(it - trace.labels.begin())));
  }
  char buf[64];
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.10g", trace.times[i]);
    os << buf;
    for (const auto& c : cols) {
      if (c) {
        std::snprintf(buf, sizeof buf, ",%.12g", trace.qfi[*c][i]);
        os << buf;
      } else {
        os << ",nan";
      }
    }
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// Fidelity OTOC

/// |<psi(t)| e^{i theta O} |psi(t)>|^2 for a Hermitian generator, via O's eigenbasis.
class RotationFidelity {
public:
  explicit RotationFidelity(const Operator& op) : basis_(op.basis()) {
    if (!op.is_hermitian()) throw ArgumentError("rotation generator must be Hermitian");
    auto sd = diagonalize_hermitian(op.matrix(), op.basis());
    values_ = std::move(sd.values);
    vectors_ = std::move(sd.vectors);
  }

  /// Squared amplitudes of psi on the generator's eigenvectors.
  RealVector weights(const StateVector& psi) const {
    require_same_basis(psi.basis(), basis_, "RotationFidelity");
    return (vectors_.adjoint() * psi.amplitudes()).cwiseAbs2();
  }

  double operator()(const RealVector& weights, double theta) const {
    Complex acc = 0.0;
    for (Index k = 0; k < weights.size(); ++k) acc += weights(k) * std::polar(1.0, theta * values_(k));
    return std::min(1.0, std::norm(acc));
  }

  double operator()(const StateVector& psi, double theta) const { return (*this)(weights(psi), theta); }

private:
  BasisDescriptor basis_;
  RealVector values_;
  Matrix vectors_;
};

/// Pure-state fidelity OTOC |<psi0| U^dagger(t) e^{i theta O} U(t) |psi0>|^2.
inline double fidelity_otoc(const StateVector& psi0, const SpectralDecomposition& spec, const Operator& op,
                            double theta, double t) {
  return RotationFidelity(op)(evolve(psi0, spec, t), theta);
}

/// -2 times the central second difference of the fidelity OTOC in theta at theta = 0.
inline double fidelity_curvature(const StateVector& psi0, const SpectralDecomposition& spec, const Operator& op,
                                 double t, double step = 1e-3) {
  const RotationFidelity fid(op);
  const auto w = fid.weights(evolve(psi0, spec, t));
  const double second = (fid(w, step) - 2.0 * fid(w, 0.0) + fid(w, -step)) / (step * step);
  return -2.0 * second;
}

// ---------------------------------------------------------------------------
// Krylov dimension

struct KrylovOptions {
  double tol = 1e-10;
  /// Eigenvalues (or phases) closer than this belong to one eigenspace.
  double merge_tol = 1e-8;
};

/// Groups of consecutive sorted eigenvalues closer than merge_tol; phases wrap around at +-pi.
inline std::vector<std::vector<Index>> eigenspace_clusters(const SpectralDecomposition& spec, double merge_tol) {
  std::vector<std::vector<Index>> clusters;
  const Index dim = spec.dimension();
  for (Index i = 0; i < dim; ++i) {
    if (i > 0 && spec.values(i) - spec.values(i - 1) <= merge_tol)
      clusters.back().push_back(i);
    else
      clusters.push_back({i});
  }
  if (spec.kind == OperatorKind::Unitary && clusters.size() > 1) {
    const double wrap = spec.values(0) + 2.0 * std::numbers::pi - spec.values(dim - 1);
    if (wrap <= merge_tol) {
      auto& last = clusters.back();
      clusters.front().insert(clusters.front().begin(), last.begin(), last.end());
      clusters.pop_back();
    }
  }
  return clusters;
}

/// Number of distinct eigenspaces carrying weight above tol^2.
inline Index krylov_dimension(const SpectralDecomposition& spec, const StateVector& psi0,
                              const KrylovOptions& opts = {}) {
  const auto coeffs = SpectralCoefficients::of(psi0, spec);
  Index count = 0;
  for (const auto& cluster : eigenspace_clusters(spec, opts.merge_tol)) {
    double weight = 0.0;
    for (Index m : cluster) weight += std::norm(coeffs.a(m));
    if (weight > opts.tol * opts.tol) ++count;
  }
  return count;
}

/// For a Floquet operator this uses H = i ln U through its eigenphases.
inline Index krylov_dimension(const Operator& h, const StateVector& psi0, const KrylovOptions& opts = {}) {
  return krylov_dimension(diagonalize(h), psi0, opts);
}

/// Length of the Arnoldi chain psi0, M psi0, M^2 psi0, ... with two-pass full
/// reorthogonalization; stops when the new residual falls below tol * |M|_F / sqrt(dim).
/// Roundoff outside the true Krylov space is amplified along long chains, so this
/// is a cross-check for short chains only; krylov_dimension is authoritative.
inline Index krylov_chain_dimension(const Matrix& m, const Vector& psi0, double tol = 1e-10) {
  const Index dim = m.rows();
  const double scale = std::max(1.0, m.norm() / std::sqrt(static_cast<double>(dim)));
  Matrix q(dim, dim);
  q.col(0) = psi0.normalized();
  Index k = 1;
  for (; k < dim; ++k) {
    Vector v = m * q.col(k - 1);
    for (int pass = 0; pass < 2; ++pass) v -= q.leftCols(k) * (q.leftCols(k).adjoint() * v);
    const double r = v.norm();
    if (r < tol * scale) break;
    q.col(k) = v / r;
  }
  return k;
}

// ---------------------------------------------------------------------------
// Scrambling time and growth rate

struct TStarOptions {
  double rel_tol = 0.05;
  std::size_t min_window = 10;
};

struct TStarEstimate {
  bool conclusive = false;
  std::size_t index = 0;
  double time = std::numeric_limits<double>::quiet_NaN();
};

/// Earliest sample s such that the running mean from s changes by less than
/// rel_tol when its window doubles (w -> 2w, w = max(s, min_window)) and also
/// agrees with the mean over the whole remaining series.
inline TStarEstimate estimate_t_star(const std::vector<double>& times, const std::vector<double>& values,
                                     const TStarOptions& opts = {}) {
  if (times.size() != values.size()) throw ArgumentError("times and values differ in length");
  const std::size_t n = values.size();
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + values[i];
  auto mean = [&](std::size_t a, std::size_t b) { return (prefix[b] - prefix[a]) / static_cast<double>(b - a); };
  auto close = [&](double x, double y) {
    const double s = std::max(std::abs(x), std::abs(y));
    return s == 0.0 || std::abs(x - y) <= opts.rel_tol * s;
  };
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t w = std::max(s, opts.min_window);
    if (s + 2 * w > n) break;
    const double m1 = mean(s, s + w);
    const double m2 = mean(s, s + 2 * w);
    const double tail = mean(s, n);
    if (close(m1, m2) && close(m1, tail) && close(m2, tail)) return {true, s, times[s]};
  }
  return {};
}

struct GrowthFitOptions {
  /// Lower edge of the fitted QFI range; by default max(1, 2 F(0)).
  std::optional<double> floor;
  /// Upper edge as a fraction of the series maximum.
  double ceiling_fraction = 0.1;
};

struct GrowthFit {
  bool valid = false;
  double rate = 0.0;
  double intercept = 0.0;
  double t_begin = 0.0;
  double t_end = 0.0;
  std::size_t points = 0;
};

/// Least-squares slope of log F(t) over the pre-plateau growth segment:
/// samples before the global maximum with floor < F <= ceiling_fraction * max F.
inline GrowthFit fit_growth_rate(const std::vector<double>& times, const std::vector<double>& values,
                                 const GrowthFitOptions& opts = {}) {
  if (times.size() != values.size() || times.empty()) throw ArgumentError("growth fit needs a non-empty series");
  const auto peak = static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
  const double ceiling = opts.ceiling_fraction * values[peak];
  const double floor = opts.floor.value_or(std::max(1.0, 2.0 * values.front()));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  GrowthFit fit;
  bool started = false;
  for (std::size_t i = 0; i < peak; ++i) {
    if (values[i] <= floor) {
      if (started) break;
      continue;
    }
    if (values[i] > ceiling) {
      if (started) break;
      continue;
    }
    if (!started) fit.t_begin = times[i];
    started = true;
    fit.t_end = times[i];
    const double y = std::log(values[i]);
    sx += times[i];
    sy += y;
    sxx += times[i] * times[i];
    sxy += times[i] * y;
    ++fit.points;
  }
  if (fit.points < 3) return fit;
  const double n = static_cast<double>(fit.points);
  const double denom = n * sxx - sx * sx;
  if (denom <= 0.0) return fit;
  fit.rate = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.rate * sx) / n;
  fit.valid = true;
  return fit;
}

}  // namespace chaosqfi
