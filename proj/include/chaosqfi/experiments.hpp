#pragma once

#include "chaosqfi/classical.hpp"
#include "chaosqfi/core.hpp"
#include "chaosqfi/dynamics.hpp"
#include "chaosqfi/models.hpp"
#include "chaosqfi/predict.hpp"
#include "chaosqfi/rmt.hpp"
#include "chaosqfi/spectral.hpp"
#include "chaosqfi/spin_algebra.hpp"
#include "chaosqfi/wigner.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace chaosqfi {

/// CSS along -z for LMG (the unstable point) and along -y otherwise.
inline StateVector default_initial_state(ModelKind k, int n, const CapacityLimits& caps = {}) {
  if (k == ModelKind::LMG) return coherent_spin_state(n, std::numbers::pi, 0.0, Representation::Symmetric, caps);
  return coherent_spin_state(n, std::numbers::pi / 2, -std::numbers::pi / 2, model_representation(k), caps);
}

// ---------------------------------------------------------------------------
// Sector selection: "none", "auto", or "<reflection|parity|flip>-<even|odd|pooled>"

struct SectorChoice {
  std::optional<Symmetry> symmetry;
  std::vector<int> eigenvalues;  // one entry, or both for pooled statistics

  std::string label() const {
    if (!symmetry) return "none";
    const std::string base = *symmetry == Symmetry::BitReversal ? "reflection"
                             : *symmetry == Symmetry::Parity    ? "parity"
                                                                : "flip";
    if (eigenvalues.size() == 2) return base + "-pooled";
    return base + (eigenvalues.front() > 0 ? "-even" : "-odd");
  }
};

inline SectorChoice parse_sector(const std::string& s) {
  if (s == "none") return {};
  const auto dash = s.find('-');
  if (dash == std::string::npos) throw ArgumentError("invalid sector '" + s + "'");
  const std::string sym = s.substr(0, dash), which = s.substr(dash + 1);
  SectorChoice c;
  if (sym == "reflection") c.symmetry = Symmetry::BitReversal;
  else if (sym == "parity") c.symmetry = Symmetry::Parity;
  else if (sym == "flip") c.symmetry = Symmetry::SpinFlip;
  else throw ArgumentError("invalid sector symmetry '" + sym + "'");
  if (which == "even") c.eigenvalues = {1};
  else if (which == "odd") c.eigenvalues = {-1};
  else if (which == "pooled") c.eigenvalues = {1, -1};
  else throw ArgumentError("invalid sector '" + s + "' (expected even, odd or pooled)");
  return c;
}

/// Level statistics default: both spin-flip sectors of the COE/CUE tops,
/// Kramers doublets for CSE, the reflection-even block of the Ising chain and
/// both parity blocks of LMG.
inline std::string default_levels_sector(ModelKind k) {
  switch (k) {
    case ModelKind::KickedTopCOE:
    case ModelKind::KickedTopCUE: return "flip-pooled";
    case ModelKind::KickedTopCSE: return "none";
    case ModelKind::ChaoticIsing: return "reflection-even";
    case ModelKind::LMG: return "parity-pooled";
  }
  return "none";
}

inline std::string default_evolve_sector(ModelKind k) {
  return k == ModelKind::ChaoticIsing ? "reflection-even" : "none";
}

inline SectorChoice resolve_sector(const std::string& s, std::string (*fallback)(ModelKind), ModelKind k) {
  return parse_sector(s == "auto" ? fallback(k) : s);
}

// ---------------------------------------------------------------------------
// Level statistics

struct LevelsOptions {
  std::string sector = "auto";
  UnfoldOptions unfold{};
  double kramers_merge_tol = 1e-8;
  double accept_threshold = 0.1;
  int bins = 60;
  double hist_max = 4.0;
};

struct LevelsResult {
  SpacingSample sample;
  SpacingTestResult test;
  std::vector<HistogramBin> histogram;
  std::string sector;
  std::vector<Index> sector_dimensions;
};

inline SpacingSample block_spacings(const Operator& op, ModelKind k, const LevelsOptions& opts) {
  const auto spec = diagonalize(op);
  if (is_floquet(k)) return quasi_energy_spacings(spec, k == ModelKind::KickedTopCSE, opts.kramers_merge_tol);
  return unfold_spectrum(std::vector<double>(spec.values.data(), spec.values.data() + spec.values.size()), opts.unfold);
}

inline LevelsResult run_levels(const ModelSpec& spec, const LevelsOptions& opts = {}, const CapacityLimits& caps = {}) {
  const Operator op = build_model(spec, caps);
  const SectorChoice choice = resolve_sector(opts.sector, default_levels_sector, spec.model);
  LevelsResult r;
  r.sector = choice.label();
  std::vector<SpacingSample> parts;
  if (!choice.symmetry) {
    parts.push_back(block_spacings(op, spec.model, opts));
    r.sector_dimensions.push_back(op.dimension());
  } else {
    for (int ev : choice.eigenvalues) {
      const auto proj = symmetry_sector(op, *choice.symmetry, ev);
      parts.push_back(block_spacings(proj.block, spec.model, opts));
      r.sector_dimensions.push_back(proj.block.dimension());
    }
  }
  r.sample = parts.size() == 1 ? parts.front() : SpacingSample::pooled(parts, parts.front().source);
  r.sample.source = std::string(to_string(spec.model)) + " N=" + std::to_string(spec.n) + ", sector " + r.sector +
                    ", " + parts.front().source;
  r.test = spacing_test(r.sample, opts.accept_threshold);
  r.histogram = spacing_histogram(r.sample, r.test.best, opts.bins, 0.0, opts.hist_max);
  return r;
}

// ---------------------------------------------------------------------------
// QFI evolution

struct EvolveOptions {
  TimeWindow window{};
  /// Sampling step before the averaging window (kicks are always integer).
  double early_step = 1.0;
  std::string sector = "auto";
  std::vector<Axis> axes{Axis::X, Axis::Y, Axis::Z};
  GrowthFitOptions growth{};
};

inline EvolveOptions default_evolve_options(ModelKind k) {
  EvolveOptions o;
  switch (k) {
    case ModelKind::ChaoticIsing:
      o.window = {10.0, 500.0, 0.5, std::nullopt};
      o.early_step = 0.05;
      break;
    case ModelKind::LMG:
      o.window = {10.0, 1000.0, 0.125, std::nullopt};
      o.early_step = 0.01;
      break;
    default: break;
  }
  return o;
}

struct EvolveResult {
  QfiTrace trace;
  double prediction = 0.0;
  std::vector<GrowthFit> growth;  // per axis in trace order
  std::string sector;
  Index dimension = 0;
};

inline std::vector<double> evolution_times(const EvolveOptions& o) {
  if (!(o.early_step > 0.0)) throw ArgumentError("early sampling step must be positive");
  std::vector<double> t;
  for (std::size_t i = 0;; ++i) {
    const double ti = static_cast<double>(i) * o.early_step;
    if (ti >= o.window.t_start - 1e-12) break;
    t.push_back(ti);
  }
  const auto w = o.window.times();
  t.insert(t.end(), w.begin(), w.end());
  return t;
}

inline EvolveResult run_qfi_evolve(const ModelSpec& spec, const EvolveOptions& opts, unsigned threads = 1,
                                   const CapacityLimits& caps = {}) {
  if (opts.axes.empty()) throw ArgumentError("no QFI axes requested");
  if (is_floquet(spec.model) && (opts.early_step != std::floor(opts.early_step) ||
                                 opts.window.step != std::floor(opts.window.step) ||
                                 opts.window.t_start != std::floor(opts.window.t_start)))
    throw ArgumentError("Floquet evolution is sampled at integer kick counts");
  Operator h = build_model(spec, caps);
  StateVector psi = default_initial_state(spec.model, spec.n, caps);
  const auto j = build_collective_ops(spec.n, model_representation(spec.model), caps);
  std::vector<Operator> ops;
  std::vector<std::string> labels;
  for (Axis a : opts.axes) {
    ops.push_back(j[a]);
    labels.emplace_back(1, axis_name(a));
  }
  const SectorChoice choice = resolve_sector(opts.sector, default_evolve_sector, spec.model);
  EvolveResult r;
  r.sector = choice.label();
  if (choice.symmetry) {
    if (choice.eigenvalues.size() != 1) throw ArgumentError("QFI evolution needs a single sector");
    auto proj = symmetry_sector(h, *choice.symmetry, choice.eigenvalues.front());
    const double weight = proj.sector.weight(psi);
    if (std::abs(weight - 1.0) > 1e-10) throw ArgumentError("initial state is not contained in sector " + r.sector);
    psi = proj.sector.project(psi);
    for (auto& o : ops) o = proj.sector.project(o);
    h = std::move(proj.block);
  }
  r.dimension = h.dimension();
  const auto sd = diagonalize(h);
  r.trace.times = evolution_times(opts);
  r.trace.labels = labels;
  r.trace.window_start = opts.window.t_start;
  r.trace.window_end = opts.window.t_end;
  r.trace.t_star = opts.window.t_star;
  r.trace.qfi = qfi_series(psi, sd, ops, r.trace.times, threads);
  fill_statistics(r.trace);
  r.prediction = model_representation(spec.model) == Representation::Full ? full_space_prediction(spec.n)
                                                                          : symmetric_prediction(spec.n);
  for (const auto& series : r.trace.qfi) r.growth.push_back(fit_growth_rate(r.trace.times, series, opts.growth));
  return r;
}

// ---------------------------------------------------------------------------
// Scaling sweep

struct PowerLawFit {
  double prefactor = 0.0;
  double exponent = 0.0;
};

/// Least-squares line through (log x, log y).
inline PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ArgumentError("power-law fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw NumericalError("power-law fit needs positive data");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (!(std::abs(den) > 0.0)) throw ArgumentError("power-law fit needs at least two distinct sizes");
  const double slope = (n * sxy - sx * sy) / den;
  return {std::exp((sy - slope * sx) / n), slope};
}

struct ScalingPoint {
  int n = 0;
  std::vector<double> mean;
  std::vector<double> stddev;
  double prediction = 0.0;
};

struct ScalingResult {
  std::vector<std::string> labels;
  std::vector<ScalingPoint> points;
  std::vector<PowerLawFit> fits;  // per axis
};

inline ScalingResult run_scaling_sweep(ModelKind model, const std::vector<int>& sizes,
                                       const std::map<std::string, double>& params, const EvolveOptions& opts,
                                       unsigned threads = 1, const CapacityLimits& caps = {}) {
  if (sizes.size() < 2) throw ArgumentError("scaling sweep needs at least two sizes");
  ScalingResult out;
  for (int n : sizes) {
    const auto r = run_qfi_evolve(ModelSpec{model, n, params}, opts, threads, caps);
    out.labels = r.trace.labels;
    out.points.push_back({n, r.trace.mean, r.trace.stddev, r.prediction});
  }
  for (std::size_t k = 0; k < out.labels.size(); ++k) {
    std::vector<double> x, y;
    for (const auto& p : out.points) {
      x.push_back(p.n);
      y.push_back(p.mean[k]);
    }
    out.fits.push_back(fit_power_law(x, y));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random-state QFI

struct RandomQfiResult {
  Index K = 0;
  Ensemble ensemble = Ensemble::CUE;
  MonteCarloEstimate estimate;
  double exact = 0.0;
  double universal = 0.0;
};

/// Monte-Carlo QFI of Jz over random states in the K = N + 1 symmetric space.
inline RandomQfiResult run_random_qfi(Index k, Ensemble e, std::size_t samples, std::uint64_t seed,
                                      unsigned threads = 1) {
  if (k < 2) throw ArgumentError("random QFI needs K >= 2");
  const auto jz = collective_operator(static_cast<int>(k - 1), Axis::Z, Representation::Symmetric);
  RandomQfiResult r;
  r.K = k;
  r.ensemble = e;
  r.estimate = random_qfi(jz, e, samples, seed, threads);
  r.exact = rand_qfi_exact(jz);
  r.universal = universal_qfi(jz).leading_value;
  return r;
}

// ---------------------------------------------------------------------------
// Krylov dimension

struct KrylovResult {
  Index from_initial_state = 0;
  Index from_eigenstate = 0;
  Index hilbert_dimension = 0;
};

inline KrylovResult run_krylov_dim(const ModelSpec& spec, const KrylovOptions& opts = {},
                                   const CapacityLimits& caps = {}) {
  const Operator h = build_model(spec, caps);
  const auto sd = diagonalize(h);
  const auto psi = default_initial_state(spec.model, spec.n, caps);
  const auto eig = StateVector::normalized(sd.vectors.col(sd.dimension() / 2), sd.basis);
  return {krylov_dimension(sd, psi, opts), krylov_dimension(sd, eig, opts), h.dimension()};
}

}  // namespace chaosqfi
