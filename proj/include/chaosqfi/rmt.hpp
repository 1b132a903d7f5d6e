#pragma once

#include "chaosqfi/core.hpp"
#include "chaosqfi/dynamics.hpp"
#include "chaosqfi/parallel.hpp"
#include "chaosqfi/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace chaosqfi {

/// Dyson circular ensembles, tagged by their Dyson index beta.
enum class Ensemble { COE = 1, CUE = 2, CSE = 4 };

inline constexpr std::array<Ensemble, 3> all_ensembles{Ensemble::COE, Ensemble::CUE, Ensemble::CSE};

inline int beta(Ensemble e) { return static_cast<int>(e); }

inline const char* to_string(Ensemble e) {
  switch (e) {
    case Ensemble::COE: return "COE";
    case Ensemble::CUE: return "CUE";
    case Ensemble::CSE: return "CSE";
  }
  return "?";
}

inline Ensemble ensemble_from_beta(int b) {
  switch (b) {
    case 1: return Ensemble::COE;
    case 2: return Ensemble::CUE;
    case 4: return Ensemble::CSE;
  }
  throw ArgumentError("Dyson index must be 1, 2 or 4");
}

inline Ensemble parse_ensemble(const std::string& s) {
  if (s == "coe" || s == "COE" || s == "1") return Ensemble::COE;
  if (s == "cue" || s == "CUE" || s == "2") return Ensemble::CUE;
  if (s == "cse" || s == "CSE" || s == "4") return Ensemble::CSE;
  throw ArgumentError("unknown ensemble '" + s + "'");
}

/// Mean-normalized nearest-neighbour spacings.
struct SpacingSample {
  std::vector<double> spacings;
  std::string source;

  std::size_t size() const noexcept { return spacings.size(); }

  static SpacingSample from_gaps(std::vector<double> gaps, std::string source) {
    if (gaps.empty()) throw ArgumentError("no spacings");
    const double mean = std::accumulate(gaps.begin(), gaps.end(), 0.0) / static_cast<double>(gaps.size());
    if (!(mean > 0.0)) throw NumericalError("degenerate spectrum: zero mean spacing");
    for (double& g : gaps) {
      if (g < 0.0) throw NumericalError("negative level spacing; unfolding is not monotone");
      g /= mean;
    }
    return {std::move(gaps), std::move(source)};
  }

  /// Concatenation of independently normalized samples (e.g. symmetry sectors).
  static SpacingSample pooled(const std::vector<SpacingSample>& parts, std::string source) {
    std::vector<double> all;
    for (const auto& p : parts) all.insert(all.end(), p.spacings.begin(), p.spacings.end());
    return from_gaps(std::move(all), std::move(source));
  }
};

/// Spacings of eigenphases on the circle, including the wrap-around gap,
/// in units of the mean spacing 2 pi / K. With `kramers`, exactly degenerate
/// pairs (within merge_tol) are collapsed first and K counts doublets.
inline SpacingSample quasi_energy_spacings(const SpectralDecomposition& spec, bool kramers, double merge_tol = 1e-8) {
  if (spec.kind != OperatorKind::Unitary) throw ArgumentError("quasi-energy spacings need a unitary spectrum");
  std::vector<double> levels;
  if (kramers) {
    for (const auto& cluster : eigenspace_clusters(spec, merge_tol)) {
      if (cluster.size() != 2)
        throw NumericalError("Kramers structure absent: eigenspace of multiplicity " + std::to_string(cluster.size()));
      levels.push_back(spec.values(cluster.front()));
    }
  } else {
    levels.assign(spec.values.data(), spec.values.data() + spec.values.size());
  }
  std::sort(levels.begin(), levels.end());
  if (levels.size() < 2) throw ArgumentError("need at least two levels");
  std::vector<double> gaps;
  gaps.reserve(levels.size());
  for (std::size_t i = 0; i + 1 < levels.size(); ++i) gaps.push_back(levels[i + 1] - levels[i]);
  gaps.push_back(levels.front() + 2.0 * std::numbers::pi - levels.back());
  const double mean_spacing = 2.0 * std::numbers::pi / static_cast<double>(levels.size());
  for (double& g : gaps) g /= mean_spacing;
  return SpacingSample{std::move(gaps), kramers ? "quasi-energies (Kramers pairs merged)" : "quasi-energies"};
}

struct UnfoldOptions {
  int degree = 10;
  double trim_fraction = 0.1;
};

/// Maps energies through a least-squares polynomial fit of the level staircase,
/// trims both spectral edges and returns mean-normalized spacings.
inline SpacingSample unfold_spectrum(std::vector<double> energies, const UnfoldOptions& opts = {}) {
  if (energies.size() < 50) throw ArgumentError("unfolding needs at least 50 levels");
  if (opts.degree < 1) throw ArgumentError("unfolding degree must be positive");
  if (opts.trim_fraction < 0.0 || opts.trim_fraction >= 0.5) throw ArgumentError("trim fraction must lie in [0, 0.5)");
  std::sort(energies.begin(), energies.end());
  const auto n = static_cast<Index>(energies.size());
  const double lo = energies.front(), hi = energies.back();
  if (!(hi > lo)) throw NumericalError("flat spectrum cannot be unfolded");
  // Chebyshev basis on [-1, 1] keeps the normal equations well conditioned
  Eigen::MatrixXd basis(n, opts.degree + 1);
  Eigen::VectorXd staircase(n);
  for (Index i = 0; i < n; ++i) {
    const double x = 2.0 * (energies[i] - lo) / (hi - lo) - 1.0;
    basis(i, 0) = 1.0;
    if (opts.degree >= 1) basis(i, 1) = x;
    for (int k = 2; k <= opts.degree; ++k) basis(i, k) = 2.0 * x * basis(i, k - 1) - basis(i, k - 2);
    staircase(i) = static_cast<double>(i + 1);
  }
  const Eigen::VectorXd coef = basis.colPivHouseholderQr().solve(staircase);
  const Eigen::VectorXd unfolded = basis * coef;
  const auto trim = static_cast<Index>(std::floor(opts.trim_fraction * static_cast<double>(n)));
  std::vector<double> gaps;
  for (Index i = trim; i + 1 < n - trim; ++i) gaps.push_back(unfolded(i + 1) - unfolded(i));
  if (gaps.size() < 2) throw ArgumentError("too few levels left after trimming");
  char src[96];
  std::snprintf(src, sizeof src, "unfolded (polynomial degree %d, trim %.3g)", opts.degree, opts.trim_fraction);
  return SpacingSample::from_gaps(std::move(gaps), src);
}

// ---------------------------------------------------------------------------
// Wigner surmises

inline double surmise_pdf(Ensemble e, double s) {
  if (s < 0.0) return 0.0;
  constexpr double pi = std::numbers::pi;
  switch (e) {
    case Ensemble::COE: return 0.5 * pi * s * std::exp(-0.25 * pi * s * s);
    case Ensemble::CUE: return 32.0 / (pi * pi) * s * s * std::exp(-4.0 * s * s / pi);
    case Ensemble::CSE:
      return std::pow(2.0, 18) / (std::pow(3.0, 6) * pi * pi * pi) * std::pow(s, 4) *
             std::exp(-64.0 * s * s / (9.0 * pi));
  }
  return 0.0;
}

/// Closed-form integral of the surmise from 0 to s.
inline double surmise_cdf(Ensemble e, double s) {
  if (s <= 0.0) return 0.0;
  constexpr double pi = std::numbers::pi;
  switch (e) {
    case Ensemble::COE: return 1.0 - std::exp(-0.25 * pi * s * s);
    case Ensemble::CUE: {
      const double a = 4.0 / pi;
      return std::erf(2.0 * s / std::sqrt(pi)) - a * s * std::exp(-a * s * s);
    }
    case Ensemble::CSE: {
      // A int_0^s x^4 e^{-b x^2} dx = A gamma(5/2, b s^2) / (2 b^{5/2})
      const double b = 64.0 / (9.0 * pi);
      const double amp = std::pow(2.0, 18) / (std::pow(3.0, 6) * pi * pi * pi);
      const double x = b * s * s;
      const double lower_gamma = 0.75 * std::sqrt(pi) * std::erf(std::sqrt(x)) -
                                 std::exp(-x) * std::sqrt(x) * (x + 1.5);
      return std::min(1.0, amp * lower_gamma / (2.0 * std::pow(b, 2.5)));
    }
  }
  return 0.0;
}

/// Kolmogorov-Smirnov distance between the empirical CDF and a surmise CDF.
inline double ks_distance(const SpacingSample& sample, Ensemble e) {
  std::vector<double> s = sample.spacings;
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = surmise_cdf(e, s[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

struct SpacingTestResult {
  std::array<double, 3> ks{};  // COE, CUE, CSE
  Ensemble best = Ensemble::COE;
  /// Best-matching ensemble if its distance is below the acceptance threshold.
  std::optional<Ensemble> verdict;
  double accept_threshold = 0.1;
  std::size_t sample_size = 0;

  double ks_of(Ensemble e) const {
    return ks[e == Ensemble::COE ? 0 : e == Ensemble::CUE ? 1 : 2];
  }
};

inline constexpr std::size_t min_spacing_sample = 200;

inline SpacingTestResult spacing_test(const SpacingSample& sample, double accept_threshold = 0.1) {
  if (sample.size() < min_spacing_sample)
    throw ArgumentError("spacing test needs at least " + std::to_string(min_spacing_sample) + " spacings, got " +
                        std::to_string(sample.size()));
  SpacingTestResult r;
  r.accept_threshold = accept_threshold;
  r.sample_size = sample.size();
  for (std::size_t i = 0; i < 3; ++i) r.ks[i] = ks_distance(sample, all_ensembles[i]);
  const auto best = static_cast<std::size_t>(std::min_element(r.ks.begin(), r.ks.end()) - r.ks.begin());
  r.best = all_ensembles[best];
  if (r.ks[best] < accept_threshold) r.verdict = r.best;
  return r;
}

struct HistogramBin {
  double left, right, density, surmise;
};

/// Normalized spacing histogram with the bin-averaged surmise of `reference`.
inline std::vector<HistogramBin> spacing_histogram(const SpacingSample& sample, Ensemble reference, int bins = 60,
                                                   double lo = 0.0, double hi = 4.0) {
  if (bins < 1 || !(hi > lo)) throw ArgumentError("invalid histogram range");
  const double width = (hi - lo) / bins;
  std::vector<double> counts(bins, 0.0);
  for (double s : sample.spacings) {
    if (s < lo || s >= hi) continue;
    counts[std::min(bins - 1, static_cast<int>((s - lo) / width))] += 1.0;
  }
  std::vector<HistogramBin> out;
  const double n = static_cast<double>(sample.size());
  for (int b = 0; b < bins; ++b) {
    const double l = lo + b * width, r = l + width;
    out.push_back({l, r, counts[b] / (n * width), (surmise_cdf(reference, r) - surmise_cdf(reference, l)) / width});
  }
  return out;
}

inline void write_histogram_csv(std::ostream& os, const std::vector<HistogramBin>& bins) {
  os << "bin_left,bin_right,density,surmise_value\n";
  char buf[128];
  for (const auto& b : bins) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.12g,%.12g\n", b.left, b.right, b.density, b.surmise);
    os << buf;
  }
}

// ---------------------------------------------------------------------------
// Random states

using Rng = std::mt19937_64;

/// Independent generator for one shard of a Monte-Carlo run.
inline Rng shard_rng(std::uint64_t seed, std::uint64_t shard) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(shard), static_cast<std::uint32_t>(shard >> 32)};
  return Rng(seq);
}

/// Gaussian random vector normalized to the unit sphere: real components for
/// COE, complex for CUE. For CSE each quaternion Gaussian q fills a symplectic
/// pair of components (q0 + i q1, -q2 + i q3), so 2K reals in all.
inline Vector random_state_amplitudes(Index k, Ensemble e, Rng& rng) {
  if (k < 2) throw ArgumentError("random states need dimension at least 2");
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(k);
  switch (e) {
    case Ensemble::COE:
      for (Index i = 0; i < k; ++i) v(i) = normal(rng);
      break;
    case Ensemble::CUE:
      for (Index i = 0; i < k; ++i) {
        const double re = normal(rng);
        v(i) = Complex(re, normal(rng));
      }
      break;
    case Ensemble::CSE:
      for (Index i = 0; i < k; i += 2) {
        const double q0 = normal(rng), q1 = normal(rng), q2 = normal(rng), q3 = normal(rng);
        v(i) = Complex(q0, q1);
        if (i + 1 < k) v(i + 1) = Complex(-q2, q3);
      }
      break;
  }
  return v.normalized();
}

inline StateVector sample_random_state(const BasisDescriptor& basis, Ensemble e, Rng& rng) {
  return StateVector::normalized(random_state_amplitudes(basis.dimension, e, rng), basis);
}

inline StateVector sample_random_state(Index k, Ensemble e, std::uint64_t seed) {
  Rng rng = shard_rng(seed, 0);
  return sample_random_state(BasisDescriptor{Representation::Symmetric, static_cast<int>(k - 1), k, std::nullopt}, e,
                             rng);
}

/// Exact Haar average 4 Tr[O^2]/(K+1) - 4 Tr[O]^2 / (K (K+1)).
inline double rand_qfi_exact(const Operator& op) {
  if (!op.is_hermitian()) throw ArgumentError("QFI generator must be Hermitian");
  const double k = static_cast<double>(op.dimension());
  const double tr2 = op.matrix().squaredNorm();
  const double tr = op.matrix().trace().real();
  return 4.0 * tr2 / (k + 1.0) - 4.0 * tr * tr / (k * (k + 1.0));
}

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
};

inline constexpr std::size_t monte_carlo_shards = 16;

/// Monte-Carlo average of the pure-state QFI over random states of an ensemble.
inline MonteCarloEstimate random_qfi(const Operator& op, Ensemble e, std::size_t samples, std::uint64_t seed,
                                     unsigned threads = 1) {
  if (samples < 100) throw ArgumentError("random_qfi needs at least 100 samples");
  if (!op.is_hermitian()) throw ArgumentError("QFI generator must be Hermitian");
  std::vector<double> sums(monte_carlo_shards, 0.0), sumsq(monte_carlo_shards, 0.0);
  parallel_for(monte_carlo_shards, threads, [&](std::size_t shard) {
    Rng rng = shard_rng(seed, shard);
    const std::size_t count = samples / monte_carlo_shards + (shard < samples % monte_carlo_shards ? 1 : 0);
    for (std::size_t i = 0; i < count; ++i) {
      const double f = qfi_pure(sample_random_state(op.basis(), e, rng), op);
      sums[shard] += f;
      sumsq[shard] += f * f;
    }
  });
  const double n = static_cast<double>(samples);
  const double mean = std::accumulate(sums.begin(), sums.end(), 0.0) / n;
  const double var = std::max(0.0, std::accumulate(sumsq.begin(), sumsq.end(), 0.0) / n - mean * mean);
  return {mean, std::sqrt(var * n / (n - 1.0) / n), samples};
}

/// Sample means and standard errors of a_m^* a_m' over random states.
struct SecondMoments {
  Matrix mean;
  Eigen::MatrixXd se_real;
  Eigen::MatrixXd se_imag;
  std::size_t samples = 0;

  /// |z| of every entry against delta_{mm'}/K; entries with zero spread are skipped.
  std::vector<double> z_scores() const {
    std::vector<double> z;
    const double k = static_cast<double>(mean.rows());
    for (Index a = 0; a < mean.rows(); ++a)
      for (Index b = a; b < mean.cols(); ++b) {
        const double target = a == b ? 1.0 / k : 0.0;
        if (se_real(a, b) > 0.0) z.push_back(std::abs(mean(a, b).real() - target) / se_real(a, b));
        if (a != b && se_imag(a, b) > 0.0) z.push_back(std::abs(mean(a, b).imag()) / se_imag(a, b));
      }
    return z;
  }
};

inline SecondMoments coefficient_second_moments(Index k, Ensemble e, std::size_t samples, std::uint64_t seed,
                                                unsigned threads = 1) {
  if (samples < 2) throw ArgumentError("need at least two samples");
  std::vector<Matrix> sum(monte_carlo_shards, Matrix::Zero(k, k));
  std::vector<Eigen::MatrixXd> sq_re(monte_carlo_shards, Eigen::MatrixXd::Zero(k, k));
  std::vector<Eigen::MatrixXd> sq_im(monte_carlo_shards, Eigen::MatrixXd::Zero(k, k));
  parallel_for(monte_carlo_shards, threads, [&](std::size_t shard) {
    Rng rng = shard_rng(seed, shard);
    const std::size_t count = samples / monte_carlo_shards + (shard < samples % monte_carlo_shards ? 1 : 0);
    for (std::size_t i = 0; i < count; ++i) {
      const Vector a = random_state_amplitudes(k, e, rng);
      const Matrix outer = a.conjugate() * a.transpose();  // (m, m') -> a_m^* a_m'
      sum[shard] += outer;
      sq_re[shard] += outer.real().cwiseAbs2();
      sq_im[shard] += outer.imag().cwiseAbs2();
    }
  });
  SecondMoments out;
  out.samples = samples;
  const double n = static_cast<double>(samples);
  Matrix total = Matrix::Zero(k, k);
  Eigen::MatrixXd tre = Eigen::MatrixXd::Zero(k, k), tim = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t s = 0; s < monte_carlo_shards; ++s) {
    total += sum[s];
    tre += sq_re[s];
    tim += sq_im[s];
  }
  out.mean = total / n;
  auto se = [&](const Eigen::MatrixXd& sq, const Eigen::MatrixXd& m) {
    Eigen::MatrixXd var = (sq / n - m.cwiseAbs2()).cwiseMax(0.0);
    return Eigen::MatrixXd((var * (n / (n - 1.0)) / n).cwiseSqrt());
  };
  out.se_real = se(tre, out.mean.real());
  out.se_imag = se(tim, out.mean.imag());
  return out;
}

}  // namespace chaosqfi
