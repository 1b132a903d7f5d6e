#include "chaosqfi/models.hpp"
#include "chaosqfi/predict.hpp"
#include "chaosqfi/rmt.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace chaosqfi;

namespace {

// Simpson quadrature of f on [0, hi]
template <typename F>
double integrate(F f, double hi = 12.0, int steps = 24000) {
  const double h = hi / steps;
  double s = f(0.0) + f(hi);
  for (int i = 1; i < steps; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return s * h / 3.0;
}

// rejection sampling from a surmise, bounded by 1.3 on [0, 5]
std::vector<double> surmise_draws(Ensemble e, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> x(0.0, 5.0), y(0.0, 1.3);
  std::vector<double> out;
  while (out.size() < n) {
    const double s = x(rng);
    if (y(rng) < surmise_pdf(e, s)) out.push_back(s);
  }
  return out;
}

SpacingSample sample_of(std::vector<double> v) { return SpacingSample::from_gaps(std::move(v), "synthetic"); }

}  // namespace

TEST(Ensemble, BetaNameBijection) {
  for (auto e : all_ensembles) {
    EXPECT_EQ(ensemble_from_beta(beta(e)), e);
    EXPECT_EQ(parse_ensemble(to_string(e)), e);
  }
  EXPECT_THROW(ensemble_from_beta(3), ArgumentError);
}

TEST(Surmise, PointValues) {
  EXPECT_EQ(surmise_pdf(Ensemble::COE, 0.0), 0.0);
  EXPECT_NEAR(surmise_pdf(Ensemble::COE, 1.0), 0.5 * std::numbers::pi * std::exp(-0.25 * std::numbers::pi), 1e-15);
  EXPECT_NEAR(surmise_pdf(Ensemble::COE, 1.0), 0.7162, 1e-4);
}

TEST(Surmise, NormalizationAndUnitMean) {
  for (auto e : all_ensembles) {
    EXPECT_NEAR(integrate([e](double s) { return surmise_pdf(e, s); }), 1.0, 1e-6) << to_string(e);
    EXPECT_NEAR(integrate([e](double s) { return s * surmise_pdf(e, s); }), 1.0, 1e-6) << to_string(e);
  }
}

TEST(Surmise, CdfMatchesQuadrature) {
  for (auto e : all_ensembles)
    for (double s : {0.1, 0.5, 1.0, 1.7, 3.0}) {
      const double q = integrate([e](double x) { return surmise_pdf(e, x); }, s, 4000);
      EXPECT_NEAR(surmise_cdf(e, s), q, 1e-9) << to_string(e) << ' ' << s;
    }
}

TEST(Spacings, EquallySpacedPhases) {
  SpectralDecomposition sd;
  sd.kind = OperatorKind::Unitary;
  sd.values.resize(10);
  for (int i = 0; i < 10; ++i) sd.values(i) = -std::numbers::pi + 0.3 + 2.0 * std::numbers::pi * i / 10.0;
  const auto s = quasi_energy_spacings(sd, false);
  ASSERT_EQ(s.size(), 10u);
  for (double x : s.spacings) EXPECT_NEAR(x, 1.0, 1e-12);
}

TEST(Spacings, KramersRequiresDoublets) {
  SpectralDecomposition sd;
  sd.kind = OperatorKind::Unitary;
  sd.values.resize(3);
  sd.values << -1.0, 0.5, 0.5 + 1e-10;
  EXPECT_THROW(quasi_energy_spacings(sd, true), NumericalError);
}

TEST(Spacings, CseDoubletsAreMerged) {
  const auto sd = diagonalize(floquet_cse(101, 2.5, 2.5, 5.0, 7.5));
  const auto s = quasi_energy_spacings(sd, true);
  EXPECT_EQ(s.size(), 51u);
  double mean = 0;
  for (double x : s.spacings) mean += x;
  EXPECT_NEAR(mean / s.size(), 1.0, 1e-9);
}

TEST(Unfold, UniformSpectrum) {
  std::vector<double> e;
  for (int i = 0; i < 300; ++i) e.push_back(0.37 * i - 5.0);
  const auto s = unfold_spectrum(e);
  for (double x : s.spacings) EXPECT_NEAR(x, 1.0, 0.02);
}

TEST(Unfold, QuadraticSpectrumIsRigid) {
  std::vector<double> e;
  for (int i = 0; i < 400; ++i) e.push_back(static_cast<double>(i) * i);
  const auto s = unfold_spectrum(e);
  const auto test = spacing_test(s);
  // far from every surmise and far from Poisson: spacings bunch near 1
  for (double k : test.ks) EXPECT_GT(k, 0.2);
  std::vector<double> sorted = s.spacings;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_GT(sorted[sorted.size() / 10], 0.5);
  EXPECT_LT(sorted[sorted.size() * 9 / 10], 1.5);
}

TEST(Unfold, NeedsEnoughLevels) {
  EXPECT_THROW(unfold_spectrum(std::vector<double>(49, 1.0)), ArgumentError);
}

TEST(SpacingTest, SyntheticCueDraws) {
  const auto r = spacing_test(sample_of(surmise_draws(Ensemble::CUE, 5000, 1)));
  ASSERT_TRUE(r.verdict.has_value());
  EXPECT_EQ(*r.verdict, Ensemble::CUE);
  EXPECT_LT(r.ks_of(Ensemble::CUE), 0.03);
}

TEST(SpacingTest, PoissonSpacingsMatchNothing) {
  std::mt19937_64 rng(4);
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> v(5000);
  for (double& x : v) x = ex(rng);
  const auto r = spacing_test(sample_of(v));
  for (double k : r.ks) EXPECT_GT(k, 0.1);
  EXPECT_FALSE(r.verdict.has_value());
}

TEST(SpacingTest, UndersizedSample) {
  EXPECT_THROW(spacing_test(sample_of(std::vector<double>(150, 1.0))), ArgumentError);
}

TEST(SpacingTest, Discriminates) {
  for (auto truth : all_ensembles) {
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto r = spacing_test(sample_of(surmise_draws(truth, 5000, 1000 * beta(truth) + seed)));
      wins += r.best == truth ? 1 : 0;
    }
    EXPECT_GE(wins, 99) << to_string(truth);
  }
}

TEST(Histogram, CsvLayoutAndNormalization) {
  const auto s = sample_of(surmise_draws(Ensemble::COE, 2000, 9));
  const auto bins = spacing_histogram(s, Ensemble::COE, 60, 0.0, 4.0);
  ASSERT_EQ(bins.size(), 60u);
  double area = 0;
  for (const auto& b : bins) area += b.density * (b.right - b.left);
  EXPECT_LE(area, 1.0 + 1e-12);
  EXPECT_GT(area, 0.99);
  std::ostringstream os;
  write_histogram_csv(os, bins);
  EXPECT_EQ(os.str().substr(0, 39), "bin_left,bin_right,density,surmise_valu");
}

TEST(RandomStates, DeterministicForFixedSeed) {
  for (auto e : all_ensembles) {
    const auto a = sample_random_state(11, e, 42);
    const auto b = sample_random_state(11, e, 42);
    EXPECT_EQ((a.amplitudes() - b.amplitudes()).norm(), 0.0);
    EXPECT_NEAR(a.amplitudes().norm(), 1.0, 1e-14);
  }
  EXPECT_GT((sample_random_state(11, Ensemble::CUE, 1).amplitudes() -
             sample_random_state(11, Ensemble::CUE, 2).amplitudes()).norm(),
            1e-3);
}

TEST(RandomStates, RealTwoComponentAngleIsUniform) {
  Rng rng = shard_rng(3, 0);
  std::vector<int> counts(8, 0);
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    const Vector v = random_state_amplitudes(2, Ensemble::COE, rng);
    EXPECT_EQ(v.imag().norm(), 0.0);
    double a = std::atan2(v(1).real(), v(0).real());
    if (a < 0) a += 2 * std::numbers::pi;
    counts[std::min(7, static_cast<int>(a / (std::numbers::pi / 4)))]++;
  }
  for (int c : counts) EXPECT_NEAR(c, n / 8.0, 4.0 * std::sqrt(n / 8.0));
}

TEST(RandomStates, DiagonalSecondMomentsK101) {
  const auto m = coefficient_second_moments(101, Ensemble::CUE, 100000, 17);
  int outliers = 0;
  for (Index i = 0; i < 101; ++i) {
    const double z = std::abs(m.mean(i, i).real() - 1.0 / 101) / m.se_real(i, i);
    outliers += z > 3.0 ? 1 : 0;
  }
  // 3 sigma per entry: a handful of exceedances out of 101 is expected by chance
  EXPECT_LE(outliers, 3);
}

TEST(RandomQfi, ExactFormula) {
  const auto id = Operator(Matrix::Identity(5, 5), BasisDescriptor::symmetric(4), OperatorKind::Hermitian);
  EXPECT_NEAR(rand_qfi_exact(id), 0.0, 1e-12);
  EXPECT_NEAR(rand_qfi_exact(collective_operator(2, Axis::Z, Representation::Symmetric)), 2.0, 1e-12);
}

TEST(RandomQfi, IdentityGivesZero) {
  const auto id = Operator(Matrix::Identity(5, 5), BasisDescriptor::symmetric(4), OperatorKind::Hermitian);
  const auto r = random_qfi(id, Ensemble::CUE, 200, 1);
  EXPECT_NEAR(r.mean, 0.0, 1e-12);
}

TEST(RandomQfi, ComplexEnsemblesMatchExact) {
  for (Index k : {3, 11, 101})
    for (auto e : {Ensemble::CUE, Ensemble::CSE}) {
      const auto jz = collective_operator(static_cast<int>(k - 1), Axis::Z, Representation::Symmetric);
      const auto r = random_qfi(jz, e, 10000, 100 + k);
      EXPECT_LT(std::abs(r.mean - rand_qfi_exact(jz)), 3.0 * r.standard_error) << k << ' ' << to_string(e);
    }
}

TEST(RandomQfi, ThreadCountIndependent) {
  const auto jz = collective_operator(20, Axis::Z, Representation::Symmetric);
  const auto a = random_qfi(jz, Ensemble::COE, 1000, 9, 1);
  const auto b = random_qfi(jz, Ensemble::COE, 1000, 9, 3);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.standard_error, b.standard_error);
}

TEST(RandomQfi, ApproachesUniversalValue) {
  for (int n : {10, 100, 1000}) {
    const auto jz = collective_operator(n, Axis::Z, Representation::Symmetric);
    const double k = n + 1.0;
    const double u = universal_qfi(jz).leading_value;
    EXPECT_LT(std::abs(rand_qfi_exact(jz) - u) / u, 2.0 / k);
  }
}

TEST(RandomQfi, RealStatesFollowOrthogonalAverage) {
  // real unit vectors: E[(x^T O x)^2] = ((Tr O)^2 + 2 Tr O^2) / (K (K + 2)) for real symmetric O
  for (Index k : {3, 11, 101}) {
    const auto jz = collective_operator(static_cast<int>(k - 1), Axis::Z, Representation::Symmetric);
    const double kk = static_cast<double>(k), tr2 = jz.matrix().squaredNorm();
    const double expected = 4.0 * (tr2 / kk - 2.0 * tr2 / (kk * (kk + 2.0)));
    const auto r = random_qfi(jz, Ensemble::COE, 10000, 300 + k);
    EXPECT_LT(std::abs(r.mean - expected), 3.0 * r.standard_error) << k;
  }
}
