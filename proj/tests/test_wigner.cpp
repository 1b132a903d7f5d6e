#include "chaosqfi/models.hpp"
#include "chaosqfi/wigner.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace chaosqfi;

namespace {

double fact(double x) { return std::tgamma(std::round(x) + 1.0); }

// <j1 m1; j2 m2 | J M> by the Racah formula
double clebsch_gordan(double j1, double m1, double j2, double m2, double jj, double mm) {
  if (std::abs(m1 + m2 - mm) > 1e-9) return 0.0;
  const double pre = std::sqrt((2 * jj + 1) * fact(jj + j1 - j2) * fact(jj - j1 + j2) * fact(j1 + j2 - jj) /
                               fact(j1 + j2 + jj + 1)) *
                     std::sqrt(fact(jj + mm) * fact(jj - mm) * fact(j1 - m1) * fact(j1 + m1) * fact(j2 - m2) *
                               fact(j2 + m2));
  double sum = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double a[] = {j1 + j2 - jj - k, j1 - m1 - k, j2 + m2 - k, jj - j2 + m1 + k, jj - j1 - m2 + k};
    if (a[0] < -1e-9 || a[1] < -1e-9 || a[2] < -1e-9) break;
    if (a[3] < -1e-9 || a[4] < -1e-9) continue;
    double d = fact(k);
    for (double x : a) d *= fact(x);
    sum += (k % 2 ? -1.0 : 1.0) / d;
  }
  return pre * sum;
}

// diagonal multipole element <j m| T_k0 |j m>
double multipole(double j, double m, int k) {
  return clebsch_gordan(j, m, k, 0, j, m) * std::sqrt((2.0 * k + 1) / (2.0 * j + 1));
}

// Dicke state |j, m> with m = j - index
StateVector dicke(int n, Index index) {
  Vector v = Vector::Zero(n + 1);
  v(index) = 1.0;
  return StateVector(v, BasisDescriptor::symmetric(n));
}

}  // namespace

TEST(Kernel, MatchesMultipoleExpansionAtPole) {
  for (int n = 1; n <= 10; ++n) {
    const double j = 0.5 * n;
    const auto kernel = wigner_kernel_diagonal(n + 1);
    for (Index i = 0; i <= n; ++i) {
      double ref = 0.0;
      for (int k = 0; k <= n; ++k) ref += std::sqrt(2.0 * k + 1) * multipole(j, j - i, k);
      ref *= std::sqrt(n + 1.0) / (4 * std::numbers::pi);
      EXPECT_NEAR(kernel(i), ref, 1e-10) << n << ' ' << i;
    }
  }
}

TEST(Field, DickeStatesFollowLegendreExpansion) {
  // W(theta) = sqrt(K / 4 pi) sum_k <T_k0> Y_k0(theta) for states diagonal in Jz
  for (int n : {1, 4, 7}) {
    const double j = 0.5 * n;
    for (Index i = 0; i <= n; ++i) {
      const WignerEvaluator w(dicke(n, i));
      for (double theta : {0.0, 0.4, 1.3, 2.2, std::numbers::pi}) {
        double ref = 0.0;
        for (int k = 0; k <= n; ++k) ref += multipole(j, j - i, k) * std::sph_legendre(k, 0, theta);
        ref *= std::sqrt((n + 1.0) / (4 * std::numbers::pi));
        EXPECT_NEAR(w(theta, 0.7), ref, 1e-10) << n << ' ' << i << ' ' << theta;
      }
    }
  }
}

TEST(Field, CoherentStatePeaksAtItsDirection) {
  const int n = 30;
  const WignerEvaluator north(coherent_spin_state(n, 0.0, 0.0, Representation::Symmetric));
  EXPECT_GT(north(0.0, 0.0), north(0.2, 0.0));
  EXPECT_GT(north(0.0, 0.0), 0.0);
  const auto psi = coherent_spin_state(n, 1.1, 2.0, Representation::Symmetric);
  const auto f = wigner_grid(psi, 64, 128);
  const auto [r, c] = f.argmax();
  EXPECT_NEAR(f.theta[r], 1.1, std::numbers::pi / 64);
  EXPECT_NEAR(f.phi[c], 2.0, 2 * std::numbers::pi / 128);
}

TEST(Field, RotationCovariance) {
  // rotating the state about z by alpha shifts the field in phi by alpha
  const int n = 9;
  const auto u = floquet_coe(n, 1.7, 10.0);
  const auto spec = diagonalize(u);
  const auto psi = evolve(coherent_spin_state(n, 1.0, 0.3, Representation::Symmetric), spec, 5.0);
  const double alpha = 0.8;
  const auto jz = collective_operator(n, Axis::Z, Representation::Symmetric);
  Vector v = psi.amplitudes();
  for (Index i = 0; i < v.size(); ++i) v(i) *= std::polar(1.0, -alpha * jz.matrix()(i, i).real());
  const StateVector rotated(v, psi.basis());
  const WignerEvaluator a(psi), b(rotated);
  for (double theta : {0.3, 1.2, 2.5})
    for (double phi : {0.0, 1.0, 4.0}) EXPECT_NEAR(b(theta, phi + alpha), a(theta, phi), 1e-10);
}

TEST(Field, IntegratesToOne) {
  for (int n : {2, 15, 60}) {
    const auto spec = diagonalize(floquet_coe(n, 1.7, 10.0));
    const auto psi = evolve(coherent_spin_state(n, 2.0, 1.0, Representation::Symmetric), spec, 40.0);
    EXPECT_NEAR(wigner_grid(psi, 128, 128).integral(), 1.0, 1e-3) << n;
  }
}

TEST(Field, ValidatesInput) {
  EXPECT_THROW(WignerEvaluator(coherent_spin_state(3, 0.0, 0.0, Representation::Full)), BasisMismatchError);
  EXPECT_THROW(WignerEvaluator(coherent_spin_state(201, 0.0, 0.0, Representation::Symmetric)), CapacityError);
  EXPECT_NO_THROW(WignerEvaluator(coherent_spin_state(200, 0.0, 0.0, Representation::Symmetric)));
  EXPECT_THROW(wigner_grid(dicke(2, 0), 32, 128), ArgumentError);
}

TEST(Field, CsvHeader) {
  std::ostringstream os;
  write_field_csv(os, wigner_grid(dicke(3, 1)));
  EXPECT_EQ(os.str().rfind("theta,phi,W\n", 0), 0u);
}

TEST(Width, EigenstateNeverDecays) {
  const auto w = rotation_fidelity_width(dicke(10, 3), Axis::Z);
  EXPECT_FALSE(w.crossed);
  EXPECT_EQ(w.angle, std::numbers::pi);
}

TEST(Width, CoherentStateClosedForm) {
  for (int n : {10, 100, 200}) {
    const auto w = rotation_fidelity_width(coherent_spin_state(n, 0.0, 0.0, Representation::Symmetric), Axis::X);
    ASSERT_TRUE(w.crossed);
    // |<css| e^{i theta Jx} |css>|^2 = cos^{2N}(theta / 2)
    EXPECT_NEAR(w.angle, 2.0 * std::acos(std::pow(0.5, 0.5 / n)), 1e-10) << n;
    if (n == 200) EXPECT_NEAR(w.angle, 2.0 * std::sqrt(std::log(2.0) / n), 0.01 * w.angle);
  }
}

TEST(Width, ScrambledStateIsIsotropic) {
  const int n = 100;
  const auto spec = diagonalize(floquet_coe(n, 1.7, 10.0));
  const auto psi = evolve(coherent_spin_state(n, std::numbers::pi / 2, -std::numbers::pi / 2,
                                              Representation::Symmetric),
                          spec, 2000.0);
  const double wx = rotation_fidelity_width(psi, Axis::X).angle;
  const double wy = rotation_fidelity_width(psi, Axis::Y).angle;
  const double wz = rotation_fidelity_width(psi, Axis::Z).angle;
  const double css = rotation_fidelity_width(coherent_spin_state(n, 0.0, 0.0, Representation::Symmetric), Axis::X).angle;
  for (double w : {wx, wy, wz}) {
    EXPECT_LT(3.0 * w, css);
    EXPECT_NEAR(w, (wx + wy + wz) / 3.0, 0.25 * (wx + wy + wz) / 3.0);
  }
}
