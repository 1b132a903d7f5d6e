#include "chaosqfi/models.hpp"
#include "chaosqfi/predict.hpp"
#include "chaosqfi/rmt.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace chaosqfi;

TEST(Universal, SymmetricJz) {
  const auto p = universal_qfi(collective_operator(10, Axis::Z, Representation::Symmetric));
  EXPECT_EQ(p.K, 11);
  EXPECT_NEAR(p.trace_O2, 110.0, 1e-12);
  EXPECT_NEAR(p.leading_value, 40.0, 1e-12);
  EXPECT_NEAR(p.remainder_scale, 110.0 / 121.0, 1e-12);
}

TEST(Universal, FullJz) {
  const auto p = universal_qfi(collective_operator(4, Axis::Z, Representation::Full));
  EXPECT_EQ(p.K, 16);
  EXPECT_NEAR(p.trace_O2, 4.0 * 4.0, 1e-12);
  EXPECT_NEAR(p.leading_value, 4.0, 1e-12);
}

TEST(Universal, IdentityIsZero) {
  EXPECT_NEAR(universal_qfi(Matrix(Matrix::Identity(7, 7))).leading_value, 0.0, 1e-12);
}

TEST(Universal, IsotropicAcrossAxes) {
  for (auto rep : {Representation::Symmetric, Representation::Full}) {
    const int n = rep == Representation::Full ? 6 : 30;
    const auto j = build_collective_ops(n, rep);
    const double z = universal_qfi(j.z).leading_value;
    EXPECT_NEAR(universal_qfi(j.x).leading_value, z, 1e-9);
    EXPECT_NEAR(universal_qfi(j.y).leading_value, z, 1e-9);
  }
}

TEST(Universal, ReflectionSectorBlockTraces) {
  const auto jz = collective_operator(4, Axis::Z, Representation::Full);
  const auto parity_even = symmetry_sector(jz, Symmetry::Parity, 1).block;
  ASSERT_EQ(parity_even.dimension(), 8);
  const auto p = universal_qfi(parity_even);
  double tr2 = 0.0, tr = 0.0;
  for (Index i = 0; i < 8; ++i) {
    tr2 += std::norm(parity_even.matrix()(i, i));
    tr += parity_even.matrix()(i, i).real();
  }
  EXPECT_NEAR(p.trace_O2, tr2, 1e-12);
  EXPECT_NEAR(p.leading_value, 4.0 * tr2 / 8.0 - 4.0 * tr * tr / 64.0, 1e-12);
}

TEST(Universal, KrylovRestriction) {
  const int n = 12;
  const auto u = floquet_coe(n, 1.7, 10.0);
  const auto sd = diagonalize(u);
  const auto j = build_collective_ops(n, Representation::Symmetric);
  const auto css = coherent_spin_state(n, std::numbers::pi / 2, -std::numbers::pi / 2, Representation::Symmetric);
  EXPECT_NEAR(universal_qfi(j.z, sd, css).leading_value, symmetric_prediction(n), 1e-9);
  const auto eig = StateVector::normalized(sd.vectors.col(2), sd.basis);
  EXPECT_EQ(universal_qfi(j.z, sd, eig).K, 1);
  EXPECT_NEAR(universal_qfi(j.z, sd, eig).leading_value, 0.0, 1e-12);
}

TEST(Predictions, ClosedForms) {
  EXPECT_EQ(symmetric_prediction(1), 1.0);
  EXPECT_EQ(symmetric_prediction(10), 40.0);
  for (int n : {3, 50, 1000}) EXPECT_NEAR(symmetric_prediction(n) - n * n / 3.0, 2.0 * n / 3.0, 1e-9 * n * n);
  EXPECT_NEAR(symmetric_prediction(100000) / (1e10 / 3.0), 1.0, 1e-4);
  EXPECT_EQ(full_space_prediction(2), 2.0);
  EXPECT_EQ(full_space_prediction(12), 12.0);
  EXPECT_THROW(symmetric_prediction(0), ArgumentError);
}

TEST(Predictions, RandomAverageConvergesAsOneOverK) {
  for (int k : {11, 101, 1001}) {
    const auto jz = collective_operator(k - 1, Axis::Z, Representation::Symmetric);
    const double u = universal_qfi(jz).leading_value;
    EXPECT_LT(std::abs(rand_qfi_exact(jz) - u) / u, 2.0 / k);
  }
}

TEST(Depth, Examples) {
  EXPECT_EQ(entanglement_depth(48.0, 12), 4);
  for (int n : {1, 2, 5, 12}) {
    EXPECT_EQ(entanglement_depth(n, n), 1);
    EXPECT_EQ(entanglement_depth(static_cast<double>(n) * n, n), n);
  }
  EXPECT_EQ(entanglement_depth(0.0, 5), 1);
  EXPECT_THROW(entanglement_depth(145.0, 12), ArgumentError);
  EXPECT_THROW(entanglement_depth(-1.0, 12), ArgumentError);
}

TEST(Depth, TiesDoNotCertify) {
  // k = 3 at N = 12 has bound exactly 36
  EXPECT_EQ(entanglement_depth(36.0, 12), 3);
  EXPECT_EQ(entanglement_depth(36.0 + 1e-9, 12), 4);
}

TEST(Depth, MonotoneInF) {
  for (int n : {7, 12, 20}) {
    int last = 1;
    for (double f = 0.0; f <= n * n; f += 0.25) {
      const int d = entanglement_depth(f, n);
      EXPECT_GE(d, last);
      last = d;
    }
  }
}
