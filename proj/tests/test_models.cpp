#include "chaosqfi/models.hpp"
#include "chaosqfi/spectral.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace chaosqfi;

namespace {

std::vector<double> sorted_values(const Operator& op) {
  const auto sd = diagonalize(op);
  std::vector<double> v(sd.values.data(), sd.values.data() + sd.values.size());
  std::sort(v.begin(), v.end());
  return v;
}

double unitarity_error(const Operator& u) {
  const Index d = u.dimension();
  return max_abs(u.matrix() * u.matrix().adjoint() - Matrix::Identity(d, d));
}

}  // namespace

TEST(Models, TrivialKicksAreIdentity) {
  EXPECT_LT(max_abs(floquet_coe(2, 0.0, 0.0).matrix() - Matrix::Identity(3, 3)), 1e-14);
  EXPECT_LT(max_abs(floquet_cue(2, 0.0, 0.0, 0.0).matrix() - Matrix::Identity(3, 3)), 1e-14);
  EXPECT_LT(max_abs(floquet_cse(3, 0.0, 0.0, 0.0, 0.0).matrix() - Matrix::Identity(4, 4)), 1e-14);
}

TEST(Models, CoeWithoutRotationIsDiagonalTorsion) {
  const int n = 9;
  const double c = 3.3;
  const auto u = floquet_coe(n, 0.0, c);
  for (Index i = 0; i <= n; ++i) {
    const double m = 0.5 * n - i;
    EXPECT_LT(std::abs(u.matrix()(i, i) - std::polar(1.0, -c * m * m / n)), 1e-12);
  }
  Matrix off = u.matrix();
  off.diagonal().setZero();
  EXPECT_LT(max_abs(off), 1e-12);
}

TEST(Models, CueReducesToCoeWithoutYTorsion) {
  EXPECT_LT(max_abs(floquet_cue(30, 1.7, 10.0, 0.0).matrix() - floquet_coe(30, 1.7, 10.0).matrix()), 1e-12);
}

TEST(Models, FloquetOperatorsAreUnitaryForRandomParameters) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    EXPECT_LT(unitarity_error(floquet_coe(12, u(rng), u(rng))), 1e-10);
    EXPECT_LT(unitarity_error(floquet_cue(12, u(rng), u(rng), u(rng))), 1e-10);
    EXPECT_LT(unitarity_error(floquet_cse(13, u(rng), u(rng), u(rng), u(rng))), 1e-10);
  }
}

TEST(Models, CseIsKramersDegenerate) {
  for (int n : {3, 5, 21, 101}) {
    const auto sd = diagonalize(floquet_cse(n, 2.5, 2.5, 5.0, 7.5));
    ASSERT_EQ(sd.dimension() % 2, 0);
    for (Index i = 0; i < sd.dimension(); i += 2) EXPECT_NEAR(sd.values(i), sd.values(i + 1), 1e-8) << n;
  }
  EXPECT_THROW(floquet_cse(4, 1, 1, 1, 1), ArgumentError);
}

TEST(Models, IsingSmallSpectra) {
  const auto a = sorted_values(ising_hamiltonian(2, 1.0, 0.0, 0.0));
  const std::vector<double> ea{-1, -1, 1, 1};
  const auto b = sorted_values(ising_hamiltonian(2, 0.0, 0.0, 1.0));
  const std::vector<double> eb{-2, 0, 0, 2};
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(a[i], ea[i], 1e-12);
    EXPECT_NEAR(b[i], eb[i], 1e-12);
  }
}

TEST(Models, IsingCommutesWithBitReversal) {
  for (int n = 2; n <= 12; ++n)
    EXPECT_LT(symmetry_commutator_norm(ising_hamiltonian(n, 1, 1, 1).matrix(), Symmetry::BitReversal,
                                       BasisDescriptor::full(n)),
              1e-12);
}

TEST(Models, IsingIsOpenChain) {
  // J-only chain of N sites has N-1 bonds: ground energy -(N-1)
  EXPECT_NEAR(sorted_values(ising_hamiltonian(5, 1.0, 0.0, 0.0)).front(), -4.0, 1e-12);
}

TEST(Models, LmgSmallSpectra) {
  const auto a = sorted_values(lmg_hamiltonian(2, 1.0, 0.0));
  const auto b = sorted_values(lmg_hamiltonian(2, 0.0, 1.0));
  const std::vector<double> ea{-1, 0, 1}, eb{-1, -1, 0};
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(a[i], ea[i], 1e-12);
    EXPECT_NEAR(b[i], eb[i], 1e-12);
  }
}

TEST(Models, LmgCommutesWithParity) {
  for (int n : {2, 7, 100})
    EXPECT_LT(symmetry_commutator_norm(lmg_hamiltonian(n, 1.0, 1.0).matrix(), Symmetry::Parity,
                                       BasisDescriptor::symmetric(n)),
              1e-10);
}

TEST(Models, SpecValidation) {
  auto spec = ModelSpec::with_defaults(ModelKind::KickedTopCSE, 10);
  EXPECT_THROW(spec.validate(), ArgumentError);
  spec.n = 11;
  EXPECT_NO_THROW(spec.validate());
  spec.params.erase("lambda2");
  EXPECT_THROW(spec.validate(), ArgumentError);
  auto coe = ModelSpec::with_defaults(ModelKind::KickedTopCOE, 10);
  coe.params["xi"] = 1.0;
  EXPECT_THROW(coe.validate(), ArgumentError);
  EXPECT_THROW(parse_model("kicked"), ArgumentError);
  EXPECT_EQ(parse_model("ising"), ModelKind::ChaoticIsing);
}

TEST(Models, BuildModelDispatch) {
  for (auto k : {ModelKind::KickedTopCOE, ModelKind::KickedTopCUE, ModelKind::LMG}) {
    const auto op = build_model(ModelSpec::with_defaults(k, 6));
    EXPECT_EQ(op.dimension(), 7);
    EXPECT_EQ(op.kind(), is_floquet(k) ? OperatorKind::Unitary : OperatorKind::Hermitian);
  }
  EXPECT_EQ(build_model(ModelSpec::with_defaults(ModelKind::ChaoticIsing, 6)).dimension(), 64);
  EXPECT_THROW(build_model(ModelSpec::with_defaults(ModelKind::ChaoticIsing, 15)), CapacityError);
}
