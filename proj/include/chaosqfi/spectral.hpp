#pragma once

#include "chaosqfi/core.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace chaosqfi {

/// Eigen-decomposition M = V diag(values) V^dagger with orthonormal columns.
///
/// For a Hermitian M, values are energies. For a unitary M, values are the
/// eigenphases phi in (-pi, pi] with M = V diag(e^{i phi}) V^dagger. Values are
/// sorted ascending in both cases.
struct SpectralDecomposition {
  RealVector values;
  Matrix vectors;
  BasisDescriptor basis;
  OperatorKind kind = OperatorKind::Hermitian;

  Index dimension() const noexcept { return values.size(); }

  /// Frequencies w_m with evolution factor e^{-i w_m t}; for a Floquet operator t counts kicks.
  RealVector frequencies() const { return kind == OperatorKind::Hermitian ? values : RealVector(-values); }

  Matrix reconstruct() const {
    if (kind == OperatorKind::Hermitian) return vectors * values.cast<Complex>().asDiagonal() * vectors.adjoint();
    Vector d(values.size());
    for (Index i = 0; i < values.size(); ++i) d(i) = std::polar(1.0, values(i));
    return vectors * d.asDiagonal() * vectors.adjoint();
  }

  /// Rewrites an operator in the eigenbasis: V^dagger O V.
  Matrix to_eigenbasis(const Matrix& op) const { return vectors.adjoint() * op * vectors; }
};

namespace detail {

inline void sort_spectrum(RealVector& values, Matrix& vectors) {
  std::vector<Index> order(values.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return values(a) < values(b); });
  RealVector v(values.size());
  Matrix w(vectors.rows(), vectors.cols());
  for (Index i = 0; i < values.size(); ++i) {
    v(i) = values(order[i]);
    w.col(i) = vectors.col(order[i]);
  }
  values = std::move(v);
  vectors = std::move(w);
}

inline bool is_real(const Matrix& m) { return m.imag().cwiseAbs().maxCoeff() == 0.0; }

}  // namespace detail

inline SpectralDecomposition diagonalize_hermitian(const Matrix& m, const BasisDescriptor& basis) {
  SpectralDecomposition out;
  out.basis = basis;
  out.kind = OperatorKind::Hermitian;
  if (m.size() > 0 && detail::is_real(m)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.real());
    if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
    out.values = es.eigenvalues();
    out.vectors = es.eigenvectors().cast<Complex>();
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver did not converge");
    out.values = es.eigenvalues();
    out.vectors = es.eigenvectors();
  }
  return out;
}

/// Unitary spectra via the complex Schur form, which is diagonal for normal
/// matrices and yields an orthonormal eigenbasis even inside degenerate
/// (e.g. Kramers) eigenspaces.
inline SpectralDecomposition diagonalize_unitary(const Matrix& m, const BasisDescriptor& basis) {
  Eigen::ComplexSchur<Matrix> schur(m, true);
  if (schur.info() != Eigen::Success) throw NumericalError("Schur decomposition did not converge");
  const Matrix& t = schur.matrixT();
  const double off = t.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().cwiseAbs().maxCoeff();
  if (off > 1e-8) throw NumericalError("Schur form of a unitary is not diagonal; operator is not normal");
  SpectralDecomposition out;
  out.basis = basis;
  out.kind = OperatorKind::Unitary;
  out.values.resize(t.rows());
  for (Index i = 0; i < t.rows(); ++i) out.values(i) = std::arg(t(i, i));
  out.vectors = schur.matrixU();
  detail::sort_spectrum(out.values, out.vectors);
  return out;
}

inline SpectralDecomposition diagonalize(const Operator& op) {
  return op.is_hermitian() ? diagonalize_hermitian(op.matrix(), op.basis())
                           : diagonalize_unitary(op.matrix(), op.basis());
}

/// Max-entry reconstruction error |M - V D V^dagger|.
inline double reconstruction_error(const SpectralDecomposition& sd, const Matrix& m) {
  return max_abs(m - sd.reconstruct());
}

}  // namespace chaosqfi
