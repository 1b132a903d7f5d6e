#pragma once

#include "chaosqfi/core.hpp"
#include "chaosqfi/dynamics.hpp"
#include "chaosqfi/spectral.hpp"

#include <cmath>

namespace chaosqfi {

/// Two-term universal value 4 Tr[O^2]/K - 4 Tr[O]^2/K^2 of the long-time QFI,
/// with the scale Tr[O^2]/K^2 of the neglected correction.
struct Prediction {
  Index K = 0;
  double trace_O2 = 0.0;
  double trace_O = 0.0;
  double leading_value = 0.0;
  double remainder_scale = 0.0;
};

inline Prediction universal_qfi(const Matrix& o) {
  if (o.rows() != o.cols() || o.rows() == 0) throw ArgumentError("generator must be a non-empty square matrix");
  if (max_abs(o - o.adjoint()) > 1e-10 * std::max(1.0, max_abs(o))) throw ArgumentError("generator must be Hermitian");
  Prediction p;
  p.K = o.rows();
  const double k = static_cast<double>(p.K);
  p.trace_O2 = o.squaredNorm();
  p.trace_O = o.trace().real();
  p.leading_value = 4.0 * p.trace_O2 / k - 4.0 * p.trace_O * p.trace_O / (k * k);
  p.remainder_scale = p.trace_O2 / (k * k);
  return p;
}

inline Prediction universal_qfi(const Operator& o) {
  if (!o.is_hermitian()) throw ArgumentError("generator must be Hermitian");
  return universal_qfi(o.matrix());
}

/// Orthonormal basis of the Krylov space of psi0: the normalized projections of
/// psi0 onto each (cluster-merged) eigenspace it overlaps.
inline Matrix krylov_basis(const SpectralDecomposition& spec, const StateVector& psi0, const KrylovOptions& opts = {}) {
  require_same_basis(spec.basis, psi0.basis(), "krylov_basis");
  const Vector a = spec.vectors.adjoint() * psi0.amplitudes();
  std::vector<Vector> cols;
  for (const auto& cluster : eigenspace_clusters(spec, opts.merge_tol)) {
    Vector v = Vector::Zero(spec.dimension());
    for (Index m : cluster) v += a(m) * spec.vectors.col(m);
    const double w = v.norm();
    if (w * w > opts.tol * opts.tol) cols.push_back(v / w);
  }
  Matrix q(spec.dimension(), static_cast<Index>(cols.size()));
  for (Index c = 0; c < q.cols(); ++c) q.col(c) = cols[c];
  return q;
}

/// Universal prediction for O restricted to the Krylov space of psi0.
inline Prediction universal_qfi(const Operator& o, const SpectralDecomposition& spec, const StateVector& psi0,
                                const KrylovOptions& opts = {}) {
  require_same_basis(o.basis(), spec.basis, "universal_qfi");
  const Matrix q = krylov_basis(spec, psi0, opts);
  return universal_qfi(Matrix(q.adjoint() * o.matrix() * q));
}

/// Chaotic plateau of F[J_alpha] in the (N+1)-dimensional symmetric space.
inline double symmetric_prediction(int n) {
  if (n < 1) throw ArgumentError("qubit count must be positive");
  return n * (n + 2.0) / 3.0;
}

/// Chaotic plateau of F[J_alpha] in the full 2^N space.
inline double full_space_prediction(int n) {
  if (n < 1) throw ArgumentError("qubit count must be positive");
  return static_cast<double>(n);
}

/// Largest certified cluster size: one more than the largest k whose
/// k-producible bound s k^2 + r^2 (s = floor(N/k), r = N - s k) is strictly
/// exceeded by F. Returns 1 when F does not exceed N.
inline int entanglement_depth(double f, int n) {
  if (n < 1) throw ArgumentError("qubit count must be positive");
  if (!(f >= 0.0)) throw ArgumentError("QFI must be non-negative");
  const double nn = static_cast<double>(n);
  if (f > nn * nn) throw ArgumentError("QFI exceeds the Heisenberg limit N^2");
  int depth = 1;
  for (int k = 1; k < n; ++k) {
    const int s = n / k;
    const int r = n - s * k;
    const double bound = static_cast<double>(s) * k * k + static_cast<double>(r) * r;
    if (f > bound) depth = k + 1;
  }
  return depth;
}

}  // namespace chaosqfi
