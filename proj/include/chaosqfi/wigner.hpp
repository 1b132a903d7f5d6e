#pragma once

#include "chaosqfi/core.hpp"
#include "chaosqfi/dynamics.hpp"
#include "chaosqfi/parallel.hpp"
#include "chaosqfi/spectral.hpp"
#include "chaosqfi/spin_algebra.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <vector>

namespace chaosqfi {

/// Real field sampled on a (theta, phi) grid with theta at cell midpoints.
struct SphericalField {
  std::vector<double> theta;
  std::vector<double> phi;
  Eigen::MatrixXd values;  // rows theta, cols phi

  /// Midpoint quadrature of the field over the sphere.
  double integral() const {
    if (theta.empty() || phi.empty()) return 0.0;
    const double dtheta = std::numbers::pi / static_cast<double>(theta.size());
    const double dphi = 2.0 * std::numbers::pi / static_cast<double>(phi.size());
    double s = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) s += values.row(static_cast<Index>(i)).sum() * std::sin(theta[i]);
    return s * dtheta * dphi;
  }

  /// Grid indices of the global maximum.
  std::pair<Index, Index> argmax() const {
    Index r = 0, c = 0;
    values.maxCoeff(&r, &c);
    return {r, c};
  }
};

inline constexpr int max_wigner_qubits = 200;

namespace detail {

/// Orthonormal polynomials p_0..p_{K-1} on the points m = j, j-1, ..., -j
/// (Dicke order), by Lanczos with full reorthogonalization; column k has degree k
/// and positive leading coefficient.
inline Eigen::MatrixXd gram_polynomials(Index k) {
  const double j = 0.5 * static_cast<double>(k - 1);
  Eigen::VectorXd m(k);
  for (Index i = 0; i < k; ++i) m(i) = j - static_cast<double>(i);
  Eigen::MatrixXd p(k, k);
  p.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(k)));
  for (Index d = 1; d < k; ++d) {
    Eigen::VectorXd v = m.cwiseProduct(p.col(d - 1));
    for (int pass = 0; pass < 2; ++pass) v -= p.leftCols(d) * (p.leftCols(d).transpose() * v);
    p.col(d) = v / v.norm();
  }
  return p;
}

}  // namespace detail

/// Diagonal of the Wigner kernel at the north pole, normalized so that the
/// field integrates to one over the sphere.
inline Eigen::VectorXd wigner_kernel_diagonal(Index k) {
  const Eigen::MatrixXd p = detail::gram_polynomials(k);
  Eigen::VectorXd w(p.cols());
  for (Index d = 0; d < p.cols(); ++d) w(d) = std::sqrt(2.0 * static_cast<double>(d) + 1.0);
  return (std::sqrt(static_cast<double>(k)) / (4.0 * std::numbers::pi)) * (p * w);
}

namespace detail {

inline void require_symmetric_state(const StateVector& psi) {
  if (psi.basis().representation != Representation::Symmetric)
    throw BasisMismatchError("Wigner fields are defined for states in the symmetric representation");
  if (psi.basis().qubit_count > max_wigner_qubits)
    throw CapacityError("Wigner fields are limited to N <= " + std::to_string(max_wigner_qubits));
}

}  // namespace detail

/// Evaluates W(theta, phi) = sum_m Delta_m |<j m| e^{i theta Jy} e^{i phi Jz} |psi>|^2.
class WignerEvaluator {
 public:
  explicit WignerEvaluator(const StateVector& psi) : psi_(psi) {
    detail::require_symmetric_state(psi);
    const int n = psi.basis().qubit_count;
    const auto j = build_collective_ops(n, Representation::Symmetric);
    auto sd = diagonalize_hermitian(j.y.matrix(), j.y.basis());
    jy_values_ = std::move(sd.values);
    jy_vectors_ = std::move(sd.vectors);
    jz_diag_ = j.z.matrix().diagonal().real();
    kernel_ = wigner_kernel_diagonal(psi.dimension());
  }

  /// e^{i theta Jy}
  Matrix rotation_y(double theta) const {
    Vector ph(jy_values_.size());
    for (Index i = 0; i < ph.size(); ++i) ph(i) = std::polar(1.0, theta * jy_values_(i));
    return jy_vectors_ * ph.asDiagonal() * jy_vectors_.adjoint();
  }

  double operator()(double theta, double phi) const {
    return kernel_.dot((rotation_y(theta) * phased(phi)).cwiseAbs2());
  }

  /// One theta row for every phi, as a single matrix product.
  Eigen::VectorXd row(double theta, const std::vector<double>& phis) const {
    Matrix cols(psi_.dimension(), static_cast<Index>(phis.size()));
    for (Index c = 0; c < cols.cols(); ++c) cols.col(c) = phased(phis[c]);
    const Matrix rotated = rotation_y(theta) * cols;
    return rotated.cwiseAbs2().transpose() * kernel_;
  }

  const Eigen::VectorXd& kernel() const noexcept { return kernel_; }

 private:
  Vector phased(double phi) const {
    Vector v = psi_.amplitudes();
    for (Index i = 0; i < v.size(); ++i) v(i) *= std::polar(1.0, phi * jz_diag_(i));
    return v;
  }

  StateVector psi_;
  RealVector jy_values_;
  Matrix jy_vectors_;
  RealVector jz_diag_;
  Eigen::VectorXd kernel_;
};

inline double wigner_at(const StateVector& psi, double theta, double phi) { return WignerEvaluator(psi)(theta, phi); }

inline SphericalField wigner_grid(const StateVector& psi, int n_theta = 64, int n_phi = 128, unsigned threads = 1) {
  if (n_theta < 64 || n_phi < 64) throw ArgumentError("Wigner grid needs at least 64 points per angle");
  const WignerEvaluator eval(psi);
  SphericalField f;
  for (int i = 0; i < n_theta; ++i) f.theta.push_back((i + 0.5) * std::numbers::pi / n_theta);
  for (int i = 0; i < n_phi; ++i) f.phi.push_back(2.0 * std::numbers::pi * i / n_phi);
  f.values.resize(n_theta, n_phi);
  parallel_for(static_cast<std::size_t>(n_theta), threads, [&](std::size_t i) {
    f.values.row(static_cast<Index>(i)) = eval.row(f.theta[i], f.phi).transpose();
  });
  return f;
}

inline void write_field_csv(std::ostream& os, const SphericalField& f) {
  os << "theta,phi,W\n";
  char buf[96];
  for (std::size_t i = 0; i < f.theta.size(); ++i)
    for (std::size_t k = 0; k < f.phi.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.12g\n", f.theta[i], f.phi[k],
                    f.values(static_cast<Index>(i), static_cast<Index>(k)));
      os << buf;
    }
}

struct RotationWidth {
  double angle = std::numbers::pi;
  bool crossed = false;
};

/// Smallest theta > 0 with |<psi| e^{i theta J_axis} |psi>|^2 <= 1/2, found by
/// a uniform scan followed by bisection. Without a crossing below pi the
/// result is pi with crossed = false.
inline RotationWidth rotation_fidelity_width(const StateVector& psi, Axis axis, const CapacityLimits& caps = {}) {
  const auto& b = psi.basis();
  if (b.representation == Representation::Sector) throw BasisMismatchError("rotation width needs a full or symmetric state");
  const RotationFidelity fid(collective_operator(b.qubit_count, axis, b.representation, caps));
  const auto w = fid.weights(psi);
  const Index scan = std::max<Index>(1024, 32 * psi.dimension());
  const double h = std::numbers::pi / static_cast<double>(scan);
  for (Index s = 1; s <= scan; ++s) {
    if (fid(w, s * h) > 0.5) continue;
    double lo = (s - 1) * h, hi = s * h;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (fid(w, mid) > 0.5 ? lo : hi) = mid;
    }
    return {hi, true};
  }
  return {};
}

}  // namespace chaosqfi
