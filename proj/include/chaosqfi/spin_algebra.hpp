#pragma once

#include "chaosqfi/core.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace chaosqfi {

enum class Axis { X = 0, Y = 1, Z = 2 };

inline constexpr std::array<Axis, 3> all_axes{Axis::X, Axis::Y, Axis::Z};

inline char axis_name(Axis a) { return "xyz"[static_cast<int>(a)]; }

inline Axis parse_axis(char c) {
  switch (c) {
    case 'x': case 'X': return Axis::X;
    case 'y': case 'Y': return Axis::Y;
    case 'z': case 'Z': return Axis::Z;
  }
  throw ArgumentError(std::string("unknown axis '") + c + "'");
}

/// Largest qubit count for which dense Full-representation matrices are built.
struct CapacityLimits {
  int max_full_qubits = 14;
};

inline void check_full_capacity(int n, const CapacityLimits& caps) {
  if (n > caps.max_full_qubits)
    throw CapacityError("full representation with N=" + std::to_string(n) + " exceeds the cap of " +
                        std::to_string(caps.max_full_qubits) + " qubits");
}

struct CollectiveOps {
  Operator x, y, z;

  const Operator& operator[](Axis a) const {
    switch (a) {
      case Axis::X: return x;
      case Axis::Y: return y;
      default: return z;
    }
  }
};

namespace detail {

inline Index bit_of_site(int n, int site) { return Index{1} << (n - 1 - site); }

// <j, m-1| J_- |j, m> = sqrt(j(j+1) - m(m-1)); row i holds m = j - i.
inline Matrix dicke_lowering(int n) {
  const double j = 0.5 * n;
  const Index dim = n + 1;
  Matrix lower = Matrix::Zero(dim, dim);
  for (Index i = 0; i + 1 < dim; ++i) {
    const double m = j - static_cast<double>(i);
    lower(i + 1, i) = std::sqrt(j * (j + 1.0) - m * (m - 1.0));
  }
  return lower;
}

}  // namespace detail

/// Single collective component J_axis = sum_j sigma_axis^(j) / 2.
inline Operator collective_operator(int n, Axis axis, Representation rep, const CapacityLimits& caps = {}) {
  if (rep == Representation::Symmetric) {
    const auto basis = BasisDescriptor::symmetric(n);
    const double j = 0.5 * n;
    if (axis == Axis::Z) {
      Matrix jz = Matrix::Zero(n + 1, n + 1);
      for (Index i = 0; i <= n; ++i) jz(i, i) = j - static_cast<double>(i);
      return Operator(std::move(jz), basis, OperatorKind::Hermitian);
    }
    const Matrix lower = detail::dicke_lowering(n);
    const Matrix raise = lower.adjoint();
    if (axis == Axis::X) return Operator(0.5 * (raise + lower), basis, OperatorKind::Hermitian);
    return Operator(Complex(0.0, -0.5) * (raise - lower), basis, OperatorKind::Hermitian);
  }
  if (rep != Representation::Full) throw ArgumentError("collective operators need the symmetric or full representation");

  check_full_capacity(n, caps);
  const auto basis = BasisDescriptor::full(n);
  const Index dim = basis.dimension;
  Matrix m = Matrix::Zero(dim, dim);
  for (Index s = 0; s < dim; ++s) {
    for (int site = 0; site < n; ++site) {
      const Index bit = detail::bit_of_site(n, site);
      const bool down = (s & bit) != 0;
      switch (axis) {
        case Axis::Z: m(s, s) += down ? -0.5 : 0.5; break;
        case Axis::X: m(s ^ bit, s) += 0.5; break;
        // sigma_y |up> = i |down>, sigma_y |down> = -i |up>
        case Axis::Y: m(s ^ bit, s) += down ? Complex(0.0, -0.5) : Complex(0.0, 0.5); break;
      }
    }
  }
  return Operator(std::move(m), basis, OperatorKind::Hermitian);
}

inline CollectiveOps build_collective_ops(int n, Representation rep, const CapacityLimits& caps = {}) {
  if (n < 1) throw ArgumentError("qubit count must be positive");
  return {collective_operator(n, Axis::X, rep, caps), collective_operator(n, Axis::Y, rep, caps),
          collective_operator(n, Axis::Z, rep, caps)};
}

/// One factor of a Pauli string: a Pauli matrix on a given site.
struct PauliFactor {
  int site;
  Axis axis;
};

/// Adds coefficient * prod_k sigma_{axis_k}^{(site_k)} to a Full-representation matrix.
inline void add_pauli_string(Matrix& m, int n, Complex coefficient, const std::vector<PauliFactor>& factors) {
  const Index dim = Index{1} << n;
  if (m.rows() != dim || m.cols() != dim) throw ArgumentError("matrix does not match the full representation");
  for (Index s = 0; s < dim; ++s) {
    Index target = s;
    Complex phase = coefficient;
    // apply factors right to left so the leftmost factor acts last
    for (auto it = factors.rbegin(); it != factors.rend(); ++it) {
      if (it->site < 0 || it->site >= n) throw ArgumentError("Pauli site out of range");
      const Index bit = detail::bit_of_site(n, it->site);
      const bool down = (target & bit) != 0;
      switch (it->axis) {
        case Axis::X: target ^= bit; break;
        case Axis::Y: phase *= down ? Complex(0.0, -1.0) : Complex(0.0, 1.0); target ^= bit; break;
        case Axis::Z: if (down) phase = -phase; break;
      }
    }
    m(target, s) += phase;
  }
}

inline Operator pauli_string_operator(int n, const std::vector<PauliFactor>& factors, const CapacityLimits& caps = {}) {
  check_full_capacity(n, caps);
  const auto basis = BasisDescriptor::full(n);
  Matrix m = Matrix::Zero(basis.dimension, basis.dimension);
  add_pauli_string(m, n, 1.0, factors);
  return Operator(std::move(m), basis, OperatorKind::Hermitian);
}

/// Rotated maximal-weight state e^{-i phi Jz} e^{-i theta Jy} |j, j>, up to a global phase.
///
/// <J> points along (sin theta cos phi, sin theta sin phi, cos theta).
inline StateVector coherent_spin_state(int n, double theta, double phi, Representation rep,
                                       const CapacityLimits& caps = {}) {
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  if (rep == Representation::Symmetric) {
    const auto basis = BasisDescriptor::symmetric(n);
    Vector amp = Vector::Zero(n + 1);
    // k = j - m spins flipped: sqrt(C(N,k)) c^(N-k) s^k e^{i k phi}, evaluated in logs
    const double lc = std::log(std::abs(c));
    const double ls = std::log(std::abs(s));
    for (int k = 0; k <= n; ++k) {
      if ((k < n && c == 0.0) || (k > 0 && s == 0.0)) continue;
      const double log_binom = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
      double logmag = 0.5 * log_binom;
      if (k < n) logmag += (n - k) * lc;
      if (k > 0) logmag += k * ls;
      double sign = 1.0;
      if (c < 0.0 && (n - k) % 2 == 1) sign = -sign;
      if (s < 0.0 && k % 2 == 1) sign = -sign;
      amp(k) = sign * std::exp(logmag) * std::polar(1.0, k * phi);
    }
    return StateVector::normalized(std::move(amp), basis);
  }
  if (rep != Representation::Full) throw ArgumentError("coherent states need the symmetric or full representation");
  check_full_capacity(n, caps);
  const auto basis = BasisDescriptor::full(n);
  std::vector<Complex> powers(n + 1);
  for (int k = 0; k <= n; ++k) powers[k] = std::pow(c, n - k) * std::pow(s, k) * std::polar(1.0, k * phi);
  Vector amp(basis.dimension);
  for (Index idx = 0; idx < basis.dimension; ++idx)
    amp(idx) = powers[std::popcount(static_cast<std::uint64_t>(idx))];
  return StateVector::normalized(std::move(amp), basis);
}

// ---------------------------------------------------------------------------
// Symmetry sectors

/// Discrete Z2 symmetries used to block-diagonalize Hamiltonians and Floquet operators.
///
/// BitReversal: site i <-> N-1-i (Full only).
/// Parity: prod_i sigma_z^(i); in the Dicke basis this is (-1)^(j-m).
/// SpinFlip: prod_i sigma_x^(i); in the Dicke basis this is m <-> -m, which
///           equals exp(-i pi Jx) up to a global phase.
enum class Symmetry { BitReversal, Parity, SpinFlip };

inline const char* to_string(Symmetry s) {
  switch (s) {
    case Symmetry::BitReversal: return "bit-reversal";
    case Symmetry::Parity: return "parity";
    case Symmetry::SpinFlip: return "spin-flip";
  }
  return "?";
}

/// Basis-state action S|s> = sign(s) |image(s)>, an involution.
struct SignedPermutation {
  std::vector<Index> image;
  std::vector<int> sign;
};

inline SignedPermutation symmetry_action(Symmetry sym, const BasisDescriptor& basis) {
  const Index dim = basis.dimension;
  const int n = basis.qubit_count;
  SignedPermutation p{std::vector<Index>(dim), std::vector<int>(dim, 1)};
  if (basis.representation == Representation::Full) {
    for (Index s = 0; s < dim; ++s) {
      switch (sym) {
        case Symmetry::BitReversal: {
          Index r = 0;
          for (int i = 0; i < n; ++i)
            if (s & (Index{1} << i)) r |= Index{1} << (n - 1 - i);
          p.image[s] = r;
          break;
        }
        case Symmetry::Parity:
          p.image[s] = s;
          p.sign[s] = (std::popcount(static_cast<std::uint64_t>(s)) % 2 == 0) ? 1 : -1;
          break;
        case Symmetry::SpinFlip: p.image[s] = (dim - 1) ^ s; break;
      }
    }
    return p;
  }
  if (basis.representation == Representation::Symmetric) {
    for (Index i = 0; i < dim; ++i) {
      switch (sym) {
        case Symmetry::BitReversal:
          throw ArgumentError("bit reversal acts trivially on the symmetric subspace");
        case Symmetry::Parity:
          p.image[i] = i;
          p.sign[i] = (i % 2 == 0) ? 1 : -1;
          break;
        case Symmetry::SpinFlip: p.image[i] = dim - 1 - i; break;
      }
    }
    return p;
  }
  throw ArgumentError("symmetry sectors cannot be nested");
}

/// Orthonormal sector basis: each vector is |a> (single) or (|a> + c|b>)/sqrt(2), c = +-1.
class SymmetrySector {
public:
  struct Element {
    Index first;
    Index second;  // == first for a single basis state
    double coef_second;
  };

  SymmetrySector(BasisDescriptor parent, Symmetry sym, int eigenvalue, std::vector<Element> elems)
      : parent_(std::move(parent)), symmetry_(sym), eigenvalue_(eigenvalue), elements_(std::move(elems)),
        basis_(BasisDescriptor::sector(parent_.qubit_count, static_cast<Index>(elements_.size()),
                                       std::string(to_string(sym)) + (eigenvalue > 0 ? "-even" : "-odd"))) {}

  const BasisDescriptor& parent() const noexcept { return parent_; }
  const BasisDescriptor& basis() const noexcept { return basis_; }
  Symmetry symmetry() const noexcept { return symmetry_; }
  int eigenvalue() const noexcept { return eigenvalue_; }
  Index dimension() const noexcept { return basis_.dimension; }
  const std::vector<Element>& elements() const noexcept { return elements_; }

  /// P^dagger M P for a parent-space matrix M.
  Matrix project(const Matrix& m) const {
    const Index d = dimension();
    if (m.rows() != parent_.dimension) throw BasisMismatchError("matrix does not live in the sector's parent space");
    // columns first: M P
    Matrix mp(m.rows(), d);
    for (Index k = 0; k < d; ++k) mp.col(k) = embed_column(m, k);
    Matrix out(d, d);
    for (Index k = 0; k < d; ++k) {
      const auto& e = elements_[k];
      if (e.first == e.second) {
        out.row(k) = mp.row(e.first);
      } else {
        out.row(k) = std::numbers::sqrt2 * 0.5 * (mp.row(e.first) + e.coef_second * mp.row(e.second));
      }
    }
    return out;
  }

  Operator project(const Operator& op) const {
    require_same_basis(op.basis(), parent_, "SymmetrySector::project");
    return Operator(project(op.matrix()), basis_, op.kind());
  }

  Vector project(const Vector& v) const {
    Vector out(dimension());
    for (Index k = 0; k < dimension(); ++k) {
      const auto& e = elements_[k];
      out(k) = e.first == e.second ? v(e.first) : std::numbers::sqrt2 * 0.5 * (v(e.first) + e.coef_second * v(e.second));
    }
    return out;
  }

  /// Component of a parent-space state inside this sector, renormalized.
  StateVector project(const StateVector& psi) const {
    require_same_basis(psi.basis(), parent_, "SymmetrySector::project");
    return StateVector::normalized(project(psi.amplitudes()), basis_);
  }

  /// Weight of a parent-space state inside this sector.
  double weight(const StateVector& psi) const { return project(psi.amplitudes()).squaredNorm(); }

  Vector embed(const Vector& v) const {
    Vector out = Vector::Zero(parent_.dimension);
    for (Index k = 0; k < dimension(); ++k) {
      const auto& e = elements_[k];
      if (e.first == e.second) {
        out(e.first) += v(k);
      } else {
        out(e.first) += std::numbers::sqrt2 * 0.5 * v(k);
        out(e.second) += std::numbers::sqrt2 * 0.5 * e.coef_second * v(k);
      }
    }
    return out;
  }

private:
  Vector embed_column(const Matrix& m, Index k) const {
    const auto& e = elements_[k];
    if (e.first == e.second) return m.col(e.first);
    return std::numbers::sqrt2 * 0.5 * (m.col(e.first) + e.coef_second * m.col(e.second));
  }

  BasisDescriptor parent_;
  Symmetry symmetry_;
  int eigenvalue_;
  std::vector<Element> elements_;
  BasisDescriptor basis_;
};

/// Builds the eigenvalue-(+1 or -1) sector of a symmetry from symmetrized basis pairs.
inline SymmetrySector make_sector(const BasisDescriptor& parent, Symmetry sym, int eigenvalue) {
  if (eigenvalue != 1 && eigenvalue != -1) throw ArgumentError("sector eigenvalue must be +1 or -1");
  const auto act = symmetry_action(sym, parent);
  std::vector<SymmetrySector::Element> elems;
  for (Index s = 0; s < parent.dimension; ++s) {
    const Index t = act.image[s];
    if (t == s) {
      if (act.sign[s] == eigenvalue) elems.push_back({s, s, 1.0});
    } else if (s < t) {
      // S(|s> + c|t>) = sign(s)|t> + c sign(t)|s>; eigenvalue e needs c = e sign(s)
      elems.push_back({s, t, static_cast<double>(eigenvalue * act.sign[s])});
    }
  }
  return SymmetrySector(parent, sym, eigenvalue, std::move(elems));
}

/// Frobenius norm of [M, S] relative to that of M.
inline double symmetry_commutator_norm(const Matrix& m, Symmetry sym, const BasisDescriptor& basis) {
  const auto act = symmetry_action(sym, basis);
  // (S M S^dagger)_{image(a), image(b)} = sign(a) sign(b) M_{a b}
  double acc = 0.0;
  for (Index b = 0; b < m.cols(); ++b)
    for (Index a = 0; a < m.rows(); ++a) {
      const Complex rotated = static_cast<double>(act.sign[a] * act.sign[b]) * m(a, b);
      acc += std::norm(m(act.image[a], act.image[b]) - rotated);
    }
  return std::sqrt(acc) / std::max(1.0, m.norm());
}

struct SectorProjection {
  Operator block;
  SymmetrySector sector;
};

/// Restricts an operator to one eigensector of a symmetry it commutes with.
inline SectorProjection symmetry_sector(const Operator& h, Symmetry sym, int eigenvalue = 1, double tol = 1e-9) {
  const double comm = symmetry_commutator_norm(h.matrix(), sym, h.basis());
  if (comm > tol)
    throw SymmetryMismatchError(std::string("operator does not commute with ") + to_string(sym) +
                                " (relative commutator norm " + std::to_string(comm) + ")");
  auto sector = make_sector(h.basis(), sym, eigenvalue);
  auto block = sector.project(h);
  return {std::move(block), std::move(sector)};
}

}  // namespace chaosqfi
