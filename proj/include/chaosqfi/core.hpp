#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace chaosqfi {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Process exit codes shared by every command-line entry point.
enum class ExitCode : int { Ok = 0, BadArguments = 2, Capacity = 3, Numerical = 4 };

class Error : public std::runtime_error {
public:
  Error(const std::string& what, ExitCode code) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

private:
  ExitCode code_;
};

/// Violated precondition or malformed input.
class ArgumentError : public Error {
public:
  explicit ArgumentError(const std::string& what) : Error(what, ExitCode::BadArguments) {}
};

/// Requested Hilbert space exceeds the configured memory cap.
class CapacityError : public Error {
public:
  explicit CapacityError(const std::string& what) : Error(what, ExitCode::Capacity) {}
};

/// A numerical invariant failed (non-unitarity, missing plateau, ...).
class NumericalError : public Error {
public:
  explicit NumericalError(const std::string& what) : Error(what, ExitCode::Numerical) {}
};

class SymmetryMismatchError : public ArgumentError {
public:
  using ArgumentError::ArgumentError;
};

class BasisMismatchError : public ArgumentError {
public:
  using ArgumentError::ArgumentError;
};

enum class Representation { Symmetric, Full, Sector };

inline const char* to_string(Representation r) {
  switch (r) {
    case Representation::Symmetric: return "symmetric";
    case Representation::Full: return "full";
    case Representation::Sector: return "sector";
  }
  return "?";
}

/// Which Hilbert space a vector or matrix lives in.
///
/// Symmetric: Dicke basis |j, m>, j = N/2, ordered m = +j ... -j.
/// Full: computational basis of N qubits, site 0 is the most significant bit,
///       bit value 0 is spin up.
/// Sector: an eigenspace of a symmetry, carved out of one of the above.
struct BasisDescriptor {
  Representation representation = Representation::Symmetric;
  int qubit_count = 1;
  Index dimension = 2;
  std::optional<std::string> sector_label;

  static BasisDescriptor symmetric(int n) {
    if (n < 1) throw ArgumentError("qubit count must be positive");
    return {Representation::Symmetric, n, static_cast<Index>(n) + 1, std::nullopt};
  }

  static BasisDescriptor full(int n) {
    if (n < 1 || n > 62) throw ArgumentError("qubit count out of range for the full representation");
    return {Representation::Full, n, Index{1} << n, std::nullopt};
  }

  static BasisDescriptor sector(int n, Index dim, std::string label) {
    if (dim < 1) throw ArgumentError("empty symmetry sector");
    return {Representation::Sector, n, dim, std::move(label)};
  }

  friend bool operator==(const BasisDescriptor&, const BasisDescriptor&) = default;
};

inline std::string describe(const BasisDescriptor& b) {
  std::string s = std::string(to_string(b.representation)) + "(N=" + std::to_string(b.qubit_count) +
                  ", dim=" + std::to_string(b.dimension);
  if (b.sector_label) s += ", " + *b.sector_label;
  return s + ")";
}

inline void require_same_basis(const BasisDescriptor& a, const BasisDescriptor& b, const char* where) {
  if (!(a == b))
    throw BasisMismatchError(std::string(where) + ": basis mismatch " + describe(a) + " vs " + describe(b));
}

enum class OperatorKind { Hermitian, Unitary };

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// Dense operator tagged with its basis and kind.
///
/// Hermiticity is checked to 1e-12 relative to the largest entry and unitarity
/// to 1e-10 absolute on U U^dagger - 1.
class Operator {
public:
  static constexpr double hermitian_tol = 1e-12;
  static constexpr double unitary_tol = 1e-10;

  Operator(Matrix m, BasisDescriptor basis, OperatorKind kind)
      : matrix_(std::move(m)), basis_(std::move(basis)), kind_(kind) {
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() != basis_.dimension)
      throw ArgumentError("operator shape does not match basis " + describe(basis_));
    if (kind_ == OperatorKind::Hermitian) {
      const double scale = std::max(1.0, max_abs(matrix_));
      if (max_abs(matrix_ - matrix_.adjoint()) > hermitian_tol * scale)
        throw NumericalError("operator is not Hermitian");
    } else {
      const Matrix id = Matrix::Identity(matrix_.rows(), matrix_.cols());
      if (max_abs(matrix_ * matrix_.adjoint() - id) > unitary_tol)
        throw NumericalError("operator is not unitary");
    }
  }

  static Operator hermitian(Matrix m, BasisDescriptor b) {
    // symmetrize away roundoff from products such as AB + BA
    Matrix h = 0.5 * (m + m.adjoint().eval());
    const double scale = std::max(1.0, max_abs(m));
    if (max_abs(m - h) > 1e-10 * scale) throw NumericalError("operator is not Hermitian");
    return Operator(std::move(h), std::move(b), OperatorKind::Hermitian);
  }

  static Operator unitary(Matrix m, BasisDescriptor b) {
    return Operator(std::move(m), std::move(b), OperatorKind::Unitary);
  }

  const Matrix& matrix() const noexcept { return matrix_; }
  const BasisDescriptor& basis() const noexcept { return basis_; }
  OperatorKind kind() const noexcept { return kind_; }
  Index dimension() const noexcept { return matrix_.rows(); }
  bool is_hermitian() const noexcept { return kind_ == OperatorKind::Hermitian; }

private:
  Matrix matrix_;
  BasisDescriptor basis_;
  OperatorKind kind_;
};

/// Normalized pure state.
class StateVector {
public:
  static constexpr double norm_tol = 1e-12;

  StateVector(Vector amplitudes, BasisDescriptor basis)
      : amplitudes_(std::move(amplitudes)), basis_(std::move(basis)) {
    if (amplitudes_.size() != basis_.dimension)
      throw ArgumentError("state length does not match basis " + describe(basis_));
    if (std::abs(amplitudes_.squaredNorm() - 1.0) > norm_tol * std::max<double>(1.0, amplitudes_.size() / 1024.0))
      throw NumericalError("state is not normalized");
  }

  static StateVector normalized(Vector v, BasisDescriptor basis) {
    const double n = v.norm();
    if (!(n > 0.0)) throw ArgumentError("cannot normalize a zero vector");
    v /= n;
    return StateVector(std::move(v), std::move(basis));
  }

  const Vector& amplitudes() const noexcept { return amplitudes_; }
  const BasisDescriptor& basis() const noexcept { return basis_; }
  Index dimension() const noexcept { return amplitudes_.size(); }

private:
  Vector amplitudes_;
  BasisDescriptor basis_;
};

}  // namespace chaosqfi
