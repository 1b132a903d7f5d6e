#pragma once

#include "chaosqfi/core.hpp"
#include "chaosqfi/spectral.hpp"
#include "chaosqfi/spin_algebra.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <vector>

namespace chaosqfi {

enum class ModelKind { KickedTopCOE, KickedTopCUE, KickedTopCSE, ChaoticIsing, LMG };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::KickedTopCOE: return "coe";
    case ModelKind::KickedTopCUE: return "cue";
    case ModelKind::KickedTopCSE: return "cse";
    case ModelKind::ChaoticIsing: return "ising";
    case ModelKind::LMG: return "lmg";
  }
  return "?";
}

inline ModelKind parse_model(const std::string& s) {
  for (auto k : {ModelKind::KickedTopCOE, ModelKind::KickedTopCUE, ModelKind::KickedTopCSE, ModelKind::ChaoticIsing,
                 ModelKind::LMG})
    if (s == to_string(k)) return k;
  throw ArgumentError("unknown model '" + s + "' (expected coe, cue, cse, ising or lmg)");
}

/// Parameter names per model, in the order the builders take them.
inline std::vector<std::string> model_parameters(ModelKind k) {
  switch (k) {
    case ModelKind::KickedTopCOE: return {"A", "C"};
    case ModelKind::KickedTopCUE: return {"p", "lambda", "lambda_prime"};
    case ModelKind::KickedTopCSE: return {"lambda0", "lambda1", "lambda2", "lambda3"};
    case ModelKind::ChaoticIsing: return {"J", "h", "lambda"};
    case ModelKind::LMG: return {"Omega", "xi"};
  }
  return {};
}

/// Default parameter values.
inline std::map<std::string, double> default_parameters(ModelKind k) {
  switch (k) {
    case ModelKind::KickedTopCOE: return {{"A", 1.7}, {"C", 10.0}};
    case ModelKind::KickedTopCUE: return {{"p", 1.7}, {"lambda", 10.0}, {"lambda_prime", 0.5}};
    case ModelKind::KickedTopCSE: return {{"lambda0", 2.5}, {"lambda1", 2.5}, {"lambda2", 5.0}, {"lambda3", 7.5}};
    case ModelKind::ChaoticIsing: return {{"J", 1.0}, {"h", 1.0}, {"lambda", 1.0}};
    case ModelKind::LMG: return {{"Omega", 1.0}, {"xi", 1.0}};
  }
  return {};
}

inline bool is_floquet(ModelKind k) {
  return k == ModelKind::KickedTopCOE || k == ModelKind::KickedTopCUE || k == ModelKind::KickedTopCSE;
}

inline Representation model_representation(ModelKind k) {
  return k == ModelKind::ChaoticIsing ? Representation::Full : Representation::Symmetric;
}

struct ModelSpec {
  ModelKind model = ModelKind::KickedTopCOE;
  int n = 10;
  std::map<std::string, double> params;

  static ModelSpec with_defaults(ModelKind k, int n) { return {k, n, default_parameters(k)}; }

  double param(const std::string& name) const {
    const auto it = params.find(name);
    if (it == params.end())
      throw ArgumentError(std::string("model ") + to_string(model) + " is missing parameter '" + name + "'");
    return it->second;
  }

  /// Checks that exactly the model's parameters are present.
  void validate_parameters() const {
    for (const auto& name : model_parameters(model)) (void)param(name);
    for (const auto& [name, value] : params) {
      const auto allowed = model_parameters(model);
      if (std::find(allowed.begin(), allowed.end(), name) == allowed.end())
        throw ArgumentError(std::string("parameter '") + name + "' does not belong to model " + to_string(model));
    }
  }

  void validate() const {
    if (n < 1) throw ArgumentError("qubit count must be positive");
    validate_parameters();
    if (model == ModelKind::KickedTopCSE && n % 2 == 0)
      throw ArgumentError("the CSE kicked top needs odd N (half-integer spin)");
    if (model == ModelKind::ChaoticIsing && n < 2) throw ArgumentError("the Ising chain needs at least two sites");
  }
};

/// exp(-i t H) for Hermitian H through its eigendecomposition.
inline Matrix exp_hermitian(const Matrix& h, double t = 1.0) {
  const auto sd = diagonalize_hermitian(h, BasisDescriptor{Representation::Symmetric, 1, h.rows(), std::nullopt});
  Vector phases(sd.values.size());
  for (Index i = 0; i < sd.values.size(); ++i) phases(i) = std::polar(1.0, -t * sd.values(i));
  return sd.vectors * phases.asDiagonal() * sd.vectors.adjoint();
}

/// U = exp(-i (C/N) Jz^2) exp(-i A Jx), one kick per unit time.
inline Operator floquet_coe(int n, double a, double c) {
  const auto j = build_collective_ops(n, Representation::Symmetric);
  const Matrix& jz = j.z.matrix();
  Matrix u = exp_hermitian((c / n) * jz * jz) * exp_hermitian(a * j.x.matrix());
  return Operator::unitary(std::move(u), j.z.basis());
}

/// U = exp(-i lambda' Jy^2 / N) exp(-i lambda Jz^2 / N) exp(-i p Jx).
inline Operator floquet_cue(int n, double p, double lambda, double lambda_prime) {
  const auto j = build_collective_ops(n, Representation::Symmetric);
  const Matrix& jy = j.y.matrix();
  const Matrix& jz = j.z.matrix();
  Matrix u = exp_hermitian((lambda_prime / n) * jy * jy) * exp_hermitian((lambda / n) * jz * jz) *
             exp_hermitian(p * j.x.matrix());
  return Operator::unitary(std::move(u), j.z.basis());
}

/// U = exp(-i V) exp(-i H0) with H0 = 2 l0 Jz^2 / N and
/// V = 8 l1 Jz^4 / N^3 + 2 l2 (Jx Jz + Jz Jx) / N + 2 l3 (Jx Jy + Jy Jx) / N.
inline Operator floquet_cse(int n, double lambda0, double lambda1, double lambda2, double lambda3) {
  if (n % 2 == 0) throw ArgumentError("the CSE kicked top needs odd N (half-integer spin)");
  const auto j = build_collective_ops(n, Representation::Symmetric);
  const Matrix& jx = j.x.matrix();
  const Matrix& jy = j.y.matrix();
  const Matrix& jz = j.z.matrix();
  const double nn = n;
  const Matrix jz2 = jz * jz;
  const Matrix h0 = (2.0 * lambda0 / nn) * jz2;
  Matrix v = (8.0 * lambda1 / (nn * nn * nn)) * (jz2 * jz2) + (2.0 * lambda2 / nn) * (jx * jz + jz * jx) +
             (2.0 * lambda3 / nn) * (jx * jy + jy * jx);
  v = 0.5 * (v + v.adjoint().eval());
  Matrix u = exp_hermitian(v) * exp_hermitian(h0);
  return Operator::unitary(std::move(u), j.z.basis());
}

/// H = sum_{i<N} J sx_i sx_{i+1} + sum_i (h sx_i + lambda sz_i), open chain.
inline Operator ising_hamiltonian(int n, double coupling, double h, double lambda, const CapacityLimits& caps = {}) {
  if (n < 2) throw ArgumentError("the Ising chain needs at least two sites");
  check_full_capacity(n, caps);
  const auto basis = BasisDescriptor::full(n);
  Matrix m = Matrix::Zero(basis.dimension, basis.dimension);
  for (int i = 0; i + 1 < n; ++i) add_pauli_string(m, n, coupling, {{i, Axis::X}, {i + 1, Axis::X}});
  for (int i = 0; i < n; ++i) {
    add_pauli_string(m, n, h, {{i, Axis::X}});
    add_pauli_string(m, n, lambda, {{i, Axis::Z}});
  }
  return Operator(std::move(m), basis, OperatorKind::Hermitian);
}

/// H = Omega Jz - 2 xi Jx^2 / N in the Dicke basis.
inline Operator lmg_hamiltonian(int n, double omega, double xi) {
  const auto j = build_collective_ops(n, Representation::Symmetric);
  const Matrix& jx = j.x.matrix();
  return Operator::hermitian(omega * j.z.matrix() - (2.0 * xi / n) * (jx * jx), j.z.basis());
}

inline Operator build_model(const ModelSpec& spec, const CapacityLimits& caps = {}) {
  spec.validate();
  switch (spec.model) {
    case ModelKind::KickedTopCOE: return floquet_coe(spec.n, spec.param("A"), spec.param("C"));
    case ModelKind::KickedTopCUE:
      return floquet_cue(spec.n, spec.param("p"), spec.param("lambda"), spec.param("lambda_prime"));
    case ModelKind::KickedTopCSE:
      return floquet_cse(spec.n, spec.param("lambda0"), spec.param("lambda1"), spec.param("lambda2"),
                         spec.param("lambda3"));
    case ModelKind::ChaoticIsing:
      return ising_hamiltonian(spec.n, spec.param("J"), spec.param("h"), spec.param("lambda"), caps);
    case ModelKind::LMG: return lmg_hamiltonian(spec.n, spec.param("Omega"), spec.param("xi"));
  }
  throw ArgumentError("unknown model");
}

}  // namespace chaosqfi
