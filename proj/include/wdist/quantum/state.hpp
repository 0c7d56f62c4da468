#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "wdist/core/config.hpp"
#include "wdist/quantum/linalg.hpp"

namespace wdist {

inline constexpr double kStateTolerance = 1e-10;

inline int qubits_for_dimension(Eigen::Index dim) {
  if (dim < 2 || (dim & (dim - 1)) != 0)
    throw DimensionError("matrix dimension " + std::to_string(dim) + " is not a power of two >= 2");
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  return n;
}

/// d x d Hermitian, PSD, unit-trace matrix on n qubits (d = 2^n). Qubit 0 is
/// the most significant bit of the computational-basis index.
class DensityMatrix {
 public:
  DensityMatrix() = default;

  /// Wraps a matrix the caller guarantees to be a state. Only the shape is checked.
  explicit DensityMatrix(CMatrix data) : data_(std::move(data)) {
    if (data_.rows() != data_.cols()) throw DimensionError("DensityMatrix: matrix must be square");
    n_qubits_ = qubits_for_dimension(data_.rows());
  }

  /// Wraps and verifies every state invariant.
  static DensityMatrix checked(CMatrix data, double tol = kStateTolerance) {
    DensityMatrix rho(std::move(data));
    rho.validate(tol);
    return rho;
  }

  static DensityMatrix from_vector(const CVector& psi) {
    return DensityMatrix(CMatrix(psi * psi.adjoint()));
  }

  static DensityMatrix maximally_mixed(int n) {
    check_qubits(n, "maximally_mixed");
    const Eigen::Index d = Eigen::Index{1} << n;
    return DensityMatrix(CMatrix::Identity(d, d) / static_cast<double>(d));
  }

  static DensityMatrix basis_state(int n, Eigen::Index k) {
    const Eigen::Index d = Eigen::Index{1} << n;
    CMatrix m = CMatrix::Zero(d, d);
    m(k, k) = 1.0;
    return DensityMatrix(std::move(m));
  }

  int n_qubits() const noexcept { return n_qubits_; }
  Eigen::Index dim() const noexcept { return data_.rows(); }
  const CMatrix& matrix() const noexcept { return data_; }

  double hermiticity_error() const { return max_abs(data_ - data_.adjoint()); }
  double trace_error() const { return std::abs(data_.trace() - Complex(1.0, 0.0)); }
  double min_eigenvalue() const { return hermitian_eigenvalues(data_).minCoeff(); }

  void validate(double tol = kStateTolerance) const {
    if (hermiticity_error() > tol) throw ParameterError("DensityMatrix: not Hermitian");
    if (trace_error() > tol) throw ParameterError("DensityMatrix: trace differs from 1");
    if (min_eigenvalue() < -tol) throw ParameterError("DensityMatrix: not positive semidefinite");
  }

 private:
  CMatrix data_;
  int n_qubits_ = 0;
};

class UnitaryGate {
 public:
  UnitaryGate() = default;

  explicit UnitaryGate(CMatrix data) : data_(std::move(data)) {
    if (data_.rows() != data_.cols()) throw DimensionError("UnitaryGate: matrix must be square");
    n_qubits_ = qubits_for_dimension(data_.rows());
  }

  static UnitaryGate checked(CMatrix data, double tol = kStateTolerance) {
    UnitaryGate u(std::move(data));
    if (u.unitarity_error() > tol) throw ParameterError("UnitaryGate: matrix is not unitary");
    return u;
  }

  static UnitaryGate identity(int n) {
    check_qubits(n, "identity");
    const Eigen::Index d = Eigen::Index{1} << n;
    return UnitaryGate(CMatrix::Identity(d, d));
  }

  int n_qubits() const noexcept { return n_qubits_; }
  Eigen::Index dim() const noexcept { return data_.rows(); }
  const CMatrix& matrix() const noexcept { return data_; }

  double unitarity_error() const {
    return max_abs(data_.adjoint() * data_ - CMatrix::Identity(dim(), dim()));
  }

  UnitaryGate adjoint() const { return UnitaryGate(CMatrix(data_.adjoint())); }

  /// U ρ U†
  DensityMatrix conjugate(const DensityMatrix& rho) const {
    if (rho.dim() != dim()) throw ParameterError("UnitaryGate::conjugate: dimension mismatch");
    return DensityMatrix(CMatrix(data_ * rho.matrix() * data_.adjoint()));
  }

  friend UnitaryGate operator*(const UnitaryGate& a, const UnitaryGate& b) {
    if (a.dim() != b.dim()) throw ParameterError("UnitaryGate product: dimension mismatch");
    return UnitaryGate(CMatrix(a.data_ * b.data_));
  }

 private:
  CMatrix data_;
  int n_qubits_ = 0;
};

/// Σ_k p_k V_k (·) V_k†
class MixedUnitaryChannel {
 public:
  struct Component {
    double probability;
    UnitaryGate gate;
  };

  MixedUnitaryChannel() = default;

  explicit MixedUnitaryChannel(std::vector<Component> components) : components_(std::move(components)) {
    if (components_.empty()) throw ParameterError("MixedUnitaryChannel: no components");
    double total = 0.0;
    for (const auto& c : components_) {
      if (c.probability < 0.0 || c.probability > 1.0)
        throw ParameterError("MixedUnitaryChannel: probability outside [0,1]");
      if (c.gate.n_qubits() != components_.front().gate.n_qubits())
        throw ParameterError("MixedUnitaryChannel: gates act on different qubit counts");
      total += c.probability;
    }
    if (std::abs(total - 1.0) > 1e-10) throw ParameterError("MixedUnitaryChannel: probabilities do not sum to 1");
  }

  static MixedUnitaryChannel identity(int n) { return MixedUnitaryChannel({{1.0, UnitaryGate::identity(n)}}); }

  int n_qubits() const { return components_.front().gate.n_qubits(); }
  const std::vector<Component>& components() const noexcept { return components_; }

 private:
  std::vector<Component> components_;
};

inline DensityMatrix apply_channel(const MixedUnitaryChannel& channel, const DensityMatrix& rho) {
  if (channel.components().empty()) throw ParameterError("apply_channel: empty channel");
  if (channel.components().front().gate.dim() != rho.dim())
    throw ParameterError("apply_channel: channel and state dimensions differ");
  CMatrix out = CMatrix::Zero(rho.dim(), rho.dim());
  for (const auto& c : channel.components()) {
    const CMatrix& v = c.gate.matrix();
    out += c.probability * (v * rho.matrix() * v.adjoint());
  }
  return DensityMatrix(std::move(out));
}

}  // namespace wdist
