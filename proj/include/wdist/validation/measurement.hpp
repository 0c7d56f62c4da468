#pragma once

#include <cmath>
#include <optional>

#include "wdist/quantum/sampling.hpp"

namespace wdist {

/// Random POVM element M = s·A†A / λ_max(A†A) with A complex Gaussian, so
/// λ_max(M) = s. The scale is drawn uniformly from (0, 1] unless forced.
inline CMatrix sample_povm_element(int n, SeededRandomSource& rng, std::optional<double> scale = std::nullopt) {
  check_qubits(n, "sample_povm_element");
  if (scale && !(*scale > 0.0 && *scale <= 1.0)) throw ParameterError("sample_povm_element: scale outside (0, 1]");
  const Eigen::Index d = Eigen::Index{1} << n;
  const CMatrix a = complex_gaussian_matrix(d, d, rng);
  const CMatrix g = hermitize(a.adjoint() * a);
  const double top = hermitian_eigenvalues(g).maxCoeff();
  const double s = scale ? *scale : rng.uniform_open_low();
  return g * (s / top);
}

/// ⟨ψ|U† M U|ψ⟩ for a normalized ψ.
inline double measurement_probability(const UnitaryGate& u, const CVector& psi, const CMatrix& m) {
  if (psi.size() != u.dim() || m.rows() != u.dim() || m.cols() != u.dim())
    throw ParameterError("measurement_probability: dimension mismatch");
  const CVector out = u.matrix() * psi;
  const Complex p = out.dot(m * out);
  if (std::abs(p.imag()) > 1e-10) throw NumericalError("measurement_probability: imaginary part above 1e-10");
  return p.real();
}

}  // namespace wdist
