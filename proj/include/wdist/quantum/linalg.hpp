#pragma once

#include <Eigen/Dense>
#include <complex>

#include "wdist/core/error.hpp"

namespace wdist {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix.
struct HermitianEigen {
  RVector values;
  CMatrix vectors;
};

inline CMatrix hermitize(const CMatrix& m) { return (m + m.adjoint()) * 0.5; }

/// The single spectral kernel. The input is hermitized first, so tiny
/// anti-Hermitian round-off never leaks into the spectrum.
inline HermitianEigen hermitian_eigen(const CMatrix& m, bool with_vectors = true) {
  if (m.rows() != m.cols()) throw ParameterError("hermitian_eigen: matrix must be square");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(
      hermitize(m), with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("hermitian_eigen: solver did not converge");
  HermitianEigen out;
  out.values = solver.eigenvalues();
  if (with_vectors) out.vectors = solver.eigenvectors();
  return out;
}

inline RVector hermitian_eigenvalues(const CMatrix& m) {
  return hermitian_eigen(m, false).values;
}

/// V f(Λ) V† for a real function applied to the spectrum.
template <class Fn>
CMatrix spectral_apply(const HermitianEigen& eig, Fn&& fn) {
  RVector mapped = eig.values.unaryExpr([&](double x) { return fn(x); });
  return eig.vectors * mapped.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
}

inline double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Re Tr(A B) without forming the product.
inline double trace_product_real(const CMatrix& a, const CMatrix& b) {
  // Tr(AB) = sum_ij A_ij B_ji
  return (a.array() * b.transpose().array()).sum().real();
}

}  // namespace wdist
