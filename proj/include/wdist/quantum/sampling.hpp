#pragma once

#include <cmath>
#include <string>

#include "wdist/core/random.hpp"
#include "wdist/quantum/state.hpp"

namespace wdist {

inline CMatrix complex_gaussian_matrix(Eigen::Index rows, Eigen::Index cols, SeededRandomSource& rng) {
  CMatrix m(rows, cols);
  // column-major fill order is part of the determinism contract
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.complex_normal();
  return m;
}

/// Haar-random unit vector on C^(2^n).
inline CVector random_state_vector(int n, SeededRandomSource& rng) {
  check_qubits(n, "random_state_vector");
  const Eigen::Index d = Eigen::Index{1} << n;
  CVector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = rng.complex_normal();
  return v / v.norm();
}

inline DensityMatrix random_pure_state(int n, SeededRandomSource& rng) {
  return DensityMatrix::from_vector(random_state_vector(n, rng));
}

/// Mixture of `rank` independent random pure states with flat-Dirichlet weights.
inline DensityMatrix random_mixed_state(int n, int rank, SeededRandomSource& rng) {
  check_qubits(n, "random_mixed_state");
  const Eigen::Index d = Eigen::Index{1} << n;
  if (rank < 1 || rank > d)
    throw ParameterError("random_mixed_state: rank " + std::to_string(rank) + " outside [1, " +
                         std::to_string(d) + "]");
  std::vector<CVector> vectors;
  vectors.reserve(static_cast<std::size_t>(rank));
  for (int k = 0; k < rank; ++k) vectors.push_back(random_state_vector(n, rng));
  const auto weights = rng.simplex(static_cast<std::size_t>(rank));
  CMatrix rho = CMatrix::Zero(d, d);
  for (int k = 0; k < rank; ++k) rho += weights[static_cast<std::size_t>(k)] * (vectors[k] * vectors[k].adjoint());
  return DensityMatrix(std::move(rho));
}

/// Haar unitary: QR of a Ginibre matrix with R's diagonal phases folded into Q.
inline UnitaryGate random_unitary(int n, SeededRandomSource& rng) {
  check_qubits(n, "random_unitary");
  const Eigen::Index d = Eigen::Index{1} << n;
  const CMatrix z = complex_gaussian_matrix(d, d, rng);
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ() * CMatrix::Identity(d, d);
  const CMatrix& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < d; ++j) {
    const Complex diag = r(j, j);
    const double mag = std::abs(diag);
    q.col(j) *= mag > 0.0 ? diag / mag : Complex(1.0, 0.0);
  }
  return UnitaryGate(std::move(q));
}

/// Random Hermitian matrix (GUE shape) rescaled to unit spectral norm.
inline HermitianEigen random_unit_hamiltonian(Eigen::Index d, SeededRandomSource& rng) {
  const CMatrix g = complex_gaussian_matrix(d, d, rng);
  HermitianEigen h = hermitian_eigen(g);
  const double norm = h.values.cwiseAbs().maxCoeff();
  if (norm > 0.0) h.values /= norm;
  return h;
}

/// U · exp(-i ε H) with H a random Hermitian matrix of unit spectral norm.
inline UnitaryGate perturb_unitary(const UnitaryGate& u, double strength, SeededRandomSource& rng) {
  if (!(strength > 0.0)) throw ParameterError("perturb_unitary: strength must be > 0");
  const HermitianEigen h = random_unit_hamiltonian(u.dim(), rng);
  CVector phases(h.values.size());
  for (Eigen::Index i = 0; i < h.values.size(); ++i)
    phases(i) = std::polar(1.0, -strength * h.values(i));
  const CMatrix rotation = h.vectors * phases.asDiagonal() * h.vectors.adjoint();
  return UnitaryGate(CMatrix(u.matrix() * rotation));
}

}  // namespace wdist
