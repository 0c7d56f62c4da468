#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <vector>

#include "wdist/quantum/state.hpp"

namespace wdist {

/// Φ_U = (1/d) Σ_jk |j⟩⟨k| ⊗ U|j⟩⟨k|U†, a 2n-qubit pure state. The first n
/// qubits carry the reference system.
inline DensityMatrix choi_state(const UnitaryGate& u) {
  check_qubits(2 * u.n_qubits(), "choi_state");
  const Eigen::Index d = u.dim();
  // |Φ_U⟩ = (1/√d) Σ_j |j⟩ ⊗ U|j⟩ has amplitude U(i,j)/√d at index j·d + i,
  // which is exactly U's column-major storage.
  CVector psi = Eigen::Map<const CVector>(u.matrix().data(), d * d) / std::sqrt(static_cast<double>(d));
  return DensityMatrix::from_vector(psi);
}

/// Reduced state on the qubits in `keep` (indices into 0..n-1, qubit 0 most
/// significant). The kept qubits keep their relative order.
inline DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep) {
  const int n = rho.n_qubits();
  std::set<int> kept(keep.begin(), keep.end());
  if (kept.empty()) throw ParameterError("partial_trace: keep set is empty");
  if (static_cast<int>(kept.size()) >= n) throw ParameterError("partial_trace: keep set must be a strict subset");
  for (int q : kept)
    if (q < 0 || q >= n) throw ParameterError("partial_trace: qubit index out of range");

  std::vector<int> traced;
  for (int q = 0; q < n; ++q)
    if (!kept.count(q)) traced.push_back(q);

  auto bit_of = [n](int q) { return std::uint64_t{1} << (n - 1 - q); };
  auto scatter = [&](const std::vector<int>& qubits, std::uint64_t value) {
    std::uint64_t full = 0;
    const int m = static_cast<int>(qubits.size());
    for (int k = 0; k < m; ++k)
      if (value & (std::uint64_t{1} << (m - 1 - k))) full |= bit_of(qubits[k]);
    return full;
  };

  const std::vector<int> kept_list(kept.begin(), kept.end());
  const std::uint64_t dk = std::uint64_t{1} << kept_list.size();
  const std::uint64_t dt = std::uint64_t{1} << traced.size();
  std::vector<std::uint64_t> kept_index(dk), traced_index(dt);
  for (std::uint64_t a = 0; a < dk; ++a) kept_index[a] = scatter(kept_list, a);
  for (std::uint64_t t = 0; t < dt; ++t) traced_index[t] = scatter(traced, t);

  const CMatrix& m = rho.matrix();
  CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
  for (std::uint64_t a = 0; a < dk; ++a)
    for (std::uint64_t b = 0; b < dk; ++b) {
      Complex acc = 0.0;
      for (std::uint64_t t = 0; t < dt; ++t)
        acc += m(static_cast<Eigen::Index>(kept_index[a] | traced_index[t]),
                 static_cast<Eigen::Index>(kept_index[b] | traced_index[t]));
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = acc;
    }
  return DensityMatrix(std::move(out));
}

inline DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b) {
  check_qubits(a.n_qubits() + b.n_qubits(), "tensor_product");
  return DensityMatrix(kron(a.matrix(), b.matrix()));
}

/// (1-α) ρ1 + α ρ2
inline DensityMatrix convex_mix(const DensityMatrix& rho1, const DensityMatrix& rho2, double alpha) {
  if (rho1.dim() != rho2.dim()) throw ParameterError("convex_mix: dimension mismatch");
  return DensityMatrix(CMatrix((1.0 - alpha) * rho1.matrix() + alpha * rho2.matrix()));
}

}  // namespace wdist
