#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "wdist/quantum/state.hpp"

namespace wdist {

namespace detail {
inline UnitaryGate permutation_gate(int n, const std::vector<std::pair<int, int>>& swaps) {
  const Eigen::Index d = Eigen::Index{1} << n;
  CMatrix m = CMatrix::Identity(d, d);
  for (auto [a, b] : swaps) m.row(a).swap(m.row(b));
  return UnitaryGate(std::move(m));
}

inline UnitaryGate diagonal_gate(const std::vector<Complex>& diag) {
  CVector v(static_cast<Eigen::Index>(diag.size()));
  for (std::size_t i = 0; i < diag.size(); ++i) v(static_cast<Eigen::Index>(i)) = diag[i];
  return UnitaryGate(CMatrix(v.asDiagonal()));
}
}  // namespace detail

inline const std::vector<std::string>& named_gate_names() {
  static const std::vector<std::string> names = {"identity", "swap", "cz", "cs", "cnot", "toffoli", "fredkin"};
  return names;
}

/// Standard gates. Qubit 0 is the most significant index bit, so for cnot the
/// control is qubit 0; toffoli swaps |110⟩,|111⟩ and fredkin swaps |101⟩,|110⟩.
/// `identity_qubits` sizes the identity gate only.
inline UnitaryGate named_gate(std::string_view name, int identity_qubits = 1) {
  if (name == "identity") return UnitaryGate::identity(identity_qubits);
  if (name == "swap") return detail::permutation_gate(2, {{1, 2}});
  if (name == "cz") return detail::diagonal_gate({1.0, 1.0, 1.0, -1.0});
  if (name == "cs") return detail::diagonal_gate({1.0, 1.0, 1.0, Complex(0.0, 1.0)});
  if (name == "cnot") return detail::permutation_gate(2, {{2, 3}});
  if (name == "toffoli") return detail::permutation_gate(3, {{6, 7}});
  if (name == "fredkin") return detail::permutation_gate(3, {{5, 6}});
  throw ParameterError("named_gate: unknown gate '" + std::string(name) + "'");
}

}  // namespace wdist
