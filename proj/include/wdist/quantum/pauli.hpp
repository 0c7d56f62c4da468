#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "wdist/quantum/state.hpp"

namespace wdist {

/// Largest qubit count for which the materialized Pauli basis is built
/// (4^n dense d x d matrices).
inline constexpr int kMaxPauliQubits = 6;

/// Tensor product of single-qubit Paulis, letters[0] acting on qubit 0.
///
/// Besides the dense matrix, the string is kept in "flip + phase" form:
/// P|c⟩ = phase[c] |c ^ flip_mask⟩, which makes Tr(ρP) an O(d) sum.
struct PauliString {
  std::string letters;
  std::uint64_t index = 0;  ///< lexicographic rank with I<X<Y<Z, qubit 0 most significant
  std::uint64_t flip_mask = 0;
  std::vector<Complex> phase;
  CMatrix matrix;

  bool is_identity() const { return letters.find_first_not_of('I') == std::string::npos; }
};

inline PauliString make_pauli(const std::string& letters) {
  const int n = static_cast<int>(letters.size());
  if (n < 1) throw ParameterError("make_pauli: empty string");
  PauliString p;
  p.letters = letters;
  const std::uint64_t d = std::uint64_t{1} << n;
  for (int q = 0; q < n; ++q) {
    int code = 0;
    switch (letters[static_cast<std::size_t>(q)]) {
      case 'I': code = 0; break;
      case 'X': code = 1; break;
      case 'Y': code = 2; break;
      case 'Z': code = 3; break;
      default: throw ParameterError("make_pauli: invalid letter in '" + letters + "'");
    }
    p.index = p.index * 4 + static_cast<std::uint64_t>(code);
    if (code == 1 || code == 2) p.flip_mask |= std::uint64_t{1} << (n - 1 - q);
  }
  p.phase.assign(d, Complex(1.0, 0.0));
  for (std::uint64_t c = 0; c < d; ++c) {
    Complex ph(1.0, 0.0);
    for (int q = 0; q < n; ++q) {
      const bool bit = (c >> (n - 1 - q)) & 1U;
      switch (letters[static_cast<std::size_t>(q)]) {
        case 'Y': ph *= bit ? Complex(0.0, -1.0) : Complex(0.0, 1.0); break;
        case 'Z': ph *= bit ? -1.0 : 1.0; break;
        default: break;
      }
    }
    p.phase[c] = ph;
  }
  p.matrix = CMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::uint64_t c = 0; c < d; ++c)
    p.matrix(static_cast<Eigen::Index>(c ^ p.flip_mask), static_cast<Eigen::Index>(c)) = p.phase[c];
  return p;
}

inline std::string pauli_letters(std::uint64_t index, int n) {
  static constexpr char kLetters[] = {'I', 'X', 'Y', 'Z'};
  std::string s(static_cast<std::size_t>(n), 'I');
  for (int q = n - 1; q >= 0; --q) {
    s[static_cast<std::size_t>(q)] = kLetters[index % 4];
    index /= 4;
  }
  return s;
}

/// All 4^n Pauli strings in lexicographic order, memoized per n. The returned
/// reference stays valid for the life of the process.
inline const std::vector<PauliString>& pauli_basis(int n) {
  check_qubits(n, "pauli_basis");
  if (n > kMaxPauliQubits)
    throw DimensionError("pauli_basis: " + std::to_string(n) + " qubits exceeds the materialization cap of " +
                         std::to_string(kMaxPauliQubits));
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<const std::vector<PauliString>>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) {
    auto basis = std::make_unique<std::vector<PauliString>>();
    const std::uint64_t count = std::uint64_t{1} << (2 * n);
    basis->reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) basis->push_back(make_pauli(pauli_letters(i, n)));
    slot = std::move(basis);
  }
  return *slot;
}

/// Complex Tr(ρP) via the flip/phase form.
inline Complex expectation_complex(const DensityMatrix& rho, const PauliString& p) {
  if (rho.dim() != static_cast<Eigen::Index>(p.phase.size()))
    throw ParameterError("expectation: state and Pauli string act on different qubit counts");
  const CMatrix& m = rho.matrix();
  Complex acc = 0.0;
  // Tr(ρP) = Σ_c ⟨c|ρ|c^f⟩ phase[c]
  for (std::size_t c = 0; c < p.phase.size(); ++c)
    acc += m(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c ^ p.flip_mask)) * p.phase[c];
  return acc;
}

inline double expectation(const DensityMatrix& rho, const PauliString& p) {
  const Complex v = expectation_complex(rho, p);
  if (std::abs(v.imag()) > 1e-10)
    throw NumericalError("expectation: imaginary part " + std::to_string(v.imag()) + " exceeds 1e-10");
  return v.real();
}

}  // namespace wdist
