#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "wdist/features/layout.hpp"
#include "wdist/quantum/measures.hpp"
#include "wdist/quantum/ops.hpp"

namespace wdist {

struct FeatureVector {
  FeatureLayout layout;
  std::vector<double> values;
};

namespace detail {

inline double trace_cube(const CMatrix& m) { return trace_product_real(m * m, m); }

inline void append_reduced(std::vector<double>& out, const DensityMatrix& rho, int cut) {
  std::vector<int> a(static_cast<std::size_t>(cut));
  std::iota(a.begin(), a.end(), 0);
  std::vector<int> b(static_cast<std::size_t>(rho.n_qubits() - cut));
  std::iota(b.begin(), b.end(), cut);
  const DensityMatrix rho_a = partial_trace(rho, a);
  const DensityMatrix rho_b = partial_trace(rho, b);
  out.push_back(purity(rho_a));
  out.push_back(von_neumann_entropy(rho_a));
  out.push_back(purity(rho_b));
  out.push_back(von_neumann_entropy(rho_b));
}

}  // namespace detail

/// Fills every block of `layout` for the ordered pair (ρ, σ). Each spectrum is
/// computed once and shared by the entropy, fidelity and eigen-stat features.
inline FeatureVector extract_features(const DensityMatrix& rho, const DensityMatrix& sigma,
                                      const FeatureLayout& layout) {
  if (rho.dim() != sigma.dim()) throw ParameterError("extract_features: state dimensions differ");
  if (rho.n_qubits() != layout.n_qubits)
    throw ParameterError("extract_features: layout is for " + std::to_string(layout.n_qubits) +
                         " qubits, states have " + std::to_string(rho.n_qubits()));

  const HermitianEigen rho_eig = hermitian_eigen(rho.matrix());
  const HermitianEigen sigma_eig = hermitian_eigen(sigma.matrix());

  std::vector<double> v;
  v.reserve(layout.total_length);
  for (const auto& block : layout.blocks) {
    if (block.name == "pauli") {
      for (const auto& p : pauli_basis(layout.n_qubits)) {
        const double er = expectation(rho, p);
        const double es = expectation(sigma, p);
        v.insert(v.end(), {er, es, er - es, er * es});
      }
    } else if (block.name == "moment") {
      const double m2_rho = purity(rho);
      v.push_back(rho.matrix().trace().real());
      v.push_back(sigma.matrix().trace().real());
      v.push_back(m2_rho);
      v.push_back(purity(sigma));
      v.push_back(trace_product_real(rho.matrix(), sigma.matrix()));
      v.push_back(detail::trace_cube(rho.matrix()));
      v.push_back(detail::trace_cube(sigma.matrix()));
      v.push_back(m2_rho);
    } else if (block.name == "fidelity") {
      v.push_back(fidelity(rho_eig, sigma_eig));
    } else if (block.name == "entropy") {
      v.push_back(von_neumann_entropy(rho_eig.values));
      v.push_back(von_neumann_entropy(sigma_eig.values));
      v.push_back(linear_entropy(rho));
      v.push_back(linear_entropy(sigma));
    } else if (block.name == "relative_entropy") {
      v.push_back(relative_entropy(rho_eig, rho, sigma_eig));
      v.push_back(relative_entropy(sigma_eig, sigma, rho_eig));
    } else if (block.name == "eigen_stats") {
      for (const HermitianEigen* e : {&rho_eig, &sigma_eig}) {
        const EigenStats s = eigen_stats(e->values);
        v.insert(v.end(), {s.mean, s.std, s.max, s.min, s.effective_rank});
      }
    } else if (block.name == "ptrace") {
      for (int cut : layout.bipartitions()) {
        detail::append_reduced(v, rho, cut);
        detail::append_reduced(v, sigma, cut);
      }
    } else {
      throw ParameterError("extract_features: unknown block '" + block.name + "'");
    }
    if (v.size() != block.offset + block.length)
      throw NumericalError("extract_features: block '" + block.name + "' has the wrong length");
  }
  return {layout, std::move(v)};
}

inline FeatureVector extract_features(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return extract_features(rho, sigma, layout_for(rho.n_qubits()));
}

}  // namespace wdist
