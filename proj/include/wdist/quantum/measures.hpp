#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wdist/quantum/state.hpp"

namespace wdist {

/// Eigenvalue floor shared by both entropies and the effective rank.
inline constexpr double kSpectrumEpsilon = 1e-12;

namespace detail {
inline void require_same_dim(const DensityMatrix& a, const DensityMatrix& b, const char* what) {
  if (a.dim() != b.dim()) throw ParameterError(std::string(what) + ": dimension mismatch");
}
}  // namespace detail

/// ½ Σ|λ_i(ρ − σ)|, clamped to [0, 1]. This is the W1 ground truth used
/// everywhere in the library.
inline double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  detail::require_same_dim(rho, sigma, "trace_distance");
  const RVector ev = hermitian_eigenvalues(rho.matrix() - sigma.matrix());
  return std::clamp(0.5 * ev.cwiseAbs().sum(), 0.0, 1.0);
}

/// Tr√(√ρ σ √ρ), evaluated as the nuclear norm ‖√ρ √σ‖₁ (singular values
/// avoid the square-root blow-up of round-off in rank-deficient states).
/// Eigenvalues within d·ε_mach of zero are round-off and are dropped before
/// the square roots, which would otherwise lift them to ~1e-8.
inline double fidelity(const HermitianEigen& rho_eig, const HermitianEigen& sigma_eig) {
  const double cutoff = static_cast<double>(rho_eig.values.size()) * std::numeric_limits<double>::epsilon();
  auto root = [cutoff](double x) { return x > cutoff ? std::sqrt(x) : 0.0; };
  const CMatrix product = spectral_apply(rho_eig, root) * spectral_apply(sigma_eig, root);
  const RVector sv = Eigen::JacobiSVD<CMatrix>(product).singularValues();
  return std::clamp(sv.sum(), 0.0, 1.0);
}

inline double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  detail::require_same_dim(rho, sigma, "fidelity");
  return fidelity(hermitian_eigen(rho.matrix()), hermitian_eigen(sigma.matrix()));
}

/// −Σ λ log2 λ over eigenvalues above 1e-12, in bits.
inline double von_neumann_entropy(const RVector& spectrum) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
    const double l = spectrum(i);
    if (l > kSpectrumEpsilon) s -= l * std::log2(l);
  }
  return std::max(s, 0.0);
}

inline double von_neumann_entropy(const DensityMatrix& rho) {
  return von_neumann_entropy(hermitian_eigenvalues(rho.matrix()));
}

inline double purity(const DensityMatrix& rho) { return rho.matrix().squaredNorm(); }

inline double linear_entropy(const DensityMatrix& rho) { return 1.0 - purity(rho); }

/// Tr[ρ(log2 ρ − log2 σ)] with every eigenvalue floored at 1e-12 before the
/// logarithm; clamped at 0.
inline double relative_entropy(const HermitianEigen& rho_eig, const DensityMatrix& rho,
                               const HermitianEigen& sigma_eig) {
  auto safe_log2 = [](double x) { return std::log2(std::max(x, kSpectrumEpsilon)); };
  double rho_log_rho = 0.0;
  for (Eigen::Index i = 0; i < rho_eig.values.size(); ++i)
    rho_log_rho += rho_eig.values(i) * safe_log2(rho_eig.values(i));
  // Tr(ρ log σ) = Σ_j log λ_j(σ) ⟨v_j|ρ|v_j⟩
  const CMatrix projected = sigma_eig.vectors.adjoint() * rho.matrix() * sigma_eig.vectors;
  double rho_log_sigma = 0.0;
  for (Eigen::Index j = 0; j < sigma_eig.values.size(); ++j)
    rho_log_sigma += projected(j, j).real() * safe_log2(sigma_eig.values(j));
  return std::max(rho_log_rho - rho_log_sigma, 0.0);
}

inline double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
  detail::require_same_dim(rho, sigma, "relative_entropy");
  return relative_entropy(hermitian_eigen(rho.matrix()), rho, hermitian_eigen(sigma.matrix()));
}

struct EigenStats {
  double mean = 0.0;
  double std = 0.0;
  double max = 0.0;
  double min = 0.0;
  double effective_rank = 0.0;  ///< fraction of eigenvalues above 1e-12
};

inline EigenStats eigen_stats(const RVector& spectrum) {
  EigenStats s;
  const auto d = static_cast<double>(spectrum.size());
  s.mean = spectrum.sum() / d;
  s.std = std::sqrt((spectrum.array() - s.mean).square().sum() / d);
  s.max = spectrum.maxCoeff();
  s.min = spectrum.minCoeff();
  s.effective_rank = static_cast<double>((spectrum.array() > kSpectrumEpsilon).count()) / d;
  return s;
}

inline EigenStats eigen_stats(const DensityMatrix& rho) {
  return eigen_stats(hermitian_eigenvalues(rho.matrix()));
}

}  // namespace wdist
