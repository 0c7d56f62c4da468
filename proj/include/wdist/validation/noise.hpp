#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "wdist/quantum/measures.hpp"
#include "wdist/quantum/pauli.hpp"
#include "wdist/quantum/sampling.hpp"

namespace wdist {

enum class NoiseKind { bit_flip, phase, depolarizing };

inline const char* to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::bit_flip: return "bit_flip";
    case NoiseKind::phase: return "phase";
    case NoiseKind::depolarizing: return "depolarizing";
  }
  return "unknown";
}

inline NoiseKind noise_kind_from_string(const std::string& s) {
  if (s == "bit_flip") return NoiseKind::bit_flip;
  if (s == "phase") return NoiseKind::phase;
  if (s == "depolarizing") return NoiseKind::depolarizing;
  throw ParameterError("unknown noise kind '" + s + "'");
}

inline const std::vector<NoiseKind>& all_noise_kinds() {
  static const std::vector<NoiseKind> kinds = {NoiseKind::bit_flip, NoiseKind::phase, NoiseKind::depolarizing};
  return kinds;
}

struct NoiseSpec {
  NoiseKind kind = NoiseKind::bit_flip;
  double strength = 0.1;
  double angle = 1.5707963267948966;  ///< π/2
};

/// exp(-iθP/2) = cos(θ/2) I - i sin(θ/2) P for a Pauli string P.
inline UnitaryGate pauli_rotation(const PauliString& p, double theta) {
  const Eigen::Index d = p.matrix.rows();
  return UnitaryGate(CMatrix(std::cos(theta / 2) * CMatrix::Identity(d, d) -
                             Complex(0.0, std::sin(theta / 2)) * p.matrix));
}

/// Mixed-unitary noise on n qubits. bit_flip and phase put weight p/n on an X
/// or Z rotation of each qubit; depolarizing spreads p over 3n Pauli strings
/// drawn uniformly (with replacement) from the non-identity ones.
inline MixedUnitaryChannel make_noise_channel(const NoiseSpec& spec, int n, SeededRandomSource& rng) {
  check_qubits(n, "make_noise_channel");
  if (!(spec.strength >= 0.0 && spec.strength <= 1.0)) throw ParameterError("noise strength outside [0, 1]");
  std::vector<MixedUnitaryChannel::Component> parts;
  parts.push_back({1.0 - spec.strength, UnitaryGate::identity(n)});
  if (spec.kind == NoiseKind::depolarizing) {
    const auto& basis = pauli_basis(n);
    const int m = 3 * n;
    for (int k = 0; k < m; ++k) {
      const auto& p = basis[1 + rng.index(basis.size() - 1)];
      parts.push_back({spec.strength / m, UnitaryGate(p.matrix)});
    }
  } else {
    const char letter = spec.kind == NoiseKind::bit_flip ? 'X' : 'Z';
    for (int q = 0; q < n; ++q) {
      std::string letters(static_cast<std::size_t>(n), 'I');
      letters[static_cast<std::size_t>(q)] = letter;
      parts.push_back({spec.strength / n, pauli_rotation(make_pauli(letters), spec.angle)});
    }
  }
  return MixedUnitaryChannel(std::move(parts));
}

/// Distance between two states; the true trace distance or a model estimate.
using StateDistance = std::function<double(const DensityMatrix&, const DensityMatrix&)>;

inline double true_state_distance(const DensityMatrix& a, const DensityMatrix& b) { return trace_distance(a, b); }

/// (1/n)·max over the given states of D(UρU†, U E(ρ) U†).
inline double gate_error_rate(const UnitaryGate& u, const MixedUnitaryChannel& channel,
                              const std::vector<DensityMatrix>& states,
                              const StateDistance& distance = true_state_distance) {
  if (states.empty()) throw ParameterError("gate_error_rate: no states");
  if (channel.n_qubits() != u.n_qubits()) throw ParameterError("gate_error_rate: channel and gate sizes differ");
  double worst = 0.0;
  for (const auto& rho : states) {
    const DensityMatrix ideal = u.conjugate(rho);
    const DensityMatrix noisy = u.conjugate(apply_channel(channel, rho));
    worst = std::max(worst, distance(ideal, noisy));
  }
  return worst / u.n_qubits();
}

/// Sampled estimate of the gate error rate over `n_states` random pure states.
/// The true rate maximizes over all states, so this is a lower bound on it.
inline double gate_error_rate(const UnitaryGate& u, const MixedUnitaryChannel& channel, int n_states,
                              SeededRandomSource& rng, const StateDistance& distance = true_state_distance) {
  if (n_states < 1) throw ParameterError("gate_error_rate: n_states must be >= 1");
  std::vector<DensityMatrix> states;
  states.reserve(static_cast<std::size_t>(n_states));
  for (int i = 0; i < n_states; ++i) states.push_back(random_pure_state(u.n_qubits(), rng));
  return gate_error_rate(u, channel, states, distance);
}

}  // namespace wdist
