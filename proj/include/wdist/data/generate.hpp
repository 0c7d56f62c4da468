#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "wdist/core/parallel.hpp"
#include "wdist/data/dataset.hpp"
#include "wdist/features/extract.hpp"
#include "wdist/quantum/sampling.hpp"

namespace wdist {

inline constexpr int kAlphaRetryCap = 50;
inline constexpr int kBisectionIterations = 60;
inline constexpr double kAlphaTolerance = 1e-9;

struct StatePair {
  DensityMatrix rho;
  DensityMatrix sigma;
  double label = 0.0;
  std::string provenance;
};

/// One natural (unbinned) pair of the requested kind, labelled by trace distance.
inline StatePair generate_pair(const GenerationSpec& spec, SeededRandomSource& rng) {
  const int n_state = spec.layout_qubits();
  check_qubits(n_state, "generate_pair");
  StatePair out;
  PairKind kind = spec.kind;
  if (kind == PairKind::mixed_config) kind = rng.uniform() < spec.gate_fraction ? PairKind::gate_choi : PairKind::random_pure;

  switch (kind) {
    case PairKind::random_pure:
      out.rho = random_pure_state(n_state, rng);
      out.sigma = random_pure_state(n_state, rng);
      break;
    case PairKind::random_mixed: {
      const auto d = std::uint64_t{1} << n_state;
      auto rank = [&] { return spec.mixed_rank > 0 ? spec.mixed_rank : static_cast<int>(1 + rng.index(d)); };
      const int r1 = rank();
      out.rho = random_mixed_state(n_state, r1, rng);
      const int r2 = rank();
      out.sigma = random_mixed_state(n_state, r2, rng);
      break;
    }
    case PairKind::gate_choi: {
      const UnitaryGate u = random_unitary(spec.n_qubits, rng);
      const double eps = rng.uniform(spec.eps_min, spec.eps_max);
      const UnitaryGate v = perturb_unitary(u, eps, rng);
      out.rho = choi_state(u);
      out.sigma = choi_state(v);
      break;
    }
    case PairKind::mixed_config: break;  // resolved above
  }
  out.provenance = to_string(kind);
  out.label = trace_distance(out.rho, out.sigma);
  return out;
}

/// α ∈ [0,1] with T(ρ1, (1−α)ρ1 + αρ_rand) = target, or nullopt when the
/// target lies beyond T(ρ1, ρ_rand). The distance is exactly α·T(ρ1, ρ_rand),
/// so the closed form is tried first and verified; bisection is the fallback.
inline std::optional<double> solve_alpha(const DensityMatrix& rho1, const DensityMatrix& rho_rand, double target) {
  if (!(target >= 0.0)) throw ParameterError("solve_alpha: target must be >= 0");
  const double full = trace_distance(rho1, rho_rand);
  if (target == 0.0) return 0.0;
  if (target > full) return std::nullopt;
  auto distance_at = [&](double a) { return trace_distance(rho1, convex_mix(rho1, rho_rand, a)); };

  const double alpha = std::clamp(target / full, 0.0, 1.0);
  if (std::abs(distance_at(alpha) - target) <= kAlphaTolerance) return alpha;

  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < kBisectionIterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    (distance_at(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct GeneratedSample {
  StatePair pair;
  int bin = -1;
};

/// Bin of sample `id` when N samples are spread over B bins: contiguous
/// blocks, the first N mod B bins one sample larger.
inline int bin_of_sample(std::size_t id, std::size_t n_samples, int bins) {
  const std::size_t b = static_cast<std::size_t>(bins);
  const std::size_t base = n_samples / b, extra = n_samples % b;
  const std::size_t big = extra * (base + 1);
  if (id < big) return static_cast<int>(id / (base + 1));
  return static_cast<int>(extra + (id - big) / base);
}

namespace detail {

inline StatePair interpolated_pair(const GenerationSpec& spec, int bin, SeededRandomSource& rng) {
  const int n_state = spec.layout_qubits();
  bool gate = spec.kind == PairKind::gate_choi;
  if (spec.kind == PairKind::mixed_config) gate = rng.uniform() < spec.gate_fraction;
  const double width = 1.0 / spec.uniform_bins;

  for (int attempt = 0; attempt < kAlphaRetryCap; ++attempt) {
    const double target = (bin + rng.uniform()) * width;
    DensityMatrix base, other;
    if (gate) {
      base = choi_state(random_unitary(spec.n_qubits, rng));
      other = choi_state(random_unitary(spec.n_qubits, rng));
    } else {
      base = random_pure_state(n_state, rng);
      other = random_pure_state(n_state, rng);
    }
    const auto alpha = solve_alpha(base, other, target);
    if (!alpha) continue;
    StatePair p;
    p.sigma = convex_mix(base, other, *alpha);
    p.rho = std::move(base);
    p.label = trace_distance(p.rho, p.sigma);
    p.provenance = gate ? "gate_choi" : to_string(spec.kind == PairKind::random_mixed ? PairKind::random_mixed
                                                                                        : PairKind::random_pure);
    return p;
  }
  throw GenerationError("uniform generation: retry cap of " + std::to_string(kAlphaRetryCap) +
                            " exhausted in bin " + std::to_string(bin) + " [" + format_double(bin * width) + ", " +
                            format_double((bin + 1) * width) + ")",
                        bin);
}

}  // namespace detail

/// Sample `id` of the dataset described by `spec`; a pure function of (spec, id).
inline GeneratedSample generate_sample(const GenerationSpec& spec, std::size_t id) {
  SeededRandomSource rng(derive_seed(spec.seed, id));
  GeneratedSample s;
  if (spec.uniform_bins <= 1) {
    s.pair = generate_pair(spec, rng);
    s.bin = spec.uniform_bins == 1 ? 0 : -1;
  } else {
    s.bin = bin_of_sample(id, spec.n_samples, spec.uniform_bins);
    s.pair = detail::interpolated_pair(spec, s.bin, rng);
  }
  return s;
}

/// Rows in canonical (sample id) order.
inline std::vector<DatasetRow> generate_rows(const GenerationSpec& spec, int workers = 1) {
  spec.validate();
  const FeatureLayout layout = layout_for(spec.layout_qubits());
  std::vector<DatasetRow> rows(spec.n_samples);
  parallel_for(spec.n_samples, workers, [&](std::size_t id) {
    GeneratedSample s = generate_sample(spec, id);
    rows[id] = {extract_features(s.pair.rho, s.pair.sigma, layout).values, s.pair.label, s.bin,
                std::move(s.pair.provenance)};
  });
  return rows;
}

/// Full dataset: canonical rows shuffled by a stream derived from the seed,
/// so the worker count never changes the output.
inline LabeledDataset generate_dataset(const GenerationSpec& spec, int workers = 1) {
  LabeledDataset ds;
  ds.layout = layout_for(spec.layout_qubits());
  ds.rows = generate_rows(spec, workers);
  ds.spec = spec;
  SeededRandomSource shuffle_rng(derive_seed(splitmix64(spec.seed), 0x5348554646ULL));
  shuffle_rng.shuffle(ds.rows);
  return ds;
}

/// Alias kept for symmetry with the binned path.
inline LabeledDataset generate_uniform_dataset(const GenerationSpec& spec, int workers = 1) {
  if (spec.uniform_bins < 1) throw ParameterError("generate_uniform_dataset: bins must be >= 1");
  return generate_dataset(spec, workers);
}

}  // namespace wdist
