#pragma once

#include <nlohmann/json.hpp>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wdist/features/layout.hpp"

namespace wdist {

enum class PairKind { random_pure, random_mixed, gate_choi, mixed_config };

inline const char* to_string(PairKind kind) {
  switch (kind) {
    case PairKind::random_pure: return "random_pure";
    case PairKind::random_mixed: return "random_mixed";
    case PairKind::gate_choi: return "gate_choi";
    case PairKind::mixed_config: return "mixed_config";
  }
  return "?";
}

inline PairKind pair_kind_from_string(const std::string& s) {
  for (PairKind k : {PairKind::random_pure, PairKind::random_mixed, PairKind::gate_choi, PairKind::mixed_config})
    if (s == to_string(k)) return k;
  throw ParameterError("unknown pair kind '" + s + "'");
}

/// What to generate. For gate_choi and mixed_config, `n_qubits` is the gate
/// size and every state lives on 2·n_qubits qubits (the Choi dimension).
struct GenerationSpec {
  int n_qubits = 2;
  PairKind kind = PairKind::random_pure;
  std::size_t n_samples = 1000;
  int uniform_bins = 0;  ///< 0 = natural label distribution
  std::uint64_t seed = 0;
  int mixed_rank = 0;  ///< random_mixed rank; 0 draws a rank in [1, d] per state
  double gate_fraction = 0.5;  ///< mixed_config share of gate pairs
  double eps_min = 0.01;  ///< gate perturbation strength range (uniform)
  double eps_max = 0.5;

  int layout_qubits() const {
    return kind == PairKind::gate_choi || kind == PairKind::mixed_config ? 2 * n_qubits : n_qubits;
  }

  void validate() const {
    if (n_qubits < 1) throw ParameterError("generation: qubit count must be >= 1");
    if (n_samples < 1) throw ParameterError("generation: sample count must be >= 1");
    if (uniform_bins < 0) throw ParameterError("generation: bin count must be >= 0");
    if (mixed_rank < 0 || (mixed_rank > 0 && mixed_rank > (1 << std::min(layout_qubits(), 30))))
      throw ParameterError("generation: mixed rank out of range");
    if (gate_fraction < 0.0 || gate_fraction > 1.0) throw ParameterError("generation: gate fraction outside [0,1]");
    if (!(eps_min > 0.0) || eps_max < eps_min) throw ParameterError("generation: invalid perturbation range");
  }
};

inline nlohmann::json to_json(const GenerationSpec& s) {
  return {{"n_qubits", s.n_qubits},       {"kind", to_string(s.kind)},
          {"n_samples", s.n_samples},     {"uniform_bins", s.uniform_bins},
          {"seed", s.seed},               {"mixed_rank", s.mixed_rank},
          {"gate_fraction", s.gate_fraction}, {"eps_min", s.eps_min},
          {"eps_max", s.eps_max}};
}

inline GenerationSpec generation_spec_from_json(const nlohmann::json& j) {
  GenerationSpec s;
  s.n_qubits = j.at("n_qubits").get<int>();
  s.kind = pair_kind_from_string(j.at("kind").get<std::string>());
  s.n_samples = j.at("n_samples").get<std::size_t>();
  s.uniform_bins = j.at("uniform_bins").get<int>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.mixed_rank = j.value("mixed_rank", 0);
  s.gate_fraction = j.value("gate_fraction", 0.5);
  s.eps_min = j.value("eps_min", 0.01);
  s.eps_max = j.value("eps_max", 0.5);
  return s;
}

enum class Split { none, train, val, test };

inline const char* to_string(Split s) {
  switch (s) {
    case Split::none: return "none";
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

inline Split split_from_string(const std::string& s) {
  for (Split k : {Split::none, Split::train, Split::val, Split::test})
    if (s == to_string(k)) return k;
  throw ParseError("unknown split tag '" + s + "'");
}

struct DatasetRow {
  std::vector<double> features;
  double label = 0.0;
  int bin = -1;  ///< -1 when the row was generated without binning
  std::string provenance;

  bool operator==(const DatasetRow&) const = default;
};

struct LabeledDataset {
  FeatureLayout layout;
  std::vector<DatasetRow> rows;
  Split split = Split::none;
  std::optional<GenerationSpec> spec;
  std::string manifest;  ///< file name of the run manifest that produced it

  std::size_t size() const { return rows.size(); }

  std::vector<double> labels() const {
    std::vector<double> y;
    y.reserve(rows.size());
    for (const auto& r : rows) y.push_back(r.label);
    return y;
  }
};

}  // namespace wdist
