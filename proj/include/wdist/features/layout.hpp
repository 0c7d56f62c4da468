#pragma once

#include <nlohmann/json.hpp>
#include <cstdint>
#include <string>
#include <vector>

#include "wdist/core/format.hpp"
#include "wdist/quantum/pauli.hpp"

namespace wdist {

inline constexpr const char* kLayoutVersion = "v1";

struct FeatureBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t length = 0;

  bool operator==(const FeatureBlock&) const = default;
};

/// Index assignment of every feature for one qubit count.
///
/// v1 block order: pauli (4·4^n), moment (8), fidelity (1), entropy (4),
/// relative_entropy (2), eigen_stats (10), ptrace (8 for n >= 2, 16 for n >= 4).
struct FeatureLayout {
  int n_qubits = 0;
  std::string version = kLayoutVersion;
  std::vector<FeatureBlock> blocks;
  std::size_t total_length = 0;

  bool operator==(const FeatureLayout&) const = default;

  const FeatureBlock& block(const std::string& name) const {
    for (const auto& b : blocks)
      if (b.name == name) return b;
    throw ParameterError("FeatureLayout: no block named '" + name + "'");
  }

  bool has_block(const std::string& name) const {
    for (const auto& b : blocks)
      if (b.name == name) return true;
    return false;
  }

  /// Bipartitions used by the partial-trace block, as the size of subsystem A
  /// (A = the leading qubits).
  std::vector<int> bipartitions() const {
    std::vector<int> cuts;
    if (n_qubits >= 2) cuts.push_back(1);
    if (n_qubits >= 4) cuts.push_back(2);
    return cuts;
  }
};

inline FeatureLayout layout_for(int n) {
  if (n < 1) throw ParameterError("layout_for: qubit count must be >= 1");
  if (n > kMaxPauliQubits)
    throw DimensionError("layout_for: " + std::to_string(n) + " qubits exceeds the Pauli basis cap");
  FeatureLayout layout;
  layout.n_qubits = n;
  std::size_t offset = 0;
  auto add = [&](const char* name, std::size_t length) {
    layout.blocks.push_back({name, offset, length});
    offset += length;
  };
  add("pauli", 4 * (std::size_t{1} << (2 * n)));
  add("moment", 8);
  add("fidelity", 1);
  add("entropy", 4);
  add("relative_entropy", 2);
  add("eigen_stats", 10);
  if (n >= 2) add("ptrace", 8 * layout.bipartitions().size());
  layout.total_length = offset;
  return layout;
}

inline nlohmann::json to_json(const FeatureLayout& layout) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : layout.blocks) blocks.push_back({{"name", b.name}, {"offset", b.offset}, {"length", b.length}});
  return {{"version", layout.version},
          {"n_qubits", layout.n_qubits},
          {"total_length", layout.total_length},
          {"blocks", blocks}};
}

inline FeatureLayout layout_from_json(const nlohmann::json& j) {
  try {
    FeatureLayout layout;
    layout.version = j.at("version").get<std::string>();
    layout.n_qubits = j.at("n_qubits").get<int>();
    layout.total_length = j.at("total_length").get<std::size_t>();
    for (const auto& b : j.at("blocks"))
      layout.blocks.push_back({b.at("name").get<std::string>(), b.at("offset").get<std::size_t>(),
                               b.at("length").get<std::size_t>()});
    return layout;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("feature layout: ") + e.what());
  }
}

/// Stable across processes: FNV-1a of the canonical (key-sorted) JSON text.
inline std::uint64_t layout_hash(const FeatureLayout& layout) { return fnv1a64(to_json(layout).dump()); }

inline std::vector<std::string> feature_names(const FeatureLayout& layout) {
  std::vector<std::string> names;
  names.reserve(layout.total_length);
  for (const auto& block : layout.blocks) {
    if (block.name == "pauli") {
      const std::uint64_t count = block.length / 4;
      for (std::uint64_t i = 0; i < count; ++i) {
        const std::string prefix = "pauli[" + pauli_letters(i, layout.n_qubits) + "].";
        for (const char* col : {"exp_rho", "exp_sigma", "diff", "prod"}) names.push_back(prefix + col);
      }
    } else if (block.name == "moment") {
      for (const char* m : {"M1_rho", "M1_sigma", "M2_rho", "M2_sigma", "M_cross", "M3_rho", "M3_sigma", "M2_rho_dup"})
        names.push_back(std::string("moment.") + m);
    } else if (block.name == "fidelity") {
      names.emplace_back("fidelity");
    } else if (block.name == "entropy") {
      for (const char* m : {"S_rho", "S_sigma", "L_rho", "L_sigma"}) names.push_back(std::string("entropy.") + m);
    } else if (block.name == "relative_entropy") {
      names.emplace_back("relent.D_rho_sigma");
      names.emplace_back("relent.D_sigma_rho");
    } else if (block.name == "eigen_stats") {
      for (const char* who : {"rho", "sigma"})
        for (const char* m : {"mean", "std", "max", "min", "rank"})
          names.push_back(std::string("eig.") + m + "_" + who);
    } else if (block.name == "ptrace") {
      for (int a : layout.bipartitions()) {
        const std::string prefix =
            "ptrace." + std::to_string(a) + "|" + std::to_string(layout.n_qubits - a) + ".";
        for (const char* who : {"rho", "sigma"})
          for (const char* m : {"purity_A", "S_A", "purity_B", "S_B"})
            names.push_back(prefix + m + "_" + who);
      }
    }
  }
  return names;
}

}  // namespace wdist
