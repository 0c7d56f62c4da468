#pragma once

#include <atomic>
#include <cstdlib>
#include <string>

#include "wdist/core/error.hpp"

namespace wdist {

inline constexpr int kDefaultMaxQubits = 10;

namespace detail {
inline std::atomic<int>& max_qubits_slot() {
  static std::atomic<int> slot{[] {
    if (const char* env = std::getenv("WDIST_MAX_QUBITS")) {
      try {
        const int v = std::stoi(env);
        if (v >= 1) return v;
      } catch (...) {
      }
    }
    return kDefaultMaxQubits;
  }()};
  return slot;
}
}  // namespace detail

/// Largest qubit count any dense state may have (dimension cap 2^max_qubits).
/// Initialized from WDIST_MAX_QUBITS when set.
inline int max_qubits() { return detail::max_qubits_slot().load(); }

inline void set_max_qubits(int n) {
  if (n < 1) throw ParameterError("max qubits must be >= 1");
  detail::max_qubits_slot().store(n);
}

inline void check_qubits(int n, const char* what) {
  if (n < 1) throw DimensionError(std::string(what) + ": qubit count must be >= 1");
  if (n > max_qubits())
    throw DimensionError(std::string(what) + ": " + std::to_string(n) +
                         " qubits exceeds the dimension cap of " + std::to_string(max_qubits()));
}

}  // namespace wdist
