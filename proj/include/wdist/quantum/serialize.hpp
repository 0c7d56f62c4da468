#pragma once

#include <nlohmann/json.hpp>

#include "wdist/quantum/state.hpp"

namespace wdist {

/// Row-major array of [re, im] pairs.
inline nlohmann::json matrix_to_json(const CMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline CMatrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw ParseError("matrix: expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ParseError("matrix: ragged row " + std::to_string(i));
    for (Eigen::Index k = 0; k < cols; ++k) {
      const auto& cell = row[static_cast<std::size_t>(k)];
      if (!cell.is_array() || cell.size() != 2) throw ParseError("matrix: cell is not a [re, im] pair");
      m(i, k) = Complex(cell[0].get<double>(), cell[1].get<double>());
    }
  }
  return m;
}

inline nlohmann::json to_json(const DensityMatrix& rho) {
  return {{"n_qubits", rho.n_qubits()}, {"data", matrix_to_json(rho.matrix())}};
}

inline nlohmann::json to_json(const UnitaryGate& u) {
  return {{"n_qubits", u.n_qubits()}, {"data", matrix_to_json(u.matrix())}};
}

inline DensityMatrix density_matrix_from_json(const nlohmann::json& j) {
  return DensityMatrix::checked(matrix_from_json(j.at("data")));
}

inline UnitaryGate unitary_from_json(const nlohmann::json& j) {
  return UnitaryGate::checked(matrix_from_json(j.at("data")));
}

}  // namespace wdist
