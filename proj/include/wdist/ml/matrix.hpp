#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "wdist/core/error.hpp"
#include "wdist/data/dataset.hpp"

namespace wdist::ml {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Design matrix (rows = samples) from dataset rows.
inline Matrix design_matrix(const LabeledDataset& ds) {
  const auto p = static_cast<Eigen::Index>(ds.layout.total_length);
  Matrix x(static_cast<Eigen::Index>(ds.size()), p);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& f = ds.rows[i].features;
    if (f.size() != ds.layout.total_length) throw CompatibilityError("design_matrix: row width differs from layout");
    for (Eigen::Index j = 0; j < p; ++j) x(static_cast<Eigen::Index>(i), j) = f[static_cast<std::size_t>(j)];
  }
  return x;
}

inline Vector label_vector(const LabeledDataset& ds) {
  Vector y(static_cast<Eigen::Index>(ds.size()));
  for (std::size_t i = 0; i < ds.size(); ++i) y(static_cast<Eigen::Index>(i)) = ds.rows[i].label;
  return y;
}

inline void require_rows(const Matrix& x, const Vector& y, Eigen::Index min_rows, const char* what) {
  if (x.rows() != y.size()) throw ParameterError(std::string(what) + ": X and y have different row counts");
  if (x.rows() < min_rows)
    throw ParameterError(std::string(what) + ": needs at least " + std::to_string(min_rows) + " rows");
}

}  // namespace wdist::ml
