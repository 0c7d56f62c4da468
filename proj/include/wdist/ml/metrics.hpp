#pragma once

#include <cmath>
#include <nlohmann/json.hpp>
#include <vector>

#include "wdist/ml/matrix.hpp"

namespace wdist::ml {

struct Metrics {
  double mse = 0.0;
  double mae = 0.0;
  double r2 = 0.0;
};

/// MSE, MAE and R² = 1 − SS_res/SS_tot with the mean of y_true. A constant
/// y_true has no defined R²; it is reported as 1 for a perfect fit, else 0.
inline Metrics evaluate(const Vector& y_true, const Vector& y_pred) {
  if (y_true.size() != y_pred.size()) throw ParameterError("evaluate: length mismatch");
  if (y_true.size() < 2) throw ParameterError("evaluate: needs at least 2 values");
  const double n = static_cast<double>(y_true.size());
  const Vector err = y_true - y_pred;
  Metrics m;
  const double ss_res = err.squaredNorm();
  m.mse = ss_res / n;
  m.mae = err.cwiseAbs().sum() / n;
  const double ss_tot = (y_true.array() - y_true.mean()).square().sum();
  m.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  return m;
}

inline Metrics evaluate(const std::vector<double>& y_true, const std::vector<double>& y_pred) {
  return evaluate(Eigen::Map<const Vector>(y_true.data(), static_cast<Eigen::Index>(y_true.size())),
                  Eigen::Map<const Vector>(y_pred.data(), static_cast<Eigen::Index>(y_pred.size())));
}

inline nlohmann::json to_json(const Metrics& m) { return {{"mse", m.mse}, {"mae", m.mae}, {"r2", m.r2}}; }

}  // namespace wdist::ml
