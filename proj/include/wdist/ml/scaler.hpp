#pragma once

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "wdist/ml/matrix.hpp"

namespace wdist::ml {

inline constexpr double kScalerStdFloor = 1e-12;

/// Per-feature standardization; population std floored at 1e-12.
struct StandardScaler {
  Vector mean;
  Vector scale;

  static StandardScaler fit(const Matrix& x) {
    if (x.rows() < 1) throw ParameterError("StandardScaler: empty input");
    StandardScaler s;
    s.mean = x.colwise().mean().transpose();
    s.scale.resize(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double var = (x.col(j).array() - s.mean(j)).square().mean();
      s.scale(j) = std::max(std::sqrt(var), kScalerStdFloor);
    }
    return s;
  }

  Matrix transform(const Matrix& x) const {
    check(x);
    return (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
  }

  Matrix inverse_transform(const Matrix& z) const {
    check(z);
    return (z.array().rowwise() * scale.transpose().array()).rowwise() + mean.transpose().array();
  }

 private:
  void check(const Matrix& x) const {
    if (x.cols() != mean.size()) throw CompatibilityError("StandardScaler: feature width mismatch");
  }
};

inline nlohmann::json vector_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Vector vector_from_json(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

inline nlohmann::json to_json(const StandardScaler& s) {
  return {{"mean", vector_to_json(s.mean)}, {"scale", vector_to_json(s.scale)}};
}

inline StandardScaler scaler_from_json(const nlohmann::json& j) {
  StandardScaler s;
  s.mean = vector_from_json(j.at("mean"));
  s.scale = vector_from_json(j.at("scale"));
  if (s.mean.size() != s.scale.size()) throw ParseError("scaler: mean and scale lengths differ");
  return s;
}

}  // namespace wdist::ml
