#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "wdist/features/layout.hpp"
#include "wdist/ml/matrix.hpp"

namespace wdist::ml {

struct RankedFeature {
  std::size_t index = 0;
  std::string name;
  double correlation = 0.0;
};

/// Pearson r between every feature and the label, ranked by |r| (ties by
/// feature index). Features whose spread is at round-off level, std below
/// 1e-12·max(1, |mean|), count as constant and get r = 0.
inline std::vector<RankedFeature> pearson_feature_ranking(const LabeledDataset& ds, std::size_t k) {
  if (k < 1) throw ParameterError("ranking: k must be >= 1");
  if (ds.size() < 3) throw ParameterError("ranking: needs at least 3 rows");
  const Matrix x = design_matrix(ds);
  const Vector y = label_vector(ds);
  const Vector yc = y.array() - y.mean();
  const double y_norm = yc.norm();
  const auto names = feature_names(ds.layout);
  const double n = static_cast<double>(ds.size());

  std::vector<RankedFeature> all;
  all.reserve(names.size());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mean = x.col(j).mean();
    const Vector xc = x.col(j).array() - mean;
    const double x_norm = xc.norm();
    double r = 0.0;
    if (x_norm / std::sqrt(n) > 1e-12 * std::max(1.0, std::abs(mean)) && y_norm > 0.0)
      r = std::clamp(xc.dot(yc) / (x_norm * y_norm), -1.0, 1.0);
    all.push_back({static_cast<std::size_t>(j), names[static_cast<std::size_t>(j)], r});
  }
  std::stable_sort(all.begin(), all.end(), [](const RankedFeature& a, const RankedFeature& b) {
    return std::abs(a.correlation) > std::abs(b.correlation);
  });
  all.resize(std::min(k, all.size()));
  return all;
}

}  // namespace wdist::ml
