#pragma once

#include <cmath>
#include <vector>

#include "wdist/core/parallel.hpp"
#include "wdist/ml/tree.hpp"

namespace wdist::ml {

struct ForestParams {
  int n_trees = 100;
  bool bootstrap = true;
  int features_per_split = 0;  ///< 0 = ⌈p/3⌉
  int max_depth = -1;
  int min_samples_leaf = 1;
  std::uint64_t seed = 0;
};

struct RandomForest {
  std::vector<RegressionTree> trees;

  Vector predict(const Matrix& x) const {
    Vector out = Vector::Zero(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      double s = 0.0;
      for (const auto& t : trees) s += t.predict_row(x.row(i));
      out(i) = s / static_cast<double>(trees.size());
    }
    return out;
  }
};

inline int default_features_per_split(Eigen::Index p) { return static_cast<int>((p + 2) / 3); }

/// Bagged CART ensemble. Tree t draws its bootstrap sample and its split
/// features from a stream seeded by derive_seed(seed, t), so the result does
/// not depend on how trees are distributed across workers.
inline RandomForest fit_random_forest(const Matrix& x, const Vector& y, const ForestParams& params, int workers = 1) {
  require_rows(x, y, 2, "random forest");
  if (params.n_trees < 1) throw ParameterError("random forest: n_trees must be >= 1");
  if (params.features_per_split < 0 || params.features_per_split > x.cols())
    throw ParameterError("random forest: features_per_split out of range");
  TreeParams tp;
  tp.max_depth = params.max_depth;
  tp.min_samples_leaf = params.min_samples_leaf;
  tp.max_features = params.features_per_split > 0 ? params.features_per_split : default_features_per_split(x.cols());

  RandomForest forest;
  forest.trees.resize(static_cast<std::size_t>(params.n_trees));
  const auto n = static_cast<std::uint64_t>(x.rows());
  parallel_for(forest.trees.size(), workers, [&](std::size_t t) {
    SeededRandomSource rng(derive_seed(params.seed, t));
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < rows.size(); ++i)
      rows[i] = params.bootstrap ? static_cast<Eigen::Index>(rng.index(n)) : static_cast<Eigen::Index>(i);
    forest.trees[t] = fit_tree_rows(x, y, std::move(rows), tp, &rng);
  });
  return forest;
}

struct BoostingParams {
  int n_stages = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  int min_samples_leaf = 1;
};

struct GradientBoosting {
  double base = 0.0;
  double learning_rate = 0.1;
  std::vector<RegressionTree> trees;
  std::vector<double> train_mse;  ///< after stage 0 (the mean) through the last stage

  Vector predict(const Matrix& x, int stages = -1) const {
    const std::size_t m = stages < 0 ? trees.size() : std::min(trees.size(), static_cast<std::size_t>(stages));
    Vector out = Vector::Constant(x.rows(), base);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (std::size_t s = 0; s < m; ++s) out(i) += learning_rate * trees[s].predict_row(x.row(i));
    return out;
  }
};

/// Least-squares boosting: F₀ = mean(y), F_m = F_{m−1} + η·tree_m fitted to
/// the current residuals.
inline GradientBoosting fit_gradient_boosting(const Matrix& x, const Vector& y, const BoostingParams& params) {
  require_rows(x, y, 2, "gradient boosting");
  if (params.n_stages < 0) throw ParameterError("gradient boosting: n_stages must be >= 0");
  if (!(params.learning_rate > 0.0)) throw ParameterError("gradient boosting: learning_rate must be > 0");
  TreeParams tp;
  tp.max_depth = params.max_depth;
  tp.min_samples_leaf = params.min_samples_leaf;

  GradientBoosting gb;
  gb.base = y.mean();
  gb.learning_rate = params.learning_rate;
  Vector f = Vector::Constant(y.size(), gb.base);
  gb.train_mse.push_back((y - f).squaredNorm() / static_cast<double>(y.size()));
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(x.rows()));
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<Eigen::Index>(i);
  for (int s = 0; s < params.n_stages; ++s) {
    const Vector residual = y - f;
    gb.trees.push_back(fit_tree_rows(x, residual, rows, tp));
    f += params.learning_rate * gb.trees.back().predict(x);
    gb.train_mse.push_back((y - f).squaredNorm() / static_cast<double>(y.size()));
  }
  return gb;
}

}  // namespace wdist::ml
