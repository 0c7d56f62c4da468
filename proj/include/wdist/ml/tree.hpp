#pragma once

#include <algorithm>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <numeric>
#include <vector>

#include "wdist/core/random.hpp"
#include "wdist/ml/matrix.hpp"

namespace wdist::ml {

struct TreeParams {
  int max_depth = -1;  ///< -1 = unlimited
  int min_samples_leaf = 1;
  int max_features = 0;  ///< features sampled per split; 0 = all
};

/// CART regression tree stored as parallel node arrays. feature = -1 marks a
/// leaf; otherwise rows with x[feature] <= threshold go left.
struct RegressionTree {
  std::vector<int> feature;
  std::vector<double> threshold;
  std::vector<int> left;
  std::vector<int> right;
  std::vector<double> value;

  std::size_t node_count() const { return feature.size(); }

  template <typename Row>
  double predict_row(const Row& x) const {
    int node = 0;
    while (feature[static_cast<std::size_t>(node)] >= 0) {
      const auto k = static_cast<std::size_t>(node);
      node = x(feature[k]) <= threshold[k] ? left[k] : right[k];
    }
    return value[static_cast<std::size_t>(node)];
  }

  Vector predict(const Matrix& x) const {
    Vector out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = predict_row(x.row(i));
    return out;
  }

  int depth() const {
    std::vector<int> d(node_count(), 0);
    int best = 0;
    for (std::size_t k = 0; k < node_count(); ++k) {
      best = std::max(best, d[k]);
      if (feature[k] >= 0) {
        d[static_cast<std::size_t>(left[k])] = d[k] + 1;
        d[static_cast<std::size_t>(right[k])] = d[k] + 1;
      }
    }
    return best;
  }
};

inline constexpr double kTieTolerance = 1e-12;

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;  ///< S_L²/n_L + S_R²/n_R, larger is better
  std::size_t n_left = 0;
};

namespace detail {

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const Vector& y, const TreeParams& params, SeededRandomSource* rng)
      : x_(x), y_(y), params_(params), rng_(rng) {
    if (params.min_samples_leaf < 1) throw ParameterError("tree: min_samples_leaf must be >= 1");
    if (params.max_depth < -1) throw ParameterError("tree: max_depth must be >= -1");
  }

  RegressionTree build(std::vector<Eigen::Index> rows) {
    if (rows.empty()) throw ParameterError("tree: needs at least 1 row");
    grow(rows, 0);
    return std::move(tree_);
  }

  /// Best split of `rows` over the candidate features in the given order.
  /// A candidate must beat the incumbent by a relative 1e-12 to replace it,
  /// so equal partitions reached through different summation orders still
  /// resolve to the lowest feature index and then the lowest threshold.
  SplitChoice best_split(const std::vector<Eigen::Index>& rows, const std::vector<int>& features) {
    SplitChoice best;
    const std::size_t n = rows.size();
    const std::size_t leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    if (n < 2 * leaf) return best;
    double total = 0.0;
    for (auto r : rows) total += y_(r);
    order_.resize(n);
    for (int f : features) {
      for (std::size_t i = 0; i < n; ++i) order_[i] = {x_(rows[i], f), y_(rows[i]), rows[i]};
      std::sort(order_.begin(), order_.end(), [](const Item& a, const Item& b) {
        return a.x < b.x || (a.x == b.x && a.row < b.row);
      });
      double left_sum = 0.0;
      for (std::size_t i = 0; i + leaf < n; ++i) {
        left_sum += order_[i].y;
        const std::size_t nl = i + 1, nr = n - nl;
        if (nl < leaf || nr < leaf) continue;
        if (!(order_[i].x < order_[i + 1].x)) continue;
        const double right_sum = total - left_sum;
        const double score = left_sum * left_sum / static_cast<double>(nl) + right_sum * right_sum / static_cast<double>(nr);
        if (best.feature < 0 || score > best.score + kTieTolerance * std::abs(best.score)) {
          best.feature = f;
          best.score = score;
          best.n_left = nl;
          double mid = 0.5 * (order_[i].x + order_[i + 1].x);
          if (!(mid < order_[i + 1].x)) mid = order_[i].x;  // adjacent doubles
          best.threshold = mid;
        }
      }
    }
    return best;
  }

 private:
  struct Item {
    double x;
    double y;
    Eigen::Index row;
  };

  std::vector<int> candidate_features() {
    const int p = static_cast<int>(x_.cols());
    std::vector<int> all(static_cast<std::size_t>(p));
    std::iota(all.begin(), all.end(), 0);
    if (rng_ == nullptr || params_.max_features <= 0 || params_.max_features >= p) return all;
    // partial Fisher–Yates: the first m entries are the sample
    const auto m = static_cast<std::size_t>(params_.max_features);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng_->index(static_cast<std::uint64_t>(p) - i));
      std::swap(all[i], all[j]);
    }
    std::sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(m));
    std::sort(all.begin() + static_cast<std::ptrdiff_t>(m), all.end());
    return all;
  }

  int add_leaf(const std::vector<Eigen::Index>& rows) {
    double sum = 0.0;
    for (auto r : rows) sum += y_(r);
    tree_.feature.push_back(-1);
    tree_.threshold.push_back(0.0);
    tree_.left.push_back(-1);
    tree_.right.push_back(-1);
    tree_.value.push_back(sum / static_cast<double>(rows.size()));
    return static_cast<int>(tree_.feature.size() - 1);
  }

  int grow(std::vector<Eigen::Index>& rows, int depth) {
    const int node = add_leaf(rows);
    if (params_.max_depth >= 0 && depth >= params_.max_depth) return node;
    bool constant = true;
    for (auto r : rows)
      if (y_(r) != y_(rows.front())) {
        constant = false;
        break;
      }
    if (constant) return node;

    std::vector<int> features = candidate_features();
    SplitChoice split;
    const std::size_t m = rng_ != nullptr && params_.max_features > 0
                              ? std::min<std::size_t>(static_cast<std::size_t>(params_.max_features), features.size())
                              : features.size();
    split = best_split(rows, std::vector<int>(features.begin(), features.begin() + static_cast<std::ptrdiff_t>(m)));
    if (split.feature < 0 && m < features.size())  // no usable feature in the sample: fall back to the rest
      split = best_split(rows, std::vector<int>(features.begin() + static_cast<std::ptrdiff_t>(m), features.end()));
    if (split.feature < 0) return node;

    std::vector<Eigen::Index> left_rows, right_rows;
    left_rows.reserve(split.n_left);
    right_rows.reserve(rows.size() - split.n_left);
    for (auto r : rows) (x_(r, split.feature) <= split.threshold ? left_rows : right_rows).push_back(r);
    std::vector<Eigen::Index>().swap(rows);

    const auto k = static_cast<std::size_t>(node);
    tree_.feature[k] = split.feature;
    tree_.threshold[k] = split.threshold;
    const int l = grow(left_rows, depth + 1);
    tree_.left[k] = l;
    const int r = grow(right_rows, depth + 1);
    tree_.right[k] = r;
    return node;
  }

  const Matrix& x_;
  const Vector& y_;
  TreeParams params_;
  SeededRandomSource* rng_;
  RegressionTree tree_;
  std::vector<Item> order_;
};

}  // namespace detail

/// Fits a tree on the given row multiset (duplicates allowed, as in a
/// bootstrap sample). Feature subsampling draws from `rng` when provided.
inline RegressionTree fit_tree_rows(const Matrix& x, const Vector& y, std::vector<Eigen::Index> rows,
                                    const TreeParams& params, SeededRandomSource* rng = nullptr) {
  detail::TreeBuilder builder(x, y, params, rng);
  return builder.build(std::move(rows));
}

inline RegressionTree fit_decision_tree(const Matrix& x, const Vector& y, const TreeParams& params = {}) {
  require_rows(x, y, 1, "decision tree");
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(x.rows()));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  TreeParams p = params;
  p.max_features = 0;
  return fit_tree_rows(x, y, std::move(rows), p);
}

inline nlohmann::json to_json(const RegressionTree& t) {
  return {{"feature", t.feature}, {"threshold", t.threshold}, {"left", t.left}, {"right", t.right}, {"value", t.value}};
}

inline RegressionTree tree_from_json(const nlohmann::json& j, std::size_t n_features) {
  RegressionTree t;
  t.feature = j.at("feature").get<std::vector<int>>();
  t.threshold = j.at("threshold").get<std::vector<double>>();
  t.left = j.at("left").get<std::vector<int>>();
  t.right = j.at("right").get<std::vector<int>>();
  t.value = j.at("value").get<std::vector<double>>();
  const std::size_t n = t.feature.size();
  if (n == 0 || t.threshold.size() != n || t.left.size() != n || t.right.size() != n || t.value.size() != n)
    throw ParseError("tree: node arrays are empty or have different lengths");
  for (std::size_t k = 0; k < n; ++k) {
    if (t.feature[k] < 0) continue;
    if (static_cast<std::size_t>(t.feature[k]) >= n_features) throw ParseError("tree: feature index out of range");
    // children always follow their parent, which also rules out cycles
    for (int c : {t.left[k], t.right[k]})
      if (c <= static_cast<int>(k) || static_cast<std::size_t>(c) >= n) throw ParseError("tree: bad child index");
  }
  return t;
}

}  // namespace wdist::ml
