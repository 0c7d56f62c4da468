#pragma once

#include <cmath>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <string>
#include <variant>

#include "wdist/core/format.hpp"
#include "wdist/data/io.hpp"
#include "wdist/features/layout.hpp"
#include "wdist/ml/ensemble.hpp"
#include "wdist/ml/linear.hpp"
#include "wdist/ml/mlp.hpp"
#include "wdist/ml/scaler.hpp"

namespace wdist::ml {

inline constexpr int kModelFormatVersion = 1;

enum class ModelKind { linear, ridge, lasso, elastic_net, decision_tree, random_forest, gradient_boosting, mlp };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::linear: return "linear";
    case ModelKind::ridge: return "ridge";
    case ModelKind::lasso: return "lasso";
    case ModelKind::elastic_net: return "elastic_net";
    case ModelKind::decision_tree: return "decision_tree";
    case ModelKind::random_forest: return "random_forest";
    case ModelKind::gradient_boosting: return "gradient_boosting";
    case ModelKind::mlp: return "mlp";
  }
  return "?";
}

inline const std::vector<ModelKind>& all_model_kinds() {
  static const std::vector<ModelKind> kinds = {ModelKind::linear,        ModelKind::ridge,
                                               ModelKind::lasso,         ModelKind::elastic_net,
                                               ModelKind::decision_tree, ModelKind::random_forest,
                                               ModelKind::gradient_boosting, ModelKind::mlp};
  return kinds;
}

inline ModelKind model_kind_from_string(const std::string& s) {
  for (auto k : all_model_kinds())
    if (s == to_string(k)) return k;
  throw ParameterError("unknown model kind '" + s + "'");
}

inline bool is_linear_family(ModelKind k) {
  return k == ModelKind::linear || k == ModelKind::ridge || k == ModelKind::lasso || k == ModelKind::elastic_net;
}

using FittedModel = std::variant<LinearFit, RegressionTree, RandomForest, GradientBoosting, Mlp>;

struct RegressionModel {
  ModelKind kind = ModelKind::linear;
  nlohmann::json hyperparams;  ///< fully resolved, defaults included
  FeatureLayout layout;
  std::uint64_t layout_hash = 0;
  std::optional<StandardScaler> scaler;
  bool clip = false;
  FittedModel fitted;
  nlohmann::json info = nlohmann::json::object();  ///< training diagnostics (CV choice, epochs, ...)
};

namespace detail {

/// Reads hyperparameters with defaults, remembers the resolved values and
/// rejects keys nobody asked for.
class HyperReader {
 public:
  explicit HyperReader(const nlohmann::json& j) : in_(j.is_null() ? nlohmann::json::object() : j) {
    if (!in_.is_object()) throw ParameterError("hyperparameters must be a JSON object");
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    used_.insert(key);
    T value = fallback;
    if (in_.contains(key)) {
      try {
        value = in_.at(key).get<T>();
      } catch (const nlohmann::json::exception&) {
        throw ParameterError("hyperparameter '" + key + "' has the wrong type");
      }
    }
    out_[key] = value;
    return value;
  }

  bool has(const std::string& key) const { return in_.contains(key); }

  nlohmann::json finish() const {
    for (const auto& [key, value] : in_.items())
      if (!used_.count(key)) throw ParameterError("unknown hyperparameter '" + key + "'");
    return out_;
  }

 private:
  nlohmann::json in_;
  nlohmann::json out_ = nlohmann::json::object();
  std::set<std::string> used_;
};

inline LinearParams read_linear(HyperReader& h, ModelKind kind) {
  LinearParams p;
  if (kind == ModelKind::ridge) p.l2 = h.get("l2", 1e-3);
  if (kind == ModelKind::lasso || kind == ModelKind::elastic_net) {
    const bool lasso = kind == ModelKind::lasso;
    p.cv = h.get("cv", lasso && !h.has("l1"));
    p.l1 = h.get("l1", lasso ? 0.0 : 1e-4);
    if (!lasso) p.l2 = h.get("l2", 1e-4);
    p.cv_folds = h.get("cv_folds", p.cv_folds);
    p.cv_grid = h.get("cv_grid", p.cv_grid);
    p.cv_min_ratio = h.get("cv_min_ratio", p.cv_min_ratio);
    p.tolerance = h.get("tolerance", p.tolerance);
    p.max_sweeps = h.get("max_sweeps", p.max_sweeps);
    p.seed = h.get("seed", p.seed);
  }
  return p;
}

inline TreeParams read_tree(HyperReader& h) {
  TreeParams p;
  p.max_depth = h.get("max_depth", p.max_depth);
  p.min_samples_leaf = h.get("min_samples_leaf", p.min_samples_leaf);
  return p;
}

inline ForestParams read_forest(HyperReader& h) {
  ForestParams p;
  p.n_trees = h.get("n_trees", p.n_trees);
  p.bootstrap = h.get("bootstrap", p.bootstrap);
  p.features_per_split = h.get("features_per_split", p.features_per_split);
  p.max_depth = h.get("max_depth", p.max_depth);
  p.min_samples_leaf = h.get("min_samples_leaf", p.min_samples_leaf);
  p.seed = h.get("seed", p.seed);
  return p;
}

inline BoostingParams read_boosting(HyperReader& h) {
  BoostingParams p;
  p.n_stages = h.get("n_stages", p.n_stages);
  p.learning_rate = h.get("learning_rate", p.learning_rate);
  p.max_depth = h.get("max_depth", p.max_depth);
  p.min_samples_leaf = h.get("min_samples_leaf", p.min_samples_leaf);
  return p;
}

inline MlpParams read_mlp(HyperReader& h) {
  MlpParams p;
  p.hidden = h.get("hidden", p.hidden);
  p.dropout = h.get("dropout", p.dropout);
  p.learning_rate = h.get("learning_rate", p.learning_rate);
  p.batch_size = h.get("batch_size", p.batch_size);
  p.epochs = h.get("epochs", p.epochs);
  p.patience = h.get("patience", p.patience);
  p.plateau_factor = h.get("plateau_factor", p.plateau_factor);
  p.min_delta = h.get("min_delta", p.min_delta);
  p.batchnorm = h.get("batchnorm", p.batchnorm);
  p.bn_momentum = h.get("bn_momentum", p.bn_momentum);
  p.bn_epsilon = h.get("bn_epsilon", p.bn_epsilon);
  p.val_fraction = h.get("val_fraction", p.val_fraction);
  p.seed = h.get("seed", p.seed);
  return p;
}

inline void check_inputs(const RegressionModel& m, const Matrix& x, std::uint64_t layout_hash) {
  if (layout_hash != m.layout_hash)
    throw CompatibilityError("model was trained on feature layout " + hex64(m.layout_hash) + ", input uses " +
                             hex64(layout_hash));
  if (x.cols() != static_cast<Eigen::Index>(m.layout.total_length))
    throw CompatibilityError("model expects " + std::to_string(m.layout.total_length) + " features, input has " +
                             std::to_string(x.cols()));
}

}  // namespace detail

/// Fits `kind` on (x, y). `hyper` overrides defaults; the resolved set is
/// stored on the model. Standardization applies to the linear family and the
/// MLP (override with "standardize"). Validation rows, when given, drive the
/// MLP's plateau schedule and best-epoch selection.
inline RegressionModel fit_model(ModelKind kind, const Matrix& x, const Vector& y, const FeatureLayout& layout,
                                 const nlohmann::json& hyper = nullptr, const Matrix* x_val = nullptr,
                                 const Vector* y_val = nullptr, int workers = 1) {
  if (x.cols() != static_cast<Eigen::Index>(layout.total_length))
    throw CompatibilityError("training matrix width differs from the feature layout");
  if (x.rows() != y.size()) throw ParameterError("fit: X and y have different row counts");
  detail::HyperReader h(hyper);
  RegressionModel m;
  m.kind = kind;
  m.layout = layout;
  m.layout_hash = layout_hash(layout);
  m.clip = h.get("clip", false);
  const bool standardize = h.get("standardize", is_linear_family(kind) || kind == ModelKind::mlp);

  Matrix xs, xv;
  if (standardize) {
    m.scaler = StandardScaler::fit(x);
    xs = m.scaler->transform(x);
    if (x_val != nullptr) xv = m.scaler->transform(*x_val);
  }
  const Matrix& xt = standardize ? xs : x;
  const Matrix* val = x_val == nullptr ? nullptr : (standardize ? &xv : x_val);

  switch (kind) {
    case ModelKind::linear: {
      m.fitted = fit_least_squares(xt, y);
      break;
    }
    case ModelKind::ridge: {
      const auto p = detail::read_linear(h, kind);
      m.fitted = fit_ridge(xt, y, p.l2);
      break;
    }
    case ModelKind::lasso:
    case ModelKind::elastic_net: {
      const auto p = detail::read_linear(h, kind);
      LinearFit fit = p.cv ? fit_coordinate_descent_cv(xt, y, p) : fit_coordinate_descent(xt, y, p);
      m.info["l1"] = fit.l1;
      m.info["l2"] = fit.l2;
      m.info["sweeps"] = fit.sweeps;
      m.info["converged"] = fit.converged;
      if (p.cv) m.info["cv"] = {{"folds", p.cv_folds}, {"grid", fit.cv_grid}, {"mse", fit.cv_mse}};
      m.fitted = std::move(fit);
      break;
    }
    case ModelKind::decision_tree: {
      const auto tree = fit_decision_tree(xt, y, detail::read_tree(h));
      m.info["nodes"] = tree.node_count();
      m.info["depth"] = tree.depth();
      m.fitted = tree;
      break;
    }
    case ModelKind::random_forest: {
      auto p = detail::read_forest(h);
      if (p.features_per_split == 0) p.features_per_split = default_features_per_split(xt.cols());
      m.fitted = fit_random_forest(xt, y, p, workers);
      break;
    }
    case ModelKind::gradient_boosting: {
      auto gb = fit_gradient_boosting(xt, y, detail::read_boosting(h));
      m.info["train_mse"] = gb.train_mse.back();
      m.fitted = std::move(gb);
      break;
    }
    case ModelKind::mlp: {
      auto fit = fit_mlp(xt, y, detail::read_mlp(h), val, y_val);
      nlohmann::json hist = nlohmann::json::array();
      for (const auto& e : fit.history)
        hist.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_mse", e.val_mse}, {"lr", e.learning_rate}});
      m.info["best_epoch"] = fit.best_epoch;
      m.info["best_val_mse"] = fit.best_val_mse;
      m.info["history"] = std::move(hist);
      m.fitted = std::move(fit.net);
      break;
    }
  }
  m.hyperparams = h.finish();
  return m;
}

inline RegressionModel fit_model(ModelKind kind, const LabeledDataset& train, const nlohmann::json& hyper = nullptr,
                                 const LabeledDataset* val = nullptr, int workers = 1) {
  const Matrix x = design_matrix(train);
  const Vector y = label_vector(train);
  if (val != nullptr) {
    if (layout_hash(val->layout) != layout_hash(train.layout))
      throw CompatibilityError("validation and training layouts differ");
    const Matrix xv = design_matrix(*val);
    const Vector yv = label_vector(*val);
    return fit_model(kind, x, y, train.layout, hyper, &xv, &yv, workers);
  }
  return fit_model(kind, x, y, train.layout, hyper, nullptr, nullptr, workers);
}

/// Predictions for rows of x, which must come from a layout with hash
/// `input_layout_hash` equal to the training layout's.
inline Vector predict(const RegressionModel& m, const Matrix& x, std::uint64_t input_layout_hash) {
  detail::check_inputs(m, x, input_layout_hash);
  const Matrix xs = m.scaler ? m.scaler->transform(x) : Matrix();
  const Matrix& in = m.scaler ? xs : x;
  Vector out = std::visit([&](const auto& f) -> Vector { return f.predict(in); }, m.fitted);
  if (m.clip) out = out.cwiseMax(0.0).cwiseMin(1.0);
  if (!out.allFinite()) throw NumericalError("model produced non-finite predictions");
  return out;
}

inline Vector predict(const RegressionModel& m, const LabeledDataset& ds) {
  return predict(m, design_matrix(ds), layout_hash(ds.layout));
}

/// Single-row convenience for validation harnesses.
inline double predict_one(const RegressionModel& m, const std::vector<double>& features, const FeatureLayout& layout) {
  Matrix x(1, static_cast<Eigen::Index>(features.size()));
  for (std::size_t j = 0; j < features.size(); ++j) x(0, static_cast<Eigen::Index>(j)) = features[j];
  return predict(m, x, layout_hash(layout))(0);
}

inline nlohmann::json to_json(const RegressionModel& m) {
  nlohmann::json fitted = std::visit(
      [](const auto& f) -> nlohmann::json {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, LinearFit>) {
          return {{"coef", vector_to_json(f.coef)}, {"intercept", f.intercept}};
        } else if constexpr (std::is_same_v<T, RegressionTree>) {
          return to_json(f);
        } else if constexpr (std::is_same_v<T, RandomForest>) {
          nlohmann::json trees = nlohmann::json::array();
          for (const auto& t : f.trees) trees.push_back(to_json(t));
          return {{"trees", trees}};
        } else if constexpr (std::is_same_v<T, GradientBoosting>) {
          nlohmann::json trees = nlohmann::json::array();
          for (const auto& t : f.trees) trees.push_back(to_json(t));
          return {{"base", f.base}, {"learning_rate", f.learning_rate}, {"trees", trees}};
        } else {
          return f.to_json();
        }
      },
      m.fitted);
  return {{"format", "wdist-model"},
          {"version", kModelFormatVersion},
          {"kind", to_string(m.kind)},
          {"hyperparams", m.hyperparams},
          {"layout", wdist::to_json(m.layout)},
          {"layout_hash", hex64(m.layout_hash)},
          {"scaler", m.scaler ? to_json(*m.scaler) : nlohmann::json(nullptr)},
          {"clip", m.clip},
          {"fitted", fitted},
          {"info", m.info}};
}

inline RegressionModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != "wdist-model") throw ParseError("not a model file");
  if (j.value("version", -1) != kModelFormatVersion)
    throw CompatibilityError("unsupported model format version " + j.value("version", nlohmann::json()).dump());
  try {
    RegressionModel m;
    m.kind = model_kind_from_string(j.at("kind").get<std::string>());
    m.hyperparams = j.at("hyperparams");
    m.layout = layout_from_json(j.at("layout"));
    m.layout_hash = layout_hash(m.layout);
    if (j.at("layout_hash").get<std::string>() != hex64(m.layout_hash))
      throw CompatibilityError("model layout hash does not match its embedded layout");
    const FeatureLayout canonical = layout_for(m.layout.n_qubits);
    if (m.layout != canonical) throw CompatibilityError("model layout differs from the canonical layout");
    if (!j.at("scaler").is_null()) {
      m.scaler = scaler_from_json(j.at("scaler"));
      if (m.scaler->mean.size() != static_cast<Eigen::Index>(m.layout.total_length))
        throw ParseError("scaler width differs from the layout");
    }
    m.clip = j.at("clip").get<bool>();
    m.info = j.value("info", nlohmann::json::object());
    const auto& f = j.at("fitted");
    const std::size_t p = m.layout.total_length;
    switch (m.kind) {
      case ModelKind::linear:
      case ModelKind::ridge:
      case ModelKind::lasso:
      case ModelKind::elastic_net: {
        LinearFit fit;
        fit.coef = vector_from_json(f.at("coef"));
        fit.intercept = f.at("intercept").get<double>();
        if (fit.coef.size() != static_cast<Eigen::Index>(p)) throw ParseError("coefficient count differs from layout");
        m.fitted = std::move(fit);
        break;
      }
      case ModelKind::decision_tree: m.fitted = tree_from_json(f, p); break;
      case ModelKind::random_forest: {
        RandomForest forest;
        for (const auto& t : f.at("trees")) forest.trees.push_back(tree_from_json(t, p));
        if (forest.trees.empty()) throw ParseError("forest has no trees");
        m.fitted = std::move(forest);
        break;
      }
      case ModelKind::gradient_boosting: {
        GradientBoosting gb;
        gb.base = f.at("base").get<double>();
        gb.learning_rate = f.at("learning_rate").get<double>();
        for (const auto& t : f.at("trees")) gb.trees.push_back(tree_from_json(t, p));
        m.fitted = std::move(gb);
        break;
      }
      case ModelKind::mlp: {
        Mlp net = Mlp::from_json(f);
        if (net.inputs() != static_cast<int>(p)) throw ParseError("network input width differs from layout");
        m.fitted = std::move(net);
        break;
      }
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
}

inline void save_model(const RegressionModel& m, const std::string& path) { write_json_file(path, to_json(m)); }

inline RegressionModel load_model(const std::string& path) { return model_from_json(read_json_file(path)); }

}  // namespace wdist::ml
