#pragma once

#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <vector>

#include "wdist/core/random.hpp"
#include "wdist/ml/matrix.hpp"

namespace wdist::ml {

struct MlpParams {
  std::vector<int> hidden = {256, 128, 64};
  double dropout = 0.2;
  double learning_rate = 1e-3;
  int batch_size = 64;
  int epochs = 200;
  int patience = 10;
  double plateau_factor = 0.5;
  double min_delta = 1e-6;
  bool batchnorm = true;
  double bn_momentum = 0.1;
  double bn_epsilon = 1e-5;
  double val_fraction = 0.1;  ///< held out from training rows when no validation set is given
  std::uint64_t seed = 0;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_mse = 0.0;
  double learning_rate = 0.0;
};

/// Fully connected regressor: hidden blocks Linear → BatchNorm → ReLU →
/// Dropout, then a linear output unit. Activations are stored with samples
/// as columns.
///
/// Parameters live in one flat list: hidden layer l owns W (index 4l),
/// b (4l+1), γ (4l+2) and β (4l+3); the output layer owns W (4L) and b (4L+1).
/// Without batch normalization γ and β stay at 1 and 0 and receive no updates.
class Mlp {
 public:
  Mlp() = default;

  Mlp(int inputs, const MlpParams& p, SeededRandomSource& rng) : batchnorm_(p.batchnorm), dropout_(p.dropout),
                                                                 momentum_(p.bn_momentum), epsilon_(p.bn_epsilon) {
    if (inputs < 1) throw ParameterError("mlp: needs at least one input feature");
    if (!(p.dropout >= 0.0 && p.dropout < 1.0)) throw ParameterError("mlp: dropout must be in [0, 1)");
    int fan_in = inputs;
    for (int width : p.hidden) {
      if (width < 1) throw ParameterError("mlp: hidden widths must be >= 1");
      params_.push_back(gaussian(width, fan_in, std::sqrt(2.0 / fan_in), rng));
      params_.push_back(Matrix::Zero(width, 1));
      params_.push_back(Matrix::Ones(width, 1));
      params_.push_back(Matrix::Zero(width, 1));
      running_mean_.push_back(Vector::Zero(width));
      running_var_.push_back(Vector::Ones(width));
      fan_in = width;
    }
    params_.push_back(gaussian(1, fan_in, std::sqrt(1.0 / fan_in), rng));
    params_.push_back(Matrix::Zero(1, 1));
  }

  int hidden_layers() const { return static_cast<int>(running_mean_.size()); }
  int inputs() const { return static_cast<int>(params_.front().cols()); }
  std::vector<Matrix>& params() { return params_; }
  const std::vector<Matrix>& params() const { return params_; }

  /// Inference-mode prediction (running statistics, no dropout) for rows of x.
  Vector predict(const Matrix& x) const {
    if (x.cols() != inputs()) throw CompatibilityError("mlp: feature width mismatch");
    Vector out(x.rows());
    const Eigen::Index chunk = 512;
    for (Eigen::Index start = 0; start < x.rows(); start += chunk) {
      const Eigen::Index len = std::min(chunk, x.rows() - start);
      Cache cache;
      const Matrix a = x.middleRows(start, len).transpose();
      out.segment(start, len) = forward(a, false, nullptr, cache).transpose();
    }
    return out;
  }

  /// MSE on (x, y) plus gradients for every parameter. `train_bn` selects
  /// batch statistics (true) or running statistics (false); `dropout_rng`
  /// enables dropout when non-null. Running statistics are not touched.
  double loss_and_gradient(const Matrix& xt, const Vector& y, bool train_bn, SeededRandomSource* dropout_rng,
                           std::vector<Matrix>& grads) const {
    Cache cache;
    const Eigen::RowVectorXd pred = forward(xt, train_bn, dropout_rng, cache);
    const double b = static_cast<double>(y.size());
    const Eigen::RowVectorXd diff = pred - y.transpose();
    const double loss = diff.squaredNorm() / b;
    backward(cache, 2.0 * diff / b, train_bn, grads);
    return loss;
  }

  /// One optimizer-facing training step: gradients in batch mode with
  /// dropout, and running statistics updated from the batch.
  double train_step(const Matrix& xt, const Vector& y, SeededRandomSource& rng, std::vector<Matrix>& grads) {
    Cache cache;
    const Eigen::RowVectorXd pred = forward(xt, batchnorm_, dropout_ > 0.0 ? &rng : nullptr, cache);
    const double b = static_cast<double>(y.size());
    const Eigen::RowVectorXd diff = pred - y.transpose();
    const double loss = diff.squaredNorm() / b;
    backward(cache, 2.0 * diff / b, batchnorm_, grads);
    if (batchnorm_) {
      for (int l = 0; l < hidden_layers(); ++l) {
        const auto k = static_cast<std::size_t>(l);
        const double unbiased = b > 1.0 ? b / (b - 1.0) : 1.0;
        running_mean_[k] = (1.0 - momentum_) * running_mean_[k] + momentum_ * cache.layers[k].mean;
        running_var_[k] = (1.0 - momentum_) * running_var_[k] + momentum_ * unbiased * cache.layers[k].var;
      }
    }
    return loss;
  }

  nlohmann::json to_json() const {
    nlohmann::json params = nlohmann::json::array();
    for (const auto& m : params_) params.push_back(matrix_json(m));
    nlohmann::json mean = nlohmann::json::array(), var = nlohmann::json::array();
    for (std::size_t l = 0; l < running_mean_.size(); ++l) {
      mean.push_back(std::vector<double>(running_mean_[l].data(), running_mean_[l].data() + running_mean_[l].size()));
      var.push_back(std::vector<double>(running_var_[l].data(), running_var_[l].data() + running_var_[l].size()));
    }
    return {{"batchnorm", batchnorm_}, {"dropout", dropout_},     {"bn_momentum", momentum_},
            {"bn_epsilon", epsilon_},  {"params", params},        {"running_mean", mean},
            {"running_var", var}};
  }

  static Mlp from_json(const nlohmann::json& j) {
    Mlp m;
    m.batchnorm_ = j.at("batchnorm").get<bool>();
    m.dropout_ = j.at("dropout").get<double>();
    m.momentum_ = j.at("bn_momentum").get<double>();
    m.epsilon_ = j.at("bn_epsilon").get<double>();
    for (const auto& p : j.at("params")) m.params_.push_back(matrix_from(p));
    for (const auto& v : j.at("running_mean")) m.running_mean_.push_back(vec_from(v));
    for (const auto& v : j.at("running_var")) m.running_var_.push_back(vec_from(v));
    const std::size_t layers = m.running_mean_.size();
    if (m.params_.size() != 4 * layers + 2 || m.running_var_.size() != layers)
      throw ParseError("mlp: parameter list does not match the layer count");
    Eigen::Index fan_in = m.params_.front().cols();
    for (std::size_t l = 0; l <= layers; ++l) {
      const Matrix& w = m.params_[4 * l];
      if (w.cols() != fan_in || m.params_[4 * l + 1].rows() != w.rows())
        throw ParseError("mlp: inconsistent layer shapes");
      if (l < layers && (m.params_[4 * l + 2].rows() != w.rows() || m.params_[4 * l + 3].rows() != w.rows() ||
                         m.running_mean_[l].size() != w.rows() || m.running_var_[l].size() != w.rows()))
        throw ParseError("mlp: inconsistent normalization shapes");
      fan_in = w.rows();
    }
    if (m.params_.back().rows() != 1) throw ParseError("mlp: output layer must have one unit");
    return m;
  }

  struct Snapshot {
    std::vector<Matrix> params;
    std::vector<Vector> running_mean, running_var;
  };
  Snapshot snapshot() const { return {params_, running_mean_, running_var_}; }
  void restore(const Snapshot& s) {
    params_ = s.params;
    running_mean_ = s.running_mean;
    running_var_ = s.running_var;
  }

 private:
  struct LayerCache {
    Matrix input;  // activations entering the layer
    Matrix zhat;   // normalized pre-activations
    Vector mean, var, inv_std;
    Matrix mask;   // ReLU gate times dropout scale
  };
  struct Cache {
    std::vector<LayerCache> layers;
    Matrix last;  // input to the output layer
  };

  static Matrix gaussian(int rows, int cols, double scale, SeededRandomSource& rng) {
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = scale * rng.normal();
    return m;
  }

  static nlohmann::json matrix_json(const Matrix& m) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
  }

  static Matrix matrix_from(const nlohmann::json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>(), cols = j.at("cols").get<Eigen::Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (rows < 1 || cols < 1 || static_cast<Eigen::Index>(data.size()) != rows * cols)
      throw ParseError("mlp: matrix size does not match its data");
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = data[static_cast<std::size_t>(i * cols + k)];
    return m;
  }

  static Vector vec_from(const nlohmann::json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  }

  Eigen::RowVectorXd forward(const Matrix& xt, bool train_bn, SeededRandomSource* dropout_rng, Cache& cache) const {
    Matrix a = xt;
    const Eigen::Index b = xt.cols();
    cache.layers.resize(static_cast<std::size_t>(hidden_layers()));
    for (int l = 0; l < hidden_layers(); ++l) {
      const auto k = static_cast<std::size_t>(l);
      const auto base = 4 * k;
      LayerCache& lc = cache.layers[k];
      Matrix z = params_[base] * a;
      z.colwise() += params_[base + 1].col(0);
      if (batchnorm_) {
        if (train_bn) {
          lc.mean = z.rowwise().mean();
          lc.var = (z.colwise() - lc.mean).array().square().rowwise().mean();
        } else {
          lc.mean = running_mean_[k];
          lc.var = running_var_[k];
        }
        lc.inv_std = (lc.var.array() + epsilon_).rsqrt();
        lc.zhat = (z.colwise() - lc.mean).array().colwise() * lc.inv_std.array();
        z = (lc.zhat.array().colwise() * params_[base + 2].col(0).array()).colwise() +
            params_[base + 3].col(0).array();
      }
      lc.mask = (z.array() > 0.0).cast<double>();
      if (dropout_rng != nullptr && dropout_ > 0.0) {
        const double keep = 1.0 - dropout_;
        for (Eigen::Index j = 0; j < b; ++j)
          for (Eigen::Index i = 0; i < lc.mask.rows(); ++i)
            lc.mask(i, j) *= dropout_rng->uniform() < keep ? 1.0 / keep : 0.0;
      }
      lc.input = std::move(a);
      a = z.cwiseProduct(lc.mask);
    }
    const auto out = 4 * static_cast<std::size_t>(hidden_layers());
    Eigen::RowVectorXd pred = params_[out] * a;
    pred.array() += params_[out + 1](0, 0);
    cache.last = std::move(a);
    return pred;
  }

  void backward(const Cache& cache, const Eigen::RowVectorXd& dpred, bool train_bn, std::vector<Matrix>& grads) const {
    grads.resize(params_.size());
    const auto out = 4 * static_cast<std::size_t>(hidden_layers());
    grads[out] = dpred * cache.last.transpose();
    grads[out + 1] = Matrix::Constant(1, 1, dpred.sum());
    Matrix da = params_[out].transpose() * dpred;
    const double b = static_cast<double>(dpred.size());
    for (int l = hidden_layers() - 1; l >= 0; --l) {
      const auto k = static_cast<std::size_t>(l);
      const auto base = 4 * k;
      const LayerCache& lc = cache.layers[k];
      Matrix dz = da.cwiseProduct(lc.mask);  // gradient w.r.t. the BN output
      if (batchnorm_) {
        grads[base + 2] = (dz.cwiseProduct(lc.zhat)).rowwise().sum();
        grads[base + 3] = dz.rowwise().sum();
        const Matrix dzhat = dz.array().colwise() * params_[base + 2].col(0).array();
        if (train_bn) {
          const Vector sum_d = dzhat.rowwise().sum();
          const Vector sum_dz = dzhat.cwiseProduct(lc.zhat).rowwise().sum();
          dz = ((b * dzhat).colwise() - sum_d).array() - lc.zhat.array().colwise() * sum_dz.array();
          dz = dz.array().colwise() * (lc.inv_std.array() / b);
        } else {
          dz = dzhat.array().colwise() * lc.inv_std.array();
        }
      } else {
        grads[base + 2] = Matrix::Zero(params_[base + 2].rows(), 1);
        grads[base + 3] = Matrix::Zero(params_[base + 3].rows(), 1);
      }
      grads[base] = dz * lc.input.transpose();
      grads[base + 1] = dz.rowwise().sum();
      if (l > 0) da = params_[base].transpose() * dz;
    }
  }

  bool batchnorm_ = true;
  double dropout_ = 0.0;
  double momentum_ = 0.1;
  double epsilon_ = 1e-5;
  std::vector<Matrix> params_;
  std::vector<Vector> running_mean_, running_var_;
};

struct MlpFit {
  Mlp net;
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_val_mse = std::numeric_limits<double>::infinity();
};

namespace detail {

inline Matrix gather_columns(const Matrix& xt, const std::vector<Eigen::Index>& idx, std::size_t from, std::size_t to) {
  Matrix out(xt.rows(), static_cast<Eigen::Index>(to - from));
  for (std::size_t i = from; i < to; ++i) out.col(static_cast<Eigen::Index>(i - from)) = xt.col(idx[i]);
  return out;
}

}  // namespace detail

/// Adam on MSE with a halve-on-plateau learning rate; returns the weights of
/// the epoch with the lowest validation MSE. Without an explicit validation
/// set a seeded `val_fraction` of the training rows is held out.
inline MlpFit fit_mlp(const Matrix& x, const Vector& y, const MlpParams& p, const Matrix* x_val = nullptr,
                      const Vector* y_val = nullptr) {
  if (x.rows() != y.size()) throw ParameterError("mlp: X and y have different row counts");
  if (p.batch_size < 2) throw ParameterError("mlp: batch_size must be >= 2");
  if (p.epochs < 1 || p.patience < 1) throw ParameterError("mlp: epochs and patience must be >= 1");
  if (!(p.learning_rate > 0.0) || !(p.plateau_factor > 0.0 && p.plateau_factor < 1.0))
    throw ParameterError("mlp: invalid learning-rate schedule");

  Matrix train_x, val_x;
  Vector train_y, val_y;
  if (x_val != nullptr && y_val != nullptr) {
    if (x_val->cols() != x.cols() || x_val->rows() != y_val->size() || x_val->rows() < 1)
      throw ParameterError("mlp: validation set does not match the training set");
    train_x = x;
    train_y = y;
    val_x = *x_val;
    val_y = *y_val;
  } else {
    if (!(p.val_fraction > 0.0 && p.val_fraction < 1.0)) throw ParameterError("mlp: val_fraction must be in (0, 1)");
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(x.rows()));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    SeededRandomSource rng(derive_seed(p.seed, 0x56414cULL));
    rng.shuffle(perm);
    const auto n_val = std::max<std::size_t>(1, static_cast<std::size_t>(p.val_fraction * static_cast<double>(perm.size())));
    const std::vector<Eigen::Index> val_idx(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<Eigen::Index> train_idx(perm.begin() + static_cast<std::ptrdiff_t>(n_val), perm.end());
    std::sort(train_idx.begin(), train_idx.end());
    train_x = x(train_idx, Eigen::all);
    train_y = y(train_idx);
    val_x = x(val_idx, Eigen::all);
    val_y = y(val_idx);
  }
  if (train_x.rows() < p.batch_size)
    throw ParameterError("mlp: needs at least batch_size (" + std::to_string(p.batch_size) + ") training rows");

  SeededRandomSource init_rng(derive_seed(p.seed, 0));
  MlpFit fit{Mlp(static_cast<int>(x.cols()), p, init_rng), {}, 0, std::numeric_limits<double>::infinity()};
  Mlp& net = fit.net;
  auto snapshot = net.snapshot();

  const Matrix xt = train_x.transpose();
  std::vector<Matrix> grads, m1, m2;
  for (const auto& w : net.params()) {
    m1.push_back(Matrix::Zero(w.rows(), w.cols()));
    m2.push_back(Matrix::Zero(w.rows(), w.cols()));
  }
  const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  long step = 0;
  double lr = p.learning_rate;
  int wait = 0;
  const std::size_t n = static_cast<std::size_t>(train_x.rows());
  const std::size_t bs = static_cast<std::size_t>(p.batch_size);
  std::vector<Eigen::Index> order(n);

  for (int epoch = 1; epoch <= p.epochs; ++epoch) {
    SeededRandomSource rng(derive_seed(p.seed, static_cast<std::uint64_t>(epoch)));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < n; start += bs) {
      const std::size_t end = std::min(n, start + bs);
      if (end - start < 2) continue;  // batch statistics need two rows
      const Matrix xb = detail::gather_columns(xt, order, start, end);
      Vector yb(static_cast<Eigen::Index>(end - start));
      for (std::size_t i = start; i < end; ++i) yb(static_cast<Eigen::Index>(i - start)) = train_y(order[i]);
      const double loss = net.train_step(xb, yb, rng, grads);
      if (!std::isfinite(loss)) throw DivergenceError("mlp: non-finite training loss", epoch);
      loss_sum += loss * static_cast<double>(end - start);
      seen += end - start;
      ++step;
      const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      auto& params = net.params();
      for (std::size_t k = 0; k < params.size(); ++k) {
        m1[k] = beta1 * m1[k] + (1.0 - beta1) * grads[k];
        m2[k] = beta2 * m2[k] + (1.0 - beta2) * grads[k].cwiseAbs2();
        params[k].array() -= lr * (m1[k].array() / c1) / ((m2[k].array() / c2).sqrt() + adam_eps);
      }
    }
    const Vector pred = net.predict(val_x);
    const double val_mse = (pred - val_y).squaredNorm() / static_cast<double>(val_y.size());
    if (!std::isfinite(val_mse)) throw DivergenceError("mlp: non-finite validation loss", epoch);
    fit.history.push_back({epoch, loss_sum / static_cast<double>(seen), val_mse, lr});
    if (val_mse < fit.best_val_mse - p.min_delta) {
      fit.best_val_mse = val_mse;
      fit.best_epoch = epoch;
      snapshot = net.snapshot();
      wait = 0;
    } else if (++wait >= p.patience) {
      lr *= p.plateau_factor;
      wait = 0;
    }
  }
  if (fit.best_epoch > 0) net.restore(snapshot);
  return fit;
}

}  // namespace wdist::ml
