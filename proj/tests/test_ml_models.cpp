#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "oracles.hpp"
#include "test_util.hpp"
#include "wdist/ml/metrics.hpp"
#include "wdist/ml/model.hpp"
#include "wdist/ml/ranking.hpp"

using namespace wdist;
using namespace wdist::ml;
using wdist::testing::TempDir;
using namespace wdist::oracle;

namespace {

/// Rows padded to the 41-wide one-qubit layout so models can be wrapped.
Matrix pad41(const Matrix& x) {
  Matrix out = Matrix::Zero(x.rows(), 41);
  out.leftCols(x.cols()) = x;
  return out;
}

}  // namespace

// ------------------------------------------------------------------ metrics

TEST(Metrics, ContractExamples) {
  const Vector y = (Vector(4) << 0.1, 0.4, 0.2, 0.9).finished();
  const auto same = evaluate(y, y);
  EXPECT_EQ(same.mse, 0.0);
  EXPECT_EQ(same.mae, 0.0);
  EXPECT_EQ(same.r2, 1.0);
  EXPECT_NEAR(evaluate(y, Vector::Constant(4, y.mean())).r2, 0.0, 1e-15);
  const auto hand = evaluate(std::vector<double>{0.0, 1.0}, std::vector<double>{0.5, 0.5});
  EXPECT_DOUBLE_EQ(hand.mse, 0.25);
  EXPECT_DOUBLE_EQ(hand.mae, 0.5);
  EXPECT_DOUBLE_EQ(hand.r2, 0.0);
  EXPECT_THROW(evaluate(std::vector<double>{1, 2}, std::vector<double>{1}), ParameterError);
}

TEST(Metrics, R2Decomposition) {
  SeededRandomSource rng(1);
  for (int t = 0; t < 50; ++t) {
    Vector y(20), p(20);
    for (int i = 0; i < 20; ++i) {
      y(i) = rng.uniform();
      p(i) = y(i) + 0.3 * rng.normal();
    }
    const auto m = evaluate(y, p);
    const double ss_tot = (y.array() - y.mean()).square().sum();
    EXPECT_NEAR(m.r2, 1.0 - m.mse * 20.0 / ss_tot, 1e-12);
    EXPECT_LE(m.r2, 1.0);
    EXPECT_GE(m.mse, 0.0);
  }
}

TEST(Scaler, InverseIsIdentityAndConstantColumnsSurvive) {
  SeededRandomSource rng(2);
  Matrix x = random_matrix(30, 5, rng) * 7.0;
  x.col(3).setConstant(2.5);
  const auto s = StandardScaler::fit(x);
  EXPECT_EQ(s.scale(3), kScalerStdFloor);
  const Matrix z = s.transform(x);
  EXPECT_LE((s.inverse_transform(z) - x).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(z.col(0).mean(), 0.0, 1e-12);
  EXPECT_NEAR(std::sqrt(z.col(0).array().square().mean()), 1.0, 1e-12);
  EXPECT_THROW(s.transform(Matrix::Zero(2, 4)), CompatibilityError);
}

// --------------------------------------------------------------- linear

TEST(Linear, ExactRecovery) {
  SeededRandomSource rng(3);
  const Matrix x = random_matrix(50, 3, rng);
  const Vector y = (3.0 * x.col(0)).array() + 1.0;
  const auto fit = fit_least_squares(x, y);
  EXPECT_NEAR(fit.coef(0), 3.0, 1e-8);
  EXPECT_NEAR(fit.coef(1), 0.0, 1e-8);
  EXPECT_NEAR(fit.intercept, 1.0, 1e-8);
  const auto ridge0 = fit_ridge(x, y, 0.0);
  EXPECT_NEAR(ridge0.coef(0), 3.0, 1e-8);
}

TEST(Linear, CollinearDesignUsesMinimumNorm) {
  SeededRandomSource rng(4);
  Matrix x = random_matrix(40, 3, rng);
  x.col(2) = x.col(0);  // duplicate column
  const Vector y = (2.0 * x.col(0) - x.col(1)).array() + 0.5;
  const auto fit = fit_least_squares(x, y);
  EXPECT_NEAR(fit.coef(0), 1.0, 1e-8);
  EXPECT_NEAR(fit.coef(2), 1.0, 1e-8);
  EXPECT_LE((fit.predict(x) - y).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_THROW(fit_least_squares(Matrix::Ones(5, 2), Vector::LinSpaced(5, 0, 1)), SingularityError);
  EXPECT_THROW(fit_least_squares(Matrix::Ones(1, 2), Vector::Ones(1)), ParameterError);
}

TEST(Linear, RidgeLimit) {
  SeededRandomSource rng(5);
  const Matrix x = random_matrix(40, 4, rng);
  const Vector y = (x.col(0) - 2.0 * x.col(3)).array() + 0.7;
  const auto fit = fit_ridge(x, y, 1e12);
  EXPECT_LE(fit.coef.cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(fit.intercept, y.mean(), 1e-9);
  // oracle: ridge closed form on centered data
  const double l2 = 0.3;
  const Matrix xc = x.rowwise() - x.colwise().mean();
  const Vector yc = y.array() - y.mean();
  const Vector w = (xc.transpose() * xc / 40.0 + l2 * Matrix::Identity(4, 4)).inverse() * (xc.transpose() * yc / 40.0);
  EXPECT_LE((fit_ridge(x, y, l2).coef - w).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Linear, LassoSingleFeatureMatchesSoftThreshold) {
  SeededRandomSource rng(6);
  const Matrix x = random_matrix(60, 1, rng);
  const Vector y = (0.8 * x.col(0)).array() + 0.1 * rng.normal();
  LinearParams p;
  p.l1 = 0.2;
  const auto fit = fit_coordinate_descent(x, y, p);
  const Matrix xc = x.rowwise() - x.colwise().mean();
  const Vector yc = y.array() - y.mean();
  const double z = xc.squaredNorm() / 60.0, rho = xc.col(0).dot(yc) / 60.0;
  const double expect = rho > p.l1 ? (rho - p.l1) / z : (rho < -p.l1 ? (rho + p.l1) / z : 0.0);
  EXPECT_NEAR(fit.coef(0), expect, 1e-12);
}

TEST(Linear, LassoCvZeroesNoiseFeature) {
  SeededRandomSource rng(7);
  const Eigen::Index n = 200;
  Matrix x(n, 2);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = rng.normal();
    y(i) = 2.0 * x(i, 0) + 0.5 + 0.05 * rng.normal();
    x(i, 1) = rng.normal();
  }
  // make the noise column orthogonal to 1, x0 and y so its KKT gradient vanishes
  Matrix basis(n, 3);
  basis << Vector::Ones(n), x.col(0), y;
  const Eigen::HouseholderQR<Matrix> qr(basis);
  const Matrix q = qr.householderQ() * Matrix::Identity(n, 3);
  x.col(1) -= q * (q.transpose() * x.col(1));

  LinearParams p;
  p.cv = true;
  p.seed = 9;
  const auto fit = fit_coordinate_descent_cv(x, y, p);
  EXPECT_EQ(fit.cv_grid.size(), 50u);
  EXPECT_NEAR(fit.cv_grid.back() / fit.cv_grid.front(), 1e-3, 1e-12);
  EXPECT_EQ(fit.coef(1), 0.0);
  // soft-threshold optimality: |x_jᵀ r|/N <= λ for the zero coefficient,
  // x_jᵀ r/N = λ·sign(w_j) for the active one
  const Vector r = y - fit.predict(x);
  const Matrix xc = x.rowwise() - x.colwise().mean();
  EXPECT_LE(std::abs(xc.col(1).dot(r)) / n, fit.l1 + 1e-9);
  EXPECT_NEAR(xc.col(0).dot(r) / n, fit.l1, 1e-6);
  EXPECT_GT(fit.coef(0), 1.9);
}

TEST(Linear, ElasticNetShrinksTowardRidge) {
  SeededRandomSource rng(8);
  const Matrix x = random_matrix(80, 3, rng);
  const Vector y = x * Vector::Ones(3);
  LinearParams p;
  p.l1 = 0.0;
  p.l2 = 0.5;
  p.tolerance = 1e-12;
  const auto cd = fit_coordinate_descent(x, y, p);
  EXPECT_TRUE(cd.converged);
  EXPECT_LE((cd.coef - fit_ridge(x, y, 0.5).coef).cwiseAbs().maxCoeff(), 1e-9);
}

// ----------------------------------------------------------------- trees

TEST(Tree, ConstantTargetIsSingleLeaf) {
  SeededRandomSource rng(10);
  const Matrix x = random_matrix(20, 3, rng);
  const auto tree = fit_decision_tree(x, Vector::Constant(20, 0.3));
  EXPECT_EQ(tree.node_count(), 1u);
  const Vector p = tree.predict(x);
  EXPECT_EQ(p, Vector::Constant(20, p(0)));
  EXPECT_NEAR(p(0), 0.3, 1e-15);
}

TEST(Tree, StepFunctionSplitsAtMidpoint) {
  Matrix x(10, 2);
  Vector y(10);
  for (int i = 0; i < 10; ++i) {
    x(i, 0) = i;
    x(i, 1) = (i * 7) % 10;
    y(i) = i < 6 ? 0.0 : 1.0;
  }
  TreeParams p;
  p.max_depth = 1;
  const auto tree = fit_decision_tree(x, y, p);
  EXPECT_EQ(tree.feature[0], 0);
  EXPECT_DOUBLE_EQ(tree.threshold[0], 5.5);
  EXPECT_EQ(evaluate(y, tree.predict(x)).mse, 0.0);
}

TEST(Tree, MatchesExhaustiveOracle) {
  SeededRandomSource rng(11);
  for (int t = 0; t < 40; ++t) {
    const int rows = 4 + static_cast<int>(rng.index(13));  // 4..16
    const int depth = 1 + static_cast<int>(rng.index(3));
    const Matrix x = random_matrix(rows, 3, rng);
    Vector y(rows);
    for (int i = 0; i < rows; ++i) y(i) = rng.uniform();
    std::vector<int> all(static_cast<std::size_t>(rows));
    std::iota(all.begin(), all.end(), 0);
    std::vector<OracleNode> oracle;
    oracle_tree(x, y, all, 0, depth, oracle);
    TreeParams p;
    p.max_depth = depth;
    const auto tree = fit_decision_tree(x, y, p);
    ASSERT_EQ(tree.node_count(), oracle.size());
    for (std::size_t k = 0; k < oracle.size(); ++k) {
      EXPECT_EQ(tree.feature[k], oracle[k].feature);
      if (oracle[k].feature >= 0) {
        EXPECT_EQ(tree.threshold[k], oracle[k].threshold);
      }
    }
  }
}

TEST(Tree, TieBreakPrefersLowestFeatureThenThreshold) {
  Matrix x(4, 2);
  x << 0, 0, 1, 1, 2, 2, 3, 3;  // identical columns
  const Vector y = (Vector(4) << 0, 1, 0, 1).finished();
  TreeParams p;
  p.max_depth = 1;
  const auto tree = fit_decision_tree(x, y, p);
  EXPECT_EQ(tree.feature[0], 0);
  // both x<=0.5 and x<=2.5 isolate one row with SSE 0.667; the lower wins
  EXPECT_EQ(tree.threshold[0], 0.5);
}

TEST(Tree, MinSamplesLeafRespected) {
  SeededRandomSource rng(12);
  const Matrix x = random_matrix(40, 2, rng);
  Vector y(40);
  for (int i = 0; i < 40; ++i) y(i) = rng.uniform();
  TreeParams p;
  p.min_samples_leaf = 5;
  const auto tree = fit_decision_tree(x, y, p);
  std::vector<int> count(tree.node_count(), 0);
  for (int i = 0; i < 40; ++i) {
    int node = 0;
    while (tree.feature[static_cast<std::size_t>(node)] >= 0) {
      const auto k = static_cast<std::size_t>(node);
      node = x(i, tree.feature[k]) <= tree.threshold[k] ? tree.left[k] : tree.right[k];
    }
    count[static_cast<std::size_t>(node)]++;
  }
  for (std::size_t k = 0; k < tree.node_count(); ++k)
    if (tree.feature[k] < 0) {
      EXPECT_GE(count[k], 5);
    }
}

TEST(Forest, DegeneratesToSingleTree) {
  SeededRandomSource rng(13);
  const Matrix x = random_matrix(60, 4, rng);
  Vector y(60);
  for (int i = 0; i < 60; ++i) y(i) = std::sin(x(i, 0)) + 0.2 * x(i, 2);
  ForestParams p;
  p.n_trees = 1;
  p.bootstrap = false;
  p.features_per_split = 4;
  const auto forest = fit_random_forest(x, y, p);
  EXPECT_EQ(forest.predict(x), fit_decision_tree(x, y).predict(x));
}

TEST(Forest, DeterministicAcrossRunsAndWorkers) {
  SeededRandomSource rng(14);
  const Matrix x = random_matrix(80, 6, rng);
  Vector y(80);
  for (int i = 0; i < 80; ++i) y(i) = x(i, 1) * x(i, 2) + rng.uniform();
  ForestParams p;
  p.n_trees = 20;
  p.seed = 5;
  const auto a = fit_random_forest(x, y, p, 1).predict(x);
  EXPECT_EQ(a, fit_random_forest(x, y, p, 1).predict(x));
  EXPECT_EQ(a, fit_random_forest(x, y, p, 4).predict(x));
  EXPECT_EQ(default_features_per_split(97), 33);
  EXPECT_EQ(default_features_per_split(289), 97);
}

TEST(Boosting, ZeroStagesPredictMean) {
  SeededRandomSource rng(15);
  const Matrix x = random_matrix(30, 2, rng);
  Vector y(30);
  for (int i = 0; i < 30; ++i) y(i) = rng.uniform();
  BoostingParams p;
  p.n_stages = 0;
  const auto gb = fit_gradient_boosting(x, y, p);
  EXPECT_EQ(gb.predict(x), Vector::Constant(30, y.mean()));
}

TEST(Boosting, TrainingMseNonIncreasing) {
  SeededRandomSource rng(16);
  const Matrix x = random_matrix(100, 3, rng);
  Vector y(100);
  for (int i = 0; i < 100; ++i) y(i) = std::tanh(x(i, 0)) + 0.1 * rng.normal();
  const auto gb = fit_gradient_boosting(x, y, {});
  ASSERT_EQ(gb.train_mse.size(), 101u);
  for (std::size_t s = 1; s < gb.train_mse.size(); ++s) EXPECT_LE(gb.train_mse[s], gb.train_mse[s - 1] + 1e-12);
  EXPECT_NEAR(evaluate(y, gb.predict(x)).mse, gb.train_mse.back(), 1e-12);
}

// ------------------------------------------------------------------- MLP

TEST(Mlp, FitsLinearTarget) {
  // batch statistics add O(1/sqrt(batch)) noise to a regression fit, so the
  // capacity check runs the plain network
  SeededRandomSource rng(17);
  const Matrix x = random_matrix(256, 3, rng);
  const Vector y = 2.0 * x.col(0);
  MlpParams p;
  p.hidden = {32, 16};
  p.dropout = 0.0;
  p.batchnorm = false;
  p.epochs = 200;
  p.batch_size = 32;
  p.learning_rate = 3e-3;
  p.seed = 1;
  const auto fit = fit_mlp(x, y, p);
  EXPECT_LT(evaluate(y, fit.net.predict(x)).mse, 1e-3);
  EXPECT_EQ(fit.history.size(), 200u);
  EXPECT_GE(fit.best_epoch, 1);
}

TEST(Mlp, BatchnormNetworkLearnsLinearTarget) {
  SeededRandomSource rng(117);
  const Matrix x = random_matrix(512, 3, rng);
  const Vector y = 2.0 * x.col(0);
  MlpParams p;
  p.hidden = {32, 16};
  p.epochs = 100;
  p.seed = 1;
  const auto fit = fit_mlp(x, y, p);
  EXPECT_GT(evaluate(y, fit.net.predict(x)).r2, 0.99);
}

TEST(Mlp, GradientMatchesFiniteDifferences) {
  SeededRandomSource rng(18);
  const Matrix x = random_matrix(12, 5, rng);
  Vector y(12);
  for (int i = 0; i < 12; ++i) y(i) = rng.uniform();
  MlpParams p;
  p.hidden = {8, 6};
  p.dropout = 0.0;
  SeededRandomSource init(3);
  Mlp net(5, p, init);
  // warm the running statistics so inference-mode BN is not the identity
  std::vector<Matrix> scratch;
  SeededRandomSource unused(4);
  for (int i = 0; i < 5; ++i) net.train_step(x.transpose(), y, unused, scratch);
  // random γ/β so their gradients are exercised
  for (int l = 0; l < 2; ++l)
    for (int k : {2, 3})
      for (Eigen::Index i = 0; i < net.params()[static_cast<std::size_t>(4 * l + k)].rows(); ++i)
        net.params()[static_cast<std::size_t>(4 * l + k)](i, 0) += 0.3 * rng.normal();

  const Matrix xt = x.transpose();
  for (bool train_bn : {false, true}) {
    std::vector<Matrix> grads;
    net.loss_and_gradient(xt, y, train_bn, nullptr, grads);
    SeededRandomSource pick(19);
    int checked = 0;
    while (checked < 10) {
      const std::size_t k = static_cast<std::size_t>(pick.index(net.params().size()));
      if (train_bn && k % 4 == 1 && k < 8) continue;  // bias before BN has zero gradient in batch mode
      Matrix& w = net.params()[k];
      const auto i = static_cast<Eigen::Index>(pick.index(static_cast<std::uint64_t>(w.rows())));
      const auto j = static_cast<Eigen::Index>(pick.index(static_cast<std::uint64_t>(w.cols())));
      const double h = 1e-6, saved = w(i, j);
      std::vector<Matrix> tmp;
      w(i, j) = saved + h;
      const double up = net.loss_and_gradient(xt, y, train_bn, nullptr, tmp);
      w(i, j) = saved - h;
      const double down = net.loss_and_gradient(xt, y, train_bn, nullptr, tmp);
      w(i, j) = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic = grads[k](i, j);
      const double rel = std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-8});
      EXPECT_LT(rel, 1e-4) << "param " << k << " (" << i << "," << j << ") train_bn=" << train_bn;
      ++checked;
    }
  }
}

TEST(Mlp, WithoutBatchnormAndDropoutRunsAreIdentical) {
  SeededRandomSource rng(20);
  const Matrix x = random_matrix(100, 4, rng);
  const Vector y = x.col(1).array().square();
  MlpParams p;
  p.hidden = {16};
  p.dropout = 0.0;
  p.batchnorm = false;
  p.epochs = 15;
  p.batch_size = 16;
  p.seed = 2;
  const auto a = fit_mlp(x, y, p), b = fit_mlp(x, y, p);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t e = 0; e < a.history.size(); ++e) {
    EXPECT_EQ(a.history[e].train_loss, b.history[e].train_loss);
    EXPECT_EQ(a.history[e].val_mse, b.history[e].val_mse);
  }
}

TEST(Mlp, PlateauHalvesLearningRate) {
  SeededRandomSource rng(21);
  const Matrix x = random_matrix(64, 2, rng);
  Vector y(64);
  for (int i = 0; i < 64; ++i) y(i) = rng.uniform();
  MlpParams p;
  p.hidden = {4};
  p.epochs = 12;
  p.patience = 3;
  p.batch_size = 16;
  p.min_delta = 1e9;  // only the first epoch counts as an improvement
  const Matrix xv = random_matrix(20, 2, rng);
  const Vector yv = Vector::Constant(20, 0.5);
  const auto fit = fit_mlp(x, y, p, &xv, &yv);
  ASSERT_EQ(fit.history.size(), 12u);
  // epoch 1 improves; every 3 stale epochs afterwards halve the rate
  const double lr0 = p.learning_rate;
  const double expected[12] = {lr0,       lr0,       lr0,       lr0,       lr0 / 2,   lr0 / 2,
                               lr0 / 2,   lr0 / 4,   lr0 / 4,   lr0 / 4,   lr0 / 8,   lr0 / 8};
  for (int e = 0; e < 12; ++e) EXPECT_EQ(fit.history[static_cast<std::size_t>(e)].learning_rate, expected[e]) << e;
  EXPECT_EQ(fit.best_epoch, 1);
  EXPECT_EQ(fit.best_val_mse, fit.history[0].val_mse);
  // the returned weights are the epoch-1 weights
  EXPECT_EQ((fit.net.predict(xv) - yv).squaredNorm() / 20.0, fit.history[0].val_mse);
}

TEST(Mlp, DivergenceReportsEpoch) {
  SeededRandomSource rng(22);
  const Matrix x = random_matrix(64, 2, rng) * 1e150;
  const Vector y = Vector::Ones(64) * 1e150;
  MlpParams p;
  p.hidden = {4};
  p.batch_size = 16;
  p.learning_rate = 1e300;
  try {
    fit_mlp(x, y, p);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_GE(e.epoch(), 1);
  }
  EXPECT_THROW(fit_mlp(random_matrix(10, 2, rng), Vector::Zero(10), MlpParams{}), ParameterError);
}

// ----------------------------------------------------- model container

TEST(Model, PredictContracts) {
  SeededRandomSource rng(23);
  const Matrix x = pad41(random_matrix(30, 3, rng));
  const auto layout = layout_for(1);
  const auto tree = fit_model(ModelKind::decision_tree, x, Vector::Constant(30, 0.4), layout);
  const Vector constant = predict(tree, x, layout_hash(layout));
  EXPECT_EQ(constant, Vector::Constant(30, constant(0)));
  EXPECT_THROW(predict(tree, x.leftCols(40), layout_hash(layout)), CompatibilityError);
  EXPECT_THROW(predict(tree, x, layout_hash(layout_for(2))), CompatibilityError);
  EXPECT_THROW(fit_model(ModelKind::ridge, x, Vector::Zero(30), layout, {{"bogus", 1}}), ParameterError);
  EXPECT_THROW(model_kind_from_string("random_forrest"), ParameterError);

  Vector y(30);
  for (int i = 0; i < 30; ++i) y(i) = 2.0 * x(i, 0);
  const auto clipped = fit_model(ModelKind::linear, x, y, layout, {{"clip", true}});
  const Vector p = predict(clipped, x, layout_hash(layout));
  EXPECT_GE(p.minCoeff(), 0.0);
  EXPECT_LE(p.maxCoeff(), 1.0);
  for (auto kind : all_model_kinds()) {
    nlohmann::json h = kind == ModelKind::mlp ? nlohmann::json{{"hidden", {8}}, {"epochs", 3}, {"batch_size", 8}}
                                              : nlohmann::json(nullptr);
    if (kind == ModelKind::random_forest) h = {{"n_trees", 5}};
    const auto m = fit_model(kind, x, y, layout, h);
    EXPECT_TRUE(predict(m, x, layout_hash(layout)).allFinite()) << to_string(kind);
    EXPECT_EQ(m.scaler.has_value(), is_linear_family(kind) || kind == ModelKind::mlp);
  }
}

TEST(Model, TreeFamiliesIgnoreStandardization) {
  SeededRandomSource rng(24);
  Matrix raw = random_matrix(60, 3, rng);
  raw.col(1) *= 1000.0;
  raw.col(2).array() += 50.0;
  const Matrix x = pad41(raw);
  Vector y(60);
  for (int i = 0; i < 60; ++i) y(i) = std::abs(raw(i, 0)) + 0.001 * raw(i, 1);
  const auto layout = layout_for(1);
  for (auto kind : {ModelKind::decision_tree, ModelKind::random_forest, ModelKind::gradient_boosting}) {
    nlohmann::json h = kind == ModelKind::random_forest ? nlohmann::json{{"n_trees", 10}} : nlohmann::json::object();
    const auto plain = fit_model(kind, x, y, layout, h);
    h["standardize"] = true;
    const auto scaled = fit_model(kind, x, y, layout, h);
    const Vector a = predict(plain, x, layout_hash(layout)), b = predict(scaled, x, layout_hash(layout));
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-12) << to_string(kind);
  }
}

TEST(Model, SaveLoadRoundTrips) {
  TempDir dir;
  SeededRandomSource rng(25);
  const Matrix x = pad41(random_matrix(100, 4, rng));
  Vector y(100);
  for (int i = 0; i < 100; ++i) y(i) = std::abs(std::sin(x(i, 0) + x(i, 3)));
  const auto layout = layout_for(1);
  for (auto kind : all_model_kinds()) {
    nlohmann::json h = nullptr;
    if (kind == ModelKind::random_forest) h = {{"n_trees", 10}};
    if (kind == ModelKind::mlp) h = {{"hidden", {16, 8}}, {"epochs", 5}, {"batch_size", 16}};
    const auto m = fit_model(kind, x, y, layout, h);
    const std::string path = dir.file(std::string(to_string(kind)) + ".json");
    save_model(m, path);
    const auto back = load_model(path);
    const Vector a = predict(m, x, layout_hash(layout)), b = predict(back, x, layout_hash(layout));
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-12) << to_string(kind);
    if (kind != ModelKind::mlp) {
      EXPECT_EQ(a, b) << to_string(kind);
    }
    EXPECT_EQ(back.hyperparams, m.hyperparams);
  }
}

TEST(Model, CorruptedAndIncompatibleFiles) {
  TempDir dir;
  write_text_file(dir.file("bad.json"), "{\"format\": \"wdist-model\", \"version\": 1, \"kind\": ");
  EXPECT_THROW(load_model(dir.file("bad.json")), ParseError);
  SeededRandomSource rng(26);
  const auto m = fit_model(ModelKind::decision_tree, pad41(random_matrix(10, 2, rng)), Vector::LinSpaced(10, 0, 1),
                           layout_for(1));
  auto j = to_json(m);
  j["version"] = 99;
  write_json_file(dir.file("v.json"), j);
  EXPECT_THROW(load_model(dir.file("v.json")), CompatibilityError);
  j = to_json(m);
  j["layout_hash"] = "0000000000000000";
  write_json_file(dir.file("h.json"), j);
  EXPECT_THROW(load_model(dir.file("h.json")), CompatibilityError);
  j = to_json(m);
  j["fitted"]["left"][0] = 0;
  write_json_file(dir.file("c.json"), j);
  EXPECT_THROW(load_model(dir.file("c.json")), ParseError);
}

// -------------------------------------------------------------- ranking

TEST(Ranking, LabelCopiesRankFirst) {
  SeededRandomSource rng(27);
  LabeledDataset ds;
  ds.layout = layout_for(1);
  for (int i = 0; i < 50; ++i) {
    DatasetRow r;
    r.features.assign(41, 0.0);
    r.label = rng.uniform();
    for (auto& f : r.features) f = rng.normal();
    r.features[5] = r.label;
    r.features[9] = -r.label;
    r.features[20] = 1.0;  // constant
    ds.rows.push_back(r);
  }
  const auto top = pearson_feature_ranking(ds, 3);
  ASSERT_EQ(top.size(), 3u);
  EXPECT_EQ(top[0].index, 5u);
  EXPECT_NEAR(top[0].correlation, 1.0, 1e-12);
  EXPECT_EQ(top[1].index, 9u);
  EXPECT_NEAR(top[1].correlation, -1.0, 1e-12);
  EXPECT_EQ(top[0].name, feature_names(ds.layout)[5]);
  const auto all = pearson_feature_ranking(ds, 100);
  EXPECT_EQ(all.size(), 41u);
  for (std::size_t i = 1; i < all.size(); ++i)
    EXPECT_GE(std::abs(all[i - 1].correlation), std::abs(all[i].correlation));
  for (const auto& f : all)
    if (f.index == 20) {
      EXPECT_EQ(f.correlation, 0.0);
    }
  EXPECT_THROW(pearson_feature_ranking(ds, 0), ParameterError);
}
