#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "wdist/core/random.hpp"
#include "wdist/ml/matrix.hpp"

namespace wdist::ml {

/// Objective shared by the whole family:
///   (1/2N)‖y − b − Xw‖² + λ₁‖w‖₁ + (λ₂/2)‖w‖², intercept b unpenalized.
struct LinearParams {
  double l1 = 0.0;
  double l2 = 0.0;
  bool cv = false;  ///< choose λ₁ by k-fold cross-validation
  int cv_folds = 5;
  int cv_grid = 50;
  double cv_min_ratio = 1e-3;  ///< grid spans [ratio·λ_max, λ_max]
  double tolerance = 1e-7;
  int max_sweeps = 10000;
  std::uint64_t seed = 0;
};

struct LinearFit {
  Vector coef;
  double intercept = 0.0;
  double l1 = 0.0;  ///< λ₁ actually used (the CV choice when cv = true)
  double l2 = 0.0;
  int sweeps = 0;
  bool converged = true;
  std::vector<double> cv_grid;  ///< descending λ₁ grid, empty without CV
  std::vector<double> cv_mse;   ///< mean held-out MSE per grid point

  double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const { return intercept + x.dot(coef); }

  Vector predict(const Matrix& x) const { return (x * coef).array() + intercept; }
};

namespace detail {

struct Centered {
  Matrix x;
  Vector y;
  Vector x_mean;
  double y_mean = 0.0;
};

inline Centered center(const Matrix& x, const Vector& y) {
  Centered c;
  c.x_mean = x.colwise().mean().transpose();
  c.y_mean = y.mean();
  c.x = x.rowwise() - c.x_mean.transpose();
  c.y = y.array() - c.y_mean;
  return c;
}

inline double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

/// Cyclic coordinate descent on centered data, warm-started from `w`.
inline void coordinate_descent(const Matrix& xc, const Vector& yc, double l1, double l2, double tol, int max_sweeps,
                               Vector& w, int& sweeps, bool& converged) {
  const double n = static_cast<double>(xc.rows());
  const Vector z = xc.colwise().squaredNorm().transpose() / n;
  Vector r = yc - xc * w;
  converged = false;
  for (sweeps = 0; sweeps < max_sweeps;) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < xc.cols(); ++j) {
      const double denom = z(j) + l2;
      const double old = w(j);
      double updated = 0.0;
      if (denom > 0.0) updated = soft_threshold(xc.col(j).dot(r) / n + z(j) * old, l1) / denom;
      if (updated != old) {
        r.noalias() -= (updated - old) * xc.col(j);
        w(j) = updated;
        max_change = std::max(max_change, std::abs(updated - old));
      }
    }
    ++sweeps;
    if (max_change < tol) {
      converged = true;
      break;
    }
  }
}

}  // namespace detail

/// Minimum-norm least squares on centered data (rank-revealing, so the
/// collinear columns of the feature layout are handled).
inline LinearFit fit_least_squares(const Matrix& x, const Vector& y) {
  require_rows(x, y, 2, "linear");
  const auto c = detail::center(x, y);
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(c.x);
  if (cod.rank() == 0) throw SingularityError("linear: design matrix has rank 0 after centering");
  LinearFit fit;
  fit.coef = cod.solve(c.y);
  fit.intercept = c.y_mean - c.x_mean.dot(fit.coef);
  return fit;
}

/// Ridge normal equations (XᵀX/N + λ₂I) w = Xᵀy/N on centered data.
inline LinearFit fit_ridge(const Matrix& x, const Vector& y, double l2) {
  require_rows(x, y, 2, "ridge");
  if (!(l2 >= 0.0)) throw ParameterError("ridge: l2 must be >= 0");
  if (l2 == 0.0) return fit_least_squares(x, y);
  const auto c = detail::center(x, y);
  const double n = static_cast<double>(x.rows());
  Matrix gram = c.x.transpose() * c.x / n;
  gram.diagonal().array() += l2;
  Eigen::LDLT<Matrix> ldlt(gram);
  if (ldlt.info() != Eigen::Success) throw SingularityError("ridge: normal equations could not be factored");
  LinearFit fit;
  fit.l2 = l2;
  fit.coef = ldlt.solve(c.x.transpose() * c.y / n);
  fit.intercept = c.y_mean - c.x_mean.dot(fit.coef);
  return fit;
}

/// Smallest λ₁ that zeroes every coefficient: max_j |x_jᵀ y|/N on centered data.
inline double lambda_max(const Matrix& x, const Vector& y) {
  const auto c = detail::center(x, y);
  return (c.x.transpose() * c.y).cwiseAbs().maxCoeff() / static_cast<double>(x.rows());
}

inline std::vector<double> lambda_grid(double lmax, int points, double min_ratio) {
  std::vector<double> grid;
  if (points == 1) return {lmax};
  for (int i = 0; i < points; ++i)
    grid.push_back(lmax * std::pow(min_ratio, static_cast<double>(i) / static_cast<double>(points - 1)));
  return grid;
}

inline LinearFit fit_coordinate_descent(const Matrix& x, const Vector& y, const LinearParams& p) {
  require_rows(x, y, 2, "coordinate descent");
  if (!(p.l1 >= 0.0) || !(p.l2 >= 0.0)) throw ParameterError("coordinate descent: penalties must be >= 0");
  const auto c = detail::center(x, y);
  LinearFit fit;
  fit.coef = Vector::Zero(x.cols());
  fit.l1 = p.l1;
  fit.l2 = p.l2;
  detail::coordinate_descent(c.x, c.y, p.l1, p.l2, p.tolerance, p.max_sweeps, fit.coef, fit.sweeps, fit.converged);
  fit.intercept = c.y_mean - c.x_mean.dot(fit.coef);
  return fit;
}

/// λ₁ chosen by k-fold CV over a log grid, then refit on all rows. Fold
/// membership comes from a seeded permutation; each fold walks the grid from
/// λ_max downward with warm starts. Ties go to the larger λ₁.
inline LinearFit fit_coordinate_descent_cv(const Matrix& x, const Vector& y, const LinearParams& p) {
  require_rows(x, y, 2, "cross-validation");
  if (p.cv_folds < 2 || p.cv_folds > x.rows()) throw ParameterError("cross-validation: invalid fold count");
  if (p.cv_grid < 1 || !(p.cv_min_ratio > 0.0 && p.cv_min_ratio <= 1.0))
    throw ParameterError("cross-validation: invalid grid");
  const double lmax = lambda_max(x, y);
  if (!(lmax > 0.0)) {
    LinearParams q = p;
    q.l1 = 0.0;
    auto fit = fit_coordinate_descent(x, y, q);
    return fit;
  }
  const auto grid = lambda_grid(lmax, p.cv_grid, p.cv_min_ratio);

  std::vector<std::size_t> perm(static_cast<std::size_t>(x.rows()));
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  SeededRandomSource rng(derive_seed(p.seed, 0x4356ULL));
  rng.shuffle(perm);

  std::vector<double> mse(grid.size(), 0.0);
  for (int k = 0; k < p.cv_folds; ++k) {
    std::vector<Eigen::Index> train, held;
    for (std::size_t pos = 0; pos < perm.size(); ++pos)
      (static_cast<int>(pos % static_cast<std::size_t>(p.cv_folds)) == k ? held : train)
          .push_back(static_cast<Eigen::Index>(perm[pos]));
    const Matrix xt = x(train, Eigen::all), xh = x(held, Eigen::all);
    const Vector yt = y(train), yh = y(held);
    const auto c = detail::center(xt, yt);
    Vector w = Vector::Zero(x.cols());
    for (std::size_t g = 0; g < grid.size(); ++g) {
      int sweeps = 0;
      bool converged = false;
      detail::coordinate_descent(c.x, c.y, grid[g], p.l2, p.tolerance, p.max_sweeps, w, sweeps, converged);
      const double b = c.y_mean - c.x_mean.dot(w);
      mse[g] += ((xh * w).array() + b - yh.array()).square().mean() / p.cv_folds;
    }
  }
  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g)
    if (mse[g] < mse[best]) best = g;

  LinearParams q = p;
  q.l1 = grid[best];
  auto fit = fit_coordinate_descent(x, y, q);
  fit.cv_grid = grid;
  fit.cv_mse = mse;
  return fit;
}

}  // namespace wdist::ml
