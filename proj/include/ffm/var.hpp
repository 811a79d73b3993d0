#ifndef FFM_VAR_HPP
#define FFM_VAR_HPP

/** @file
 * Conditional least-squares VAR(m) estimation on factor scores, the
 * diagonal (per-factor AR) restriction, and iterated multi-step forecasts.
 *
 * With \f$x_{t-1} = (F_{t-1}', \ldots, F_{t-m}')'\f$ the full estimator is
 * \f$\hat A = \sum_t F_t x_{t-1}' (\sum_t x_{t-1} x_{t-1}')^{-1}\f$ over
 * t = m+1..T.
 */

#include "ffm/core.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstddef>
#include <vector>

namespace ffm {

inline constexpr double kMaxConditionNumber = 1e12;

struct VarOptions {
  bool restricted = false;  ///< diagonal lag matrices (one AR(m) per factor)
  bool intercept = false;
};

class VarFit {
 public:
  VarFit(std::vector<Matrix> lags, Vector intercept, Matrix residuals, bool restricted,
         bool with_intercept = false)
      : lags_(std::move(lags)),
        intercept_(std::move(intercept)),
        residuals_(std::move(residuals)),
        restricted_(restricted),
        with_intercept_(with_intercept) {
    if (lags_.empty()) {
      throw ConfigError("VAR fit needs at least one lag matrix");
    }
    const auto j = lags_.front().rows();
    for (const auto& a : lags_) {
      if (a.rows() != j || a.cols() != j) {
        throw DataError("VAR lag matrices must all be J x J");
      }
    }
    if (intercept_.size() == 0) {
      intercept_ = Vector::Zero(j);
    }
    if (intercept_.size() != j || residuals_.cols() != j) {
      throw DataError("VAR intercept/residual dimensions do not match the lag matrices");
    }
    const auto n = residuals_.rows();
    sigma_ = n > 0 ? Matrix((residuals_.transpose() * residuals_) / static_cast<double>(n))
                   : Matrix::Zero(j, j);
    sigma_ = 0.5 * (sigma_ + sigma_.transpose()).eval();
  }

  /// Number of factors J.
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(lags_.front().rows()); }
  /// Lag order m.
  std::size_t order() const noexcept { return lags_.size(); }
  bool restricted() const noexcept { return restricted_; }
  bool has_intercept() const noexcept { return with_intercept_; }

  /// A_1..A_m.
  const std::vector<Matrix>& lags() const noexcept { return lags_; }
  const Vector& intercept() const noexcept { return intercept_; }
  /// (T - m) x J residuals eta_t for t = m+1..T.
  const Matrix& residuals() const noexcept { return residuals_; }
  /// (T - m)^{-1} sum eta_t eta_t'.
  const Matrix& sigma_eta() const noexcept { return sigma_; }

  /// [A_1, ..., A_m] as one J x Jm matrix.
  Matrix stacked() const {
    const auto j = static_cast<Eigen::Index>(dimension());
    Matrix out(j, j * static_cast<Eigen::Index>(order()));
    for (std::size_t i = 0; i < order(); ++i) {
      out.middleCols(static_cast<Eigen::Index>(i) * j, j) = lags_[i];
    }
    return out;
  }

 private:
  std::vector<Matrix> lags_;
  Vector intercept_;
  Matrix residuals_;
  Matrix sigma_;
  bool restricted_;
  bool with_intercept_;
};

namespace detail {

// Rows t = m..T-1 of [F_{t-1}', ..., F_{t-m}'] (0-based t).
inline Matrix lagged_design(const Eigen::Ref<const Matrix>& scores, std::size_t m) {
  const auto t_len = scores.rows();
  const auto j = scores.cols();
  const auto lag = static_cast<Eigen::Index>(m);
  Matrix x(t_len - lag, j * lag);
  for (Eigen::Index i = 0; i < lag; ++i) {
    x.middleCols(i * j, j) = scores.middleRows(lag - 1 - i, t_len - lag);
  }
  return x;
}

// Least squares through the normal equations with a Cholesky factorization
// and a reciprocal-condition guard.
inline Matrix solve_normal_equations(const Matrix& x, const Matrix& y, const char* what) {
  const Matrix gram = x.transpose() * x;
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw NumericError(concat("singular design in ", what, " (Gram matrix not positive definite)"));
  }
  const double rcond = llt.rcond();
  if (!(rcond * kMaxConditionNumber >= 1.0)) {
    throw NumericError(concat("ill-conditioned design in ", what, ": condition estimate ",
                              rcond > 0 ? 1.0 / rcond : std::numeric_limits<double>::infinity(),
                              " exceeds ", kMaxConditionNumber));
  }
  return llt.solve(x.transpose() * y);
}

}  // namespace detail

/// OLS fit of a VAR(m) (or J independent AR(m) fits when restricted) to the
/// rows of `scores`.
inline VarFit fit_var(const Eigen::Ref<const Matrix>& scores, std::size_t m,
                      VarOptions options = {}) {
  if (m < 1) {
    throw ConfigError("VAR lag order must be >= 1");
  }
  const auto t_len = static_cast<std::size_t>(scores.rows());
  const auto j = static_cast<std::size_t>(scores.cols());
  if (j < 1) {
    throw ConfigError("VAR needs at least one series");
  }
  const std::size_t per_equation = (options.restricted ? m : j * m) + (options.intercept ? 1 : 0);
  if (t_len <= m || t_len - m <= per_equation) {
    throw DataError(detail::concat("insufficient sample for VAR: T = ", t_len, ", m = ", m,
                                   ", regressors per equation = ", per_equation));
  }
  if (!scores.allFinite()) {
    throw DataError("VAR input contains non-finite values");
  }

  const auto lag = static_cast<Eigen::Index>(m);
  const auto jj = static_cast<Eigen::Index>(j);
  const auto n = static_cast<Eigen::Index>(t_len - m);
  const Matrix y = scores.bottomRows(n);

  std::vector<Matrix> lags(m, Matrix::Zero(jj, jj));
  Vector intercept = Vector::Zero(jj);
  Matrix residuals(n, jj);

  if (!options.restricted) {
    Matrix x = detail::lagged_design(scores, m);
    if (options.intercept) {
      x.conservativeResize(Eigen::NoChange, x.cols() + 1);
      x.col(x.cols() - 1).setOnes();
    }
    const Matrix coef = detail::solve_normal_equations(x, y, "VAR fit");
    for (Eigen::Index i = 0; i < lag; ++i) {
      lags[static_cast<std::size_t>(i)] = coef.middleRows(i * jj, jj).transpose();
    }
    if (options.intercept) {
      intercept = coef.row(coef.rows() - 1).transpose();
    }
    residuals = y - x * coef;
  } else {
    for (Eigen::Index l = 0; l < jj; ++l) {
      Matrix x = detail::lagged_design(scores.col(l), m);
      if (options.intercept) {
        x.conservativeResize(Eigen::NoChange, x.cols() + 1);
        x.col(x.cols() - 1).setOnes();
      }
      const Matrix yl = y.col(l);
      const Matrix coef = detail::solve_normal_equations(x, yl, "AR fit");
      for (Eigen::Index i = 0; i < lag; ++i) {
        lags[static_cast<std::size_t>(i)](l, l) = coef(i, 0);
      }
      if (options.intercept) {
        intercept(l) = coef(coef.rows() - 1, 0);
      }
      residuals.col(l) = yl - x * coef;
    }
  }
  return VarFit(std::move(lags), std::move(intercept), std::move(residuals), options.restricted,
                options.intercept);
}

/// One-step prediction c + sum_i A_i F_{t-i}, where history row k holds the
/// observation at lag (rows - k); i.e. the last row is the most recent.
inline Vector predict_next(const VarFit& fit, const Eigen::Ref<const Matrix>& history) {
  const auto m = fit.order();
  if (static_cast<std::size_t>(history.rows()) < m) {
    throw DataError(detail::concat("forecast history has ", history.rows(),
                                   " rows but the VAR order is ", m));
  }
  if (static_cast<std::size_t>(history.cols()) != fit.dimension()) {
    throw DataError("forecast history width does not match the VAR dimension");
  }
  Vector next = fit.intercept();
  const auto last = history.rows() - 1;
  for (std::size_t i = 0; i < m; ++i) {
    next.noalias() += fit.lags()[i] * history.row(last - static_cast<Eigen::Index>(i)).transpose();
  }
  return next;
}

/// h-step iterated forecasts; row k is the (k+1)-step-ahead score vector.
inline Matrix forecast_scores(const VarFit& fit, const Eigen::Ref<const Matrix>& history,
                              std::size_t h) {
  if (h < 1) {
    throw ConfigError("forecast horizon must be >= 1");
  }
  const auto m = static_cast<Eigen::Index>(fit.order());
  if (history.rows() < m) {
    throw DataError(detail::concat("forecast history has ", history.rows(),
                                   " rows but the VAR order is ", m));
  }
  const auto j = static_cast<Eigen::Index>(fit.dimension());
  const auto hh = static_cast<Eigen::Index>(h);
  Matrix path(m + hh, j);
  path.topRows(m) = history.bottomRows(m);
  for (Eigen::Index k = 0; k < hh; ++k) {
    path.row(m + k) = predict_next(fit, path.middleRows(k, m)).transpose();
  }
  return path.bottomRows(hh);
}

/// Jm x Jm companion matrix of the lag polynomial.
inline Matrix companion_matrix(const std::vector<Matrix>& lags) {
  const auto j = lags.front().rows();
  const auto m = static_cast<Eigen::Index>(lags.size());
  Matrix c = Matrix::Zero(j * m, j * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    c.block(0, i * j, j, j) = lags[static_cast<std::size_t>(i)];
  }
  if (m > 1) {
    c.block(j, 0, j * (m - 1), j * (m - 1)).setIdentity();
  }
  return c;
}

inline double spectral_radius(const Matrix& square) {
  Eigen::EigenSolver<Matrix> solver(square, false);
  if (solver.info() != Eigen::Success) {
    throw NumericError("companion eigenvalue computation failed");
  }
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

inline double companion_spectral_radius(const std::vector<Matrix>& lags) {
  return spectral_radius(companion_matrix(lags));
}

inline double companion_spectral_radius(const VarFit& fit) {
  return companion_spectral_radius(fit.lags());
}

}  // namespace ffm

#endif  // FFM_VAR_HPP
