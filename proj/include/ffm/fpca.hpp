#ifndef FFM_FPCA_HPP
#define FFM_FPCA_HPP

/** @file
 * Functional principal component analysis on a quadrature grid.
 *
 * The covariance operator \f$(\hat C x)(r) = \int \hat c(r,s) x(s) ds\f$ is
 * discretized with the grid weights W.  Its eigenpairs are obtained from the
 * symmetric matrix \f$B = W^{1/2} \hat C W^{1/2}\f$: if \f$B v = \lambda v\f$
 * then \f$\psi = W^{-1/2} v\f$ satisfies the discretized eigen-equation and is
 * orthonormal under the quadrature inner product.
 *
 * The dual route (eigendecomposition of the T x T Gram matrix of centered
 * curves) gives the same nonzero spectrum and is cheaper when T << N; the
 * N x N route is used here because grids are small and the map back to
 * curves is direct.
 */

#include "ffm/core.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

namespace ffm {

struct CovarianceKernel {
  Grid grid;
  Matrix matrix;  ///< entry (i, j) = c(r_i, r_j)
};

/// Result of an FPCA fit.  Eigenvalues cover the full empirical rank
/// min(T - 1, N); eigenfunctions and scores are kept for the leading
/// components() of them.
class FpcaResult {
 public:
  FpcaResult(Grid grid, Vector mean, Vector eigenvalues, Matrix eigenfunctions, Matrix scores,
             double total_variance)
      : grid_(std::move(grid)),
        mean_(std::move(mean)),
        eigenvalues_(std::move(eigenvalues)),
        eigenfunctions_(std::move(eigenfunctions)),
        scores_(std::move(scores)),
        total_variance_(total_variance) {
    if (static_cast<std::size_t>(mean_.size()) != grid_.size() ||
        static_cast<std::size_t>(eigenfunctions_.rows()) != grid_.size()) {
      throw DataError("FPCA result does not match its grid");
    }
    if (scores_.cols() != eigenfunctions_.cols() || eigenfunctions_.cols() > eigenvalues_.size()) {
      throw DataError("FPCA result blocks have inconsistent component counts");
    }
  }

  const Grid& grid() const noexcept { return grid_; }
  const Vector& mean() const noexcept { return mean_; }
  /// Descending, nonnegative; length rank().
  const Vector& eigenvalues() const noexcept { return eigenvalues_; }
  /// N x components(); column l is psi_l on the grid.
  const Matrix& eigenfunctions() const noexcept { return eigenfunctions_; }
  /// T x components(); entry (t, l) = <Y_t - mu, psi_l>.
  const Matrix& scores() const noexcept { return scores_; }
  /// Integral of the covariance kernel diagonal.
  double total_variance() const noexcept { return total_variance_; }

  std::size_t rank() const noexcept { return static_cast<std::size_t>(eigenvalues_.size()); }
  std::size_t components() const noexcept {
    return static_cast<std::size_t>(eigenfunctions_.cols());
  }
  std::size_t length() const noexcept { return static_cast<std::size_t>(scores_.rows()); }

  Curve mean_curve() const { return Curve(grid_, mean_); }
  Curve eigenfunction(std::size_t l) const {
    return Curve(grid_, eigenfunctions_.col(static_cast<Eigen::Index>(l)));
  }

  /// Sum of eigenvalues with index > j (1-based), i.e. the variance left out
  /// by a j-component truncation.
  double trailing_variance(std::size_t j) const {
    if (j >= rank()) {
      return 0.0;
    }
    return eigenvalues_.tail(static_cast<Eigen::Index>(rank() - j)).sum();
  }

  /// Copy with the sign of (psi_l, scores column l) flipped wherever
  /// signs[l] < 0.
  FpcaResult with_signs(std::span<const int> signs) const {
    if (signs.size() != components()) {
      throw ConfigError("sign vector length must equal the number of components");
    }
    FpcaResult out = *this;
    for (std::size_t l = 0; l < signs.size(); ++l) {
      if (signs[l] < 0) {
        const auto c = static_cast<Eigen::Index>(l);
        out.eigenfunctions_.col(c) *= -1.0;
        out.scores_.col(c) *= -1.0;
      }
    }
    return out;
  }

 private:
  Grid grid_;
  Vector mean_;
  Vector eigenvalues_;
  Matrix eigenfunctions_;
  Matrix scores_;
  double total_variance_;
};

inline Curve sample_mean(const FunctionalSample& sample) {
  return Curve(sample.grid(), sample.values().colwise().mean().transpose());
}

/// Divisor-T sample covariance of the curves.
inline CovarianceKernel sample_covariance(const FunctionalSample& sample) {
  const Matrix& y = sample.values();
  const Matrix centered = y.rowwise() - y.colwise().mean();
  Matrix c = (centered.transpose() * centered) / static_cast<double>(y.rows());
  // Exact symmetry regardless of summation order inside the product.
  c = 0.5 * (c + c.transpose()).eval();
  return {sample.grid(), std::move(c)};
}

inline constexpr double kSignTolerance = 1e-9;
inline constexpr double kNegativeEigenTolerance = 1e-10;

namespace detail {

// Deterministic sign: positive integral, else first sizable coordinate
// positive.
inline void fix_sign(const Grid& grid, Eigen::Ref<Vector> psi) {
  const double integral = grid.weight_vector().dot(psi);
  if (std::abs(integral) > kSignTolerance) {
    if (integral < 0) {
      psi *= -1.0;
    }
    return;
  }
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    if (std::abs(psi(i)) > kSignTolerance) {
      if (psi(i) < 0) {
        psi *= -1.0;
      }
      return;
    }
  }
}

}  // namespace detail

/// Empirical FPCs of the sample, keeping min(k_max, T - 1, N) components.
inline FpcaResult fpca(const FunctionalSample& sample, std::size_t k_max) {
  if (k_max < 1) {
    throw ConfigError("fpca requires k_max >= 1");
  }
  const std::size_t t_len = sample.length();
  if (t_len < 2) {
    throw DataError("fpca requires at least 2 curves");
  }
  const Grid& grid = sample.grid();
  const std::size_t n = grid.size();
  const Vector w = grid.weight_vector();
  if ((w.array() <= 0.0).any()) {
    throw NumericError("degenerate grid: nonpositive quadrature weight");
  }
  const Vector sqrt_w = w.array().sqrt();

  const Vector mean = sample.values().colwise().mean().transpose();
  const CovarianceKernel kernel = sample_covariance(sample);
  const Matrix b = sqrt_w.asDiagonal() * kernel.matrix * sqrt_w.asDiagonal();
  const double total_variance = (w.array() * kernel.matrix.diagonal().array()).sum();

  Eigen::SelfAdjointEigenSolver<Matrix> solver(b);
  if (solver.info() != Eigen::Success) {
    throw NumericError("covariance eigendecomposition did not converge");
  }

  const std::size_t rank = std::min(t_len - 1, n);
  const std::size_t kept = std::min(k_max, rank);
  const Vector& ascending = solver.eigenvalues();
  const double scale = std::max(1.0, std::abs(ascending(ascending.size() - 1)));

  Vector eigenvalues(static_cast<Eigen::Index>(rank));
  for (std::size_t l = 0; l < rank; ++l) {
    double value = ascending(static_cast<Eigen::Index>(n - 1 - l));
    if (value < 0) {
      if (value < -kNegativeEigenTolerance * scale) {
        throw NumericError(detail::concat("covariance kernel has a negative eigenvalue ", value));
      }
      value = 0.0;
    }
    eigenvalues(static_cast<Eigen::Index>(l)) = value;
  }

  Matrix psi(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(kept));
  for (std::size_t l = 0; l < kept; ++l) {
    const auto col = static_cast<Eigen::Index>(l);
    psi.col(col) = solver.eigenvectors().col(static_cast<Eigen::Index>(n - 1 - l)).array() /
                   sqrt_w.array();
    detail::fix_sign(grid, psi.col(col));
  }

  const Matrix centered = sample.values().rowwise() - mean.transpose();
  Matrix scores = centered * w.asDiagonal() * psi;
  return FpcaResult(grid, mean, std::move(eigenvalues), std::move(psi), std::move(scores),
                    total_variance);
}

/// mu + sum_{l <= j} F_{t,l} psi_l for every t.
inline FunctionalSample reconstruct(const FpcaResult& result, std::size_t j) {
  if (j > result.components()) {
    throw ConfigError(detail::concat("reconstruct with ", j, " components but only ",
                                     result.components(), " are available"));
  }
  const auto jj = static_cast<Eigen::Index>(j);
  Matrix values = result.scores().leftCols(jj) * result.eigenfunctions().leftCols(jj).transpose();
  values.rowwise() += result.mean().transpose();
  return FunctionalSample(result.grid(), std::move(values));
}

}  // namespace ffm

#endif  // FFM_FPCA_HPP
