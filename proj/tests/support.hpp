#ifndef FFM_TESTS_SUPPORT_HPP
#define FFM_TESTS_SUPPORT_HPP

#include "ffm/ffm.hpp"

#include <cmath>
#include <random>

namespace testing_support {

using ffm::Matrix;
using ffm::Vector;

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                            double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = normal(rng);
    }
  }
  return m;
}

/// Smooth random curves: a few random Fourier terms plus small noise.
inline ffm::FunctionalSample random_sample(std::mt19937_64& rng, std::size_t t_len, std::size_t n,
                                           double noise = 0.05) {
  const ffm::Grid grid = ffm::make_grid(0.0, 1.0, n);
  const Matrix basis = ffm::fourier_basis(grid, 7);
  Matrix coef = random_matrix(rng, static_cast<Eigen::Index>(t_len), 7);
  for (Eigen::Index l = 0; l < 7; ++l) {
    coef.col(l) /= static_cast<double>(l + 1);
  }
  Matrix values = coef * basis.transpose() +
                  random_matrix(rng, static_cast<Eigen::Index>(t_len), static_cast<Eigen::Index>(n), noise);
  return ffm::FunctionalSample(grid, std::move(values));
}

/// Quadrature inner product computed with an explicit loop.
inline double quad(const ffm::Grid& g, const Vector& x, const Vector& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    s += g.weights()[i] * x(k) * y(k);
  }
  return s;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace testing_support

#endif  // FFM_TESTS_SUPPORT_HPP
