#ifndef FFM_CORE_HPP
#define FFM_CORE_HPP

/** @file
 * Grids, quadrature and curve containers.
 *
 * Every function in this library lives on a Grid: a strictly increasing set
 * of abscissae r_1 < ... < r_N with trapezoid weights, so that
 * \f$\int_a^b x(r) y(r) dr \approx \sum_i w_i x(r_i) y(r_i)\f$.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ffm {

/// Base of all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration supplied by the caller.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data violating a structural requirement (too few knots, bad shapes).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: singular systems, broken kernels, unstable dynamics.
class NumericError : public Error {
 public:
  using Error::Error;
};

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace detail {

template <typename... Args>
std::string concat(Args&&... args) {
  std::ostringstream os;
  (os << ... << std::forward<Args>(args));
  return os.str();
}

inline bool all_finite(const Eigen::Ref<const Matrix>& m) {
  return m.allFinite();
}

}  // namespace detail

class Grid {
 public:
  /// Builds a grid over arbitrary strictly increasing points with
  /// trapezoid weights.
  explicit Grid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.size() < 2) {
      throw ConfigError("grid needs at least 2 points");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (!std::isfinite(points_[i])) {
        throw ConfigError(detail::concat("grid point ", i, " is not finite"));
      }
      if (i > 0 && !(points_[i] > points_[i - 1])) {
        throw ConfigError(
            detail::concat("grid points must be strictly increasing (index ", i, ")"));
      }
    }
    const std::size_t n = points_.size();
    weights_.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double half = 0.5 * (points_[i + 1] - points_[i]);
      weights_[i] += half;
      weights_[i + 1] += half;
    }
  }

  std::size_t size() const noexcept { return points_.size(); }
  double lower() const noexcept { return points_.front(); }
  double upper() const noexcept { return points_.back(); }
  const std::vector<double>& points() const noexcept { return points_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  Eigen::Map<const Vector> point_vector() const noexcept {
    return {points_.data(), static_cast<Eigen::Index>(points_.size())};
  }
  Eigen::Map<const Vector> weight_vector() const noexcept {
    return {weights_.data(), static_cast<Eigen::Index>(weights_.size())};
  }

  /// True when the grid was built from n equally spaced points (up to
  /// rounding); used only for serialization.
  bool is_uniform() const noexcept {
    const double h = (upper() - lower()) / static_cast<double>(size() - 1);
    for (std::size_t i = 0; i < size(); ++i) {
      const double expected = lower() + h * static_cast<double>(i);
      if (std::abs(points_[i] - expected) > 1e-12 * std::max(1.0, std::abs(expected))) {
        return false;
      }
    }
    return true;
  }

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.points_ == b.points_;
  }

 private:
  std::vector<double> points_;
  std::vector<double> weights_;
};

/// n equally spaced points on [a, b] including both endpoints.
inline Grid make_grid(double a, double b, std::size_t n) {
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw ConfigError("grid bounds must be finite");
  }
  if (!(a < b)) {
    throw ConfigError("grid requires a < b");
  }
  if (n < 2) {
    throw ConfigError("grid requires n >= 2");
  }
  std::vector<double> pts(n);
  const double h = (b - a) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i] = a + h * static_cast<double>(i);
  }
  pts.back() = b;
  return Grid(std::move(pts));
}

inline constexpr std::size_t kDefaultGridSize = 100;

/// A function tabulated on a grid.
struct Curve {
  Grid grid;
  Vector values;

  Curve(Grid g, Vector v) : grid(std::move(g)), values(std::move(v)) {
    if (static_cast<std::size_t>(values.size()) != grid.size()) {
      throw DataError(detail::concat("curve has ", values.size(),
                                     " values but grid has ", grid.size(), " points"));
    }
    if (!values.allFinite()) {
      throw DataError("curve values must be finite");
    }
  }
};

/// Quadrature inner product of two vectors tabulated on the same grid.
inline double inner_product(const Grid& grid, const Eigen::Ref<const Vector>& x,
                            const Eigen::Ref<const Vector>& y) {
  if (static_cast<std::size_t>(x.size()) != grid.size() ||
      static_cast<std::size_t>(y.size()) != grid.size()) {
    throw DataError("inner product operands do not match the grid");
  }
  return (grid.weight_vector().array() * x.array() * y.array()).sum();
}

inline double inner_product(const Curve& x, const Curve& y) {
  if (!(x.grid == y.grid)) {
    throw DataError("inner product of curves on different grids");
  }
  return inner_product(x.grid, x.values, y.values);
}

inline double norm(const Curve& x) { return std::sqrt(inner_product(x, x)); }

/// T curves on a common grid; row t is Y_t.
class FunctionalSample {
 public:
  FunctionalSample(Grid grid, Matrix values, std::vector<std::string> times = {})
      : grid_(std::move(grid)), values_(std::move(values)), times_(std::move(times)) {
    if (static_cast<std::size_t>(values_.cols()) != grid_.size()) {
      throw DataError(detail::concat("sample has ", values_.cols(),
                                     " columns but grid has ", grid_.size(), " points"));
    }
    if (values_.rows() < 1) {
      throw DataError("sample has no curves");
    }
    if (!values_.allFinite()) {
      throw DataError("sample contains non-finite values");
    }
    if (times_.empty()) {
      times_.reserve(static_cast<std::size_t>(values_.rows()));
      for (Eigen::Index t = 0; t < values_.rows(); ++t) {
        times_.push_back(std::to_string(t + 1));
      }
    } else if (times_.size() != static_cast<std::size_t>(values_.rows())) {
      throw DataError("time labels do not match the number of curves");
    }
  }

  const Grid& grid() const noexcept { return grid_; }
  const Matrix& values() const noexcept { return values_; }
  const std::vector<std::string>& times() const noexcept { return times_; }
  std::size_t length() const noexcept { return static_cast<std::size_t>(values_.rows()); }

  Curve curve(std::size_t t) const { return Curve(grid_, values_.row(static_cast<Eigen::Index>(t)).transpose()); }

  /// First `count` curves, as used by expanding-window estimation.
  FunctionalSample head(std::size_t count) const {
    if (count < 1 || count > length()) {
      throw ConfigError("head() count out of range");
    }
    const auto n = static_cast<Eigen::Index>(count);
    return FunctionalSample(grid_, values_.topRows(n),
                            std::vector<std::string>(times_.begin(), times_.begin() + n));
  }

 private:
  Grid grid_;
  Matrix values_;
  std::vector<std::string> times_;
};

/// Discretely observed curves with possible gaps; NaN marks a missing cell.
class DiscretePanel {
 public:
  DiscretePanel(std::vector<double> maturities, Matrix table, std::vector<std::string> times = {})
      : maturities_(std::move(maturities)), table_(std::move(table)), times_(std::move(times)) {
    if (static_cast<std::size_t>(table_.cols()) != maturities_.size()) {
      throw DataError("panel table width does not match the number of maturities");
    }
    for (std::size_t i = 0; i < maturities_.size(); ++i) {
      if (!std::isfinite(maturities_[i])) {
        throw DataError("panel maturities must be finite");
      }
      if (i > 0 && !(maturities_[i] > maturities_[i - 1])) {
        throw DataError("panel maturities must be strictly increasing");
      }
    }
    for (Eigen::Index t = 0; t < table_.rows(); ++t) {
      for (Eigen::Index j = 0; j < table_.cols(); ++j) {
        if (std::isinf(table_(t, j))) {
          throw DataError(detail::concat("panel row ", t, " contains an infinite value"));
        }
      }
    }
    if (times_.empty()) {
      for (Eigen::Index t = 0; t < table_.rows(); ++t) {
        times_.push_back(std::to_string(t + 1));
      }
    } else if (times_.size() != static_cast<std::size_t>(table_.rows())) {
      throw DataError("time labels do not match the number of panel rows");
    }
  }

  static bool is_missing(double v) noexcept { return std::isnan(v); }

  const std::vector<double>& maturities() const noexcept { return maturities_; }
  const Matrix& table() const noexcept { return table_; }
  const std::vector<std::string>& times() const noexcept { return times_; }
  std::size_t length() const noexcept { return static_cast<std::size_t>(table_.rows()); }

  /// Non-missing (maturity, value) pairs of row t.
  std::pair<std::vector<double>, std::vector<double>> observed(std::size_t t) const {
    std::pair<std::vector<double>, std::vector<double>> out;
    const auto row = static_cast<Eigen::Index>(t);
    for (Eigen::Index j = 0; j < table_.cols(); ++j) {
      if (!is_missing(table_(row, j))) {
        out.first.push_back(maturities_[static_cast<std::size_t>(j)]);
        out.second.push_back(table_(row, j));
      }
    }
    return out;
  }

  DiscretePanel head(std::size_t count) const {
    if (count < 1 || count > length()) {
      throw ConfigError("head() count out of range");
    }
    const auto n = static_cast<Eigen::Index>(count);
    return DiscretePanel(maturities_, table_.topRows(n),
                         std::vector<std::string>(times_.begin(), times_.begin() + n));
  }

 private:
  std::vector<double> maturities_;
  Matrix table_;
  std::vector<std::string> times_;
};

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

}  // namespace ffm

#endif  // FFM_CORE_HPP
