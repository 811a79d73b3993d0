#ifndef FFM_SPLINE_HPP
#define FFM_SPLINE_HPP

/** @file
 * Natural cubic spline interpolation and conversion of discretely observed
 * panels into functional samples.
 */

#include "ffm/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace ffm {

inline constexpr std::size_t kMinSplineKnots = 4;

/// Interpolating cubic spline with zero second derivative at both end knots.
class NaturalCubicSpline {
 public:
  NaturalCubicSpline(std::vector<double> xs, std::vector<double> ys,
                     std::size_t min_knots = kMinSplineKnots)
      : xs_(std::move(xs)), ys_(std::move(ys)) {
    if (xs_.size() != ys_.size()) {
      throw DataError("spline abscissae and values differ in length");
    }
    if (xs_.size() < std::max<std::size_t>(min_knots, 2)) {
      throw DataError(detail::concat("spline needs at least ", std::max<std::size_t>(min_knots, 2),
                                     " knots, got ", xs_.size()));
    }
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      if (!std::isfinite(xs_[i]) || !std::isfinite(ys_[i])) {
        throw DataError("spline knots must be finite");
      }
      if (i > 0 && !(xs_[i] > xs_[i - 1])) {
        throw DataError(detail::concat("spline abscissae must be strictly increasing (duplicate or "
                                       "unordered knot at index ", i, ")"));
      }
    }
    solve_second_derivatives();
  }

  double operator()(double r) const {
    const double lo = xs_.front();
    const double hi = xs_.back();
    const double slack = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
    if (r < lo - slack || r > hi + slack) {
      throw DataError(detail::concat("spline evaluated at ", r, " outside [", lo, ", ", hi, "]"));
    }
    r = std::clamp(r, lo, hi);
    // Interval i with xs[i] <= r <= xs[i+1].
    auto it = std::upper_bound(xs_.begin(), xs_.end(), r);
    std::size_t i = it == xs_.begin() ? 0 : static_cast<std::size_t>(it - xs_.begin()) - 1;
    if (i >= xs_.size() - 1) {
      i = xs_.size() - 2;
    }
    const double h = xs_[i + 1] - xs_[i];
    const double a = (xs_[i + 1] - r) / h;
    const double b = (r - xs_[i]) / h;
    return a * ys_[i] + b * ys_[i + 1] +
           ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * (h * h) / 6.0;
  }

  Vector evaluate(std::span<const double> rs) const {
    Vector out(static_cast<Eigen::Index>(rs.size()));
    for (std::size_t k = 0; k < rs.size(); ++k) {
      out(static_cast<Eigen::Index>(k)) = (*this)(rs[k]);
    }
    return out;
  }

  const std::vector<double>& knots() const noexcept { return xs_; }
  const std::vector<double>& values() const noexcept { return ys_; }
  /// Second derivatives at the knots; the first and last are zero.
  const std::vector<double>& second_derivatives() const noexcept { return m_; }

 private:
  // Tridiagonal system for the interior second derivatives, solved by the
  // Thomas algorithm (diagonally dominant, so no pivoting is needed).
  void solve_second_derivatives() {
    const std::size_t n = xs_.size();
    m_.assign(n, 0.0);
    if (n < 3) {
      return;
    }
    const std::size_t k = n - 2;
    std::vector<double> sub(k), diag(k), sup(k), rhs(k);
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t i = j + 1;
      const double h0 = xs_[i] - xs_[i - 1];
      const double h1 = xs_[i + 1] - xs_[i];
      sub[j] = h0;
      diag[j] = 2.0 * (h0 + h1);
      sup[j] = h1;
      rhs[j] = 6.0 * ((ys_[i + 1] - ys_[i]) / h1 - (ys_[i] - ys_[i - 1]) / h0);
    }
    for (std::size_t j = 1; j < k; ++j) {
      const double w = sub[j] / diag[j - 1];
      diag[j] -= w * sup[j - 1];
      rhs[j] -= w * rhs[j - 1];
    }
    std::vector<double> sol(k);
    sol[k - 1] = rhs[k - 1] / diag[k - 1];
    for (std::size_t j = k - 1; j-- > 0;) {
      sol[j] = (rhs[j] - sup[j] * sol[j + 1]) / diag[j];
    }
    for (std::size_t j = 0; j < k; ++j) {
      m_[j + 1] = sol[j];
    }
  }

  std::vector<double> xs_;
  std::vector<double> ys_;
  std::vector<double> m_;
};

inline NaturalCubicSpline natural_cubic_spline(std::vector<double> xs, std::vector<double> ys,
                                               std::size_t min_knots = kMinSplineKnots) {
  return NaturalCubicSpline(std::move(xs), std::move(ys), min_knots);
}

/// Knots used for one panel row; reported back to callers for provenance.
struct RowKnots {
  std::size_t row = 0;
  std::vector<double> maturities;
  std::size_t missing = 0;
};

/// Splines every panel row through its observed maturities and evaluates it
/// on the grid. Rows whose knots do not cover the grid are rejected.
inline FunctionalSample panel_to_sample(const DiscretePanel& panel, const Grid& grid,
                                        std::vector<RowKnots>* provenance = nullptr,
                                        std::size_t min_knots = kMinSplineKnots) {
  const auto rows = panel.length();
  if (rows < 1) {
    throw DataError("panel has no rows");
  }
  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(grid.size()));
  if (provenance != nullptr) {
    provenance->clear();
  }
  for (std::size_t t = 0; t < rows; ++t) {
    auto [xs, ys] = panel.observed(t);
    if (xs.size() < min_knots) {
      throw DataError(detail::concat("panel row ", t, " (", panel.times()[t], ") has ", xs.size(),
                                     " observed values; at least ", min_knots, " are required"));
    }
    const double slack = 1e-12 * std::max({1.0, std::abs(xs.front()), std::abs(xs.back())});
    if (grid.lower() < xs.front() - slack || grid.upper() > xs.back() + slack) {
      throw DataError(detail::concat("grid [", grid.lower(), ", ", grid.upper(),
                                     "] is outside the knot span [", xs.front(), ", ", xs.back(),
                                     "] of panel row ", t, " (", panel.times()[t], ")"));
    }
    if (provenance != nullptr) {
      provenance->push_back({t, xs, panel.maturities().size() - xs.size()});
    }
    const NaturalCubicSpline spline(std::move(xs), std::move(ys), min_knots);
    out.row(static_cast<Eigen::Index>(t)) = spline.evaluate(grid.points()).transpose();
  }
  return FunctionalSample(grid, std::move(out), panel.times());
}

}  // namespace ffm

#endif  // FFM_SPLINE_HPP
