#ifndef FFM_SELECTION_HPP
#define FFM_SELECTION_HPP

/** @file
 * Joint selection of the number of factors J and the lag order m.
 *
 * For every cell (J, m) the criteria consume
 *   MSE(J, m) = tr(Sigma_eta^(J,m)) + sum_{l > J} lambda_l,
 * where Sigma_eta^(J,m) is the innovation covariance of a VAR(m) fitted to
 * the first J score series.  BIC and HQC add Jm ln(T)/T and 2Jm ln(ln T)/T to
 * ln(MSE); fFPE inflates the trace by (T + Jm)/T and adds no penalty.
 */

#include "ffm/core.hpp"
#include "ffm/fpca.hpp"
#include "ffm/var.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ffm {

enum class Criterion { Bic, Hqc, Ffpe };

inline constexpr std::array<Criterion, 3> kAllCriteria{Criterion::Bic, Criterion::Hqc,
                                                       Criterion::Ffpe};

inline std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::Bic:
      return "bic";
    case Criterion::Hqc:
      return "hqc";
    case Criterion::Ffpe:
      return "ffpe";
  }
  return "?";
}

inline Criterion parse_criterion(std::string_view s) {
  if (s == "bic" || s == "BIC") return Criterion::Bic;
  if (s == "hqc" || s == "HQC") return Criterion::Hqc;
  if (s == "ffpe" || s == "fFPE" || s == "FFPE") return Criterion::Ffpe;
  throw ConfigError(detail::concat("unknown criterion '", s, "' (expected bic, hqc or ffpe)"));
}

/// Penalty added to ln(MSE); zero for fFPE, which penalizes multiplicatively.
inline double criterion_penalty(Criterion c, std::size_t j, std::size_t m, std::size_t t_len) {
  const double t = static_cast<double>(t_len);
  const double params = static_cast<double>(j * m);
  switch (c) {
    case Criterion::Bic:
      return params * std::log(t) / t;
    case Criterion::Hqc:
      return 2.0 * params * std::log(std::log(t)) / t;
    case Criterion::Ffpe:
      return 0.0;
  }
  return 0.0;
}

/// Criterion value from the innovation trace and the truncated variance.
inline double criterion_value(Criterion c, double trace, double trailing, std::size_t j,
                              std::size_t m, std::size_t t_len) {
  if (c == Criterion::Ffpe) {
    const double t = static_cast<double>(t_len);
    return (t + static_cast<double>(j * m)) / t * trace + trailing;
  }
  return std::log(trace + trailing) + criterion_penalty(c, j, m, t_len);
}

struct Selection {
  std::size_t factors = 0;  ///< K hat
  std::size_t lags = 0;     ///< p hat
  friend bool operator==(const Selection&, const Selection&) = default;
};

/// Criterion and MSE surfaces over 1 <= J <= k_max, 1 <= m <= p_max.
/// Cell (J, m) is stored at index (J - 1, m - 1).
class SelectionGrid {
 public:
  SelectionGrid(std::size_t k_max, std::size_t p_max, std::size_t sample_length,
                Criterion primary, Matrix trace, Vector trailing, std::vector<std::string> warnings)
      : k_max_(k_max),
        p_max_(p_max),
        t_len_(sample_length),
        primary_(primary),
        trace_(std::move(trace)),
        trailing_(std::move(trailing)),
        warnings_(std::move(warnings)) {
    const auto kk = static_cast<Eigen::Index>(k_max_);
    const auto pp = static_cast<Eigen::Index>(p_max_);
    mse_.resize(kk, pp);
    for (auto& m : criteria_) {
      m.resize(kk, pp);
    }
    bool any = false;
    for (Eigen::Index j = 0; j < kk; ++j) {
      for (Eigen::Index m = 0; m < pp; ++m) {
        const double tr = trace_(j, m);
        if (!std::isfinite(tr)) {
          mse_(j, m) = std::numeric_limits<double>::infinity();
          for (auto& c : criteria_) {
            c(j, m) = std::numeric_limits<double>::infinity();
          }
          continue;
        }
        any = true;
        mse_(j, m) = tr + trailing_(j);
        for (std::size_t c = 0; c < kAllCriteria.size(); ++c) {
          criteria_[c](j, m) =
              criterion_value(kAllCriteria[c], tr, trailing_(j), static_cast<std::size_t>(j + 1),
                              static_cast<std::size_t>(m + 1), t_len_);
        }
      }
    }
    if (!any) {
      throw NumericError("every (J, m) cell of the selection grid failed");
    }
    for (std::size_t c = 0; c < kAllCriteria.size(); ++c) {
      chosen_[c] = argmin(criteria_[c]);
    }
  }

  std::size_t k_max() const noexcept { return k_max_; }
  std::size_t p_max() const noexcept { return p_max_; }
  std::size_t sample_length() const noexcept { return t_len_; }
  Criterion primary() const noexcept { return primary_; }

  /// MSE(J, m); +infinity marks a failed cell.
  const Matrix& mse() const noexcept { return mse_; }
  /// tr(Sigma_eta^(J,m)).
  const Matrix& innovation_trace() const noexcept { return trace_; }
  /// sum_{l > J} lambda_l, indexed by J - 1.
  const Vector& trailing_variance() const noexcept { return trailing_; }
  const Matrix& criterion(Criterion c) const { return criteria_[index(c)]; }
  const Matrix& criterion() const { return criterion(primary_); }
  Selection chosen(Criterion c) const { return chosen_[index(c)]; }
  Selection chosen() const { return chosen(primary_); }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  bool failed(std::size_t j, std::size_t m) const {
    return !std::isfinite(trace_(static_cast<Eigen::Index>(j - 1), static_cast<Eigen::Index>(m - 1)));
  }

 private:
  static std::size_t index(Criterion c) { return static_cast<std::size_t>(c); }

  // Lexicographically smallest (J, m) among minimizers.
  static Selection argmin(const Matrix& values) {
    Selection best{};
    double best_value = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < values.rows(); ++j) {
      for (Eigen::Index m = 0; m < values.cols(); ++m) {
        const double v = values(j, m);
        if (v < best_value) {
          best_value = v;
          best = {static_cast<std::size_t>(j + 1), static_cast<std::size_t>(m + 1)};
        }
      }
    }
    return best;
  }

  std::size_t k_max_;
  std::size_t p_max_;
  std::size_t t_len_;
  Criterion primary_;
  Matrix trace_;
  Vector trailing_;
  Matrix mse_;
  std::array<Matrix, 3> criteria_;
  std::array<Selection, 3> chosen_{};
  std::vector<std::string> warnings_;
};

/// tr(Sigma_eta) of the VAR(m) fitted to the first J scores, plus the
/// variance of the discarded components.  J = 0 gives the total variance.
inline double mse_simplified(const FpcaResult& result, std::size_t j, std::size_t m,
                             bool restricted = false) {
  if (j > result.components()) {
    throw ConfigError(detail::concat("J = ", j, " exceeds the ", result.components(),
                                     " available components"));
  }
  if (j == 0) {
    return result.trailing_variance(0);
  }
  const VarFit fit = fit_var(result.scores().leftCols(static_cast<Eigen::Index>(j)), m,
                             {.restricted = restricted});
  return fit.sigma_eta().trace() + result.trailing_variance(j);
}

/// (T - m)^{-1} sum_{t > m} ||Y_t - fitted_t||^2 under the grid quadrature.
/// `fitted` is aligned with `sample`; its first m rows are ignored.
inline double mse_direct(const FunctionalSample& sample, const FunctionalSample& fitted,
                         std::size_t m) {
  if (!(sample.grid() == fitted.grid())) {
    throw DataError("mse_direct: sample and fitted curves live on different grids");
  }
  if (sample.length() != fitted.length()) {
    throw DataError("mse_direct: sample and fitted curves differ in length");
  }
  if (m >= sample.length()) {
    throw ConfigError("mse_direct: lag order leaves no evaluation periods");
  }
  const auto n = static_cast<Eigen::Index>(sample.length() - m);
  const Matrix err = sample.values().bottomRows(n) - fitted.values().bottomRows(n);
  const Vector w = sample.grid().weight_vector();
  const double total = (err.array().square().rowwise() * w.transpose().array()).sum();
  return total / static_cast<double>(n);
}

/// One-step fitted curves mu + Psi' A x_{t-1} for t = m+1..T; rows before m
/// are set to the mean curve.
inline FunctionalSample one_step_fitted(const FpcaResult& result, const VarFit& fit) {
  const auto j = static_cast<Eigen::Index>(fit.dimension());
  const auto m = static_cast<Eigen::Index>(fit.order());
  const auto t_len = static_cast<Eigen::Index>(result.length());
  const Matrix scores = result.scores().leftCols(j);
  Matrix predicted = Matrix::Zero(t_len, j);
  for (Eigen::Index t = m; t < t_len; ++t) {
    predicted.row(t) = predict_next(fit, scores.middleRows(t - m, m)).transpose();
  }
  Matrix values = predicted * result.eigenfunctions().leftCols(j).transpose();
  values.rowwise() += result.mean().transpose();
  return FunctionalSample(result.grid(), std::move(values));
}

struct GridOptions {
  Criterion criterion = Criterion::Bic;
  bool restricted = false;
};

inline SelectionGrid criterion_grid(const FpcaResult& result, std::size_t k_max,
                                    std::size_t p_max, GridOptions options = {}) {
  if (k_max < 1 || p_max < 1) {
    throw ConfigError("criterion grid requires k_max >= 1 and p_max >= 1");
  }
  if (k_max > result.components()) {
    throw ConfigError(detail::concat("k_max = ", k_max, " exceeds the ", result.components(),
                                     " available components"));
  }
  const auto kk = static_cast<Eigen::Index>(k_max);
  const auto pp = static_cast<Eigen::Index>(p_max);
  Matrix trace(kk, pp);
  Vector trailing(kk);
  std::vector<std::string> warnings;
  for (std::size_t j = 1; j <= k_max; ++j) {
    trailing(static_cast<Eigen::Index>(j - 1)) = result.trailing_variance(j);
    const auto scores = result.scores().leftCols(static_cast<Eigen::Index>(j));
    for (std::size_t m = 1; m <= p_max; ++m) {
      double value = std::numeric_limits<double>::infinity();
      try {
        value = fit_var(scores, m, {.restricted = options.restricted}).sigma_eta().trace();
      } catch (const Error& e) {
        warnings.push_back(detail::concat("cell (", j, ", ", m, ") failed: ", e.what()));
      }
      trace(static_cast<Eigen::Index>(j - 1), static_cast<Eigen::Index>(m - 1)) = value;
    }
  }
  return SelectionGrid(k_max, p_max, result.length(), options.criterion, std::move(trace),
                       std::move(trailing), std::move(warnings));
}

/// One row of the long-format MSE surface.
struct SurfaceRow {
  std::size_t j = 0;
  std::size_t m = 0;
  double mse = 0;
  double criterion_value = 0;
  bool chosen = false;
};

inline std::vector<SurfaceRow> export_mse_surface(const SelectionGrid& grid) {
  std::vector<SurfaceRow> rows;
  rows.reserve(grid.k_max() * grid.p_max());
  const Selection pick = grid.chosen();
  for (std::size_t j = 1; j <= grid.k_max(); ++j) {
    for (std::size_t m = 1; m <= grid.p_max(); ++m) {
      const auto r = static_cast<Eigen::Index>(j - 1);
      const auto c = static_cast<Eigen::Index>(m - 1);
      rows.push_back({j, m, grid.mse()(r, c), grid.criterion()(r, c),
                      pick.factors == j && pick.lags == m});
    }
  }
  return rows;
}

}  // namespace ffm

#endif  // FFM_SELECTION_HPP
