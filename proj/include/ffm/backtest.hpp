#ifndef FFM_BACKTEST_HPP
#define FFM_BACKTEST_HPP

/** @file
 * Expanding-window out-of-sample evaluation.
 *
 * The forecast made at origin t (using curves 1..t) for t + h is compared
 * with the realized curve at the evaluation maturities, for every origin
 * t = initial_window..T-h.  The reported RMSFE is the root of the mean
 * squared error over all (origin, maturity) cells that were evaluated.
 */

#include "ffm/core.hpp"
#include "ffm/dns.hpp"
#include "ffm/pipeline.hpp"
#include "ffm/parallel.hpp"
#include "ffm/spline.hpp"

#include <cmath>
#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ffm {

enum class BacktestMethod { FfmFixed, FfmCriterion, Dns };

inline std::string_view to_string(BacktestMethod m) {
  switch (m) {
    case BacktestMethod::FfmFixed:
      return "FFM";
    case BacktestMethod::FfmCriterion:
      return "FFM-criterion";
    case BacktestMethod::Dns:
      return "DNS";
  }
  return "?";
}

inline constexpr std::size_t kDefaultInitialWindow = 120;

struct BacktestOptions {
  BacktestMethod method = BacktestMethod::FfmFixed;
  /// (K, p) for FfmFixed.
  Selection fixed{3, 1};
  Criterion criterion = Criterion::Bic;
  std::size_t k_max = 8;
  std::size_t p_max = 8;
  /// Diagonal AR dynamics instead of a full VAR.
  bool restricted = false;
  double lambda = kDnsDefaultLambda;
  std::size_t horizon = 1;
  std::size_t initial_window = kDefaultInitialWindow;
  std::size_t jobs = 1;
};

struct BacktestReport {
  std::string method;
  bool restricted = false;
  std::size_t horizon = 0;
  std::size_t initial_window = 0;
  double rmsfe = 0.0;
  std::vector<double> maturities;
  /// Origins (number of curves used), one per row of `errors`.
  std::vector<std::size_t> origins;
  /// forecast - realized; NaN where the realized value is missing or the
  /// origin was excluded.
  Matrix errors;
  /// (K, p) used at each origin; {3, 1} for DNS.
  std::vector<Selection> selections;
  /// Nonzero where the origin's fit failed and was left out.
  std::vector<std::uint8_t> excluded;
  std::vector<std::string> exclusion_reasons;

  std::size_t excluded_count() const {
    return static_cast<std::size_t>(std::count(excluded.begin(), excluded.end(), std::uint8_t{1}));
  }
};

/// Root mean square over the non-NaN entries of an error matrix.
inline double rmsfe(const Matrix& errors) {
  double sum = 0.0;
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < errors.rows(); ++i) {
    for (Eigen::Index j = 0; j < errors.cols(); ++j) {
      const double e = errors(i, j);
      if (!std::isnan(e)) {
        sum += e * e;
        ++count;
      }
    }
  }
  if (count == 0) {
    throw DataError("no forecast errors to aggregate");
  }
  return std::sqrt(sum / static_cast<double>(count));
}

namespace detail {

// Forecast curve on the grid, read off at the evaluation maturities.
inline Vector curve_at(const Grid& grid, const Vector& values, const std::vector<double>& at) {
  if (grid.points() == at) {
    return values;
  }
  std::vector<double> ys(values.data(), values.data() + values.size());
  const NaturalCubicSpline spline(grid.points(), std::move(ys), 2);
  return spline.evaluate(at);
}

struct BacktestData {
  DiscretePanel panel;
  FunctionalSample sample;
};

inline BacktestReport run_backtest(const BacktestData& data, const BacktestOptions& options) {
  const std::size_t t_len = data.panel.length();
  const std::size_t h = options.horizon;
  if (h < 1) {
    throw ConfigError("backtest horizon must be >= 1");
  }
  if (options.initial_window < 2) {
    throw ConfigError("backtest initial window must be >= 2");
  }
  if (t_len < options.initial_window + h) {
    throw DataError(concat("backtest needs T >= initial_window + h (T = ", t_len,
                           ", window = ", options.initial_window, ", h = ", h, ")"));
  }
  const Grid& grid = data.sample.grid();
  std::vector<double> eval;
  for (double r : data.panel.maturities()) {
    if (r >= grid.lower() - 1e-12 && r <= grid.upper() + 1e-12) {
      eval.push_back(r);
    }
  }
  if (options.method != BacktestMethod::Dns && eval.empty()) {
    throw DataError("no panel maturity lies inside the forecast grid");
  }
  if (options.method == BacktestMethod::Dns) {
    eval = data.panel.maturities();
  }
  std::vector<Eigen::Index> eval_cols;
  for (double r : eval) {
    const auto it = std::find(data.panel.maturities().begin(), data.panel.maturities().end(), r);
    eval_cols.push_back(static_cast<Eigen::Index>(it - data.panel.maturities().begin()));
  }

  const std::size_t n_origins = t_len - h - options.initial_window + 1;
  BacktestReport report;
  report.method = std::string(to_string(options.method));
  report.restricted = options.restricted;
  report.horizon = h;
  report.initial_window = options.initial_window;
  report.maturities = eval;
  report.origins.resize(n_origins);
  report.errors = Matrix::Constant(static_cast<Eigen::Index>(n_origins),
                                   static_cast<Eigen::Index>(eval.size()), kMissing);
  report.selections.assign(n_origins, Selection{});
  report.excluded.assign(n_origins, 0);
  report.exclusion_reasons.assign(n_origins, std::string{});

  parallel_for(n_origins, options.jobs, [&](std::size_t k) {
    const std::size_t origin = options.initial_window + k;
    report.origins[k] = origin;
    Vector predicted;
    try {
      if (options.method == BacktestMethod::Dns) {
        const DnsModel model = fit_dns(data.panel.head(origin), options.lambda, options.restricted);
        predicted = dns_forecast(model, eval, h).row(static_cast<Eigen::Index>(h - 1)).transpose();
        report.selections[k] = {3, 1};
      } else {
        FfmConfig config;
        config.criterion = options.criterion;
        config.k_max = options.k_max;
        config.p_max = options.p_max;
        config.restricted = options.restricted;
        if (options.method == BacktestMethod::FfmFixed) {
          config.fixed = options.fixed;
          config.k_max = options.fixed.factors;
        }
        const FfmModel model = fit_ffm(data.sample.head(origin), config);
        const ForecastResult fc = forecast(model, h);
        predicted = curve_at(grid, fc.curves.row(static_cast<Eigen::Index>(h - 1)).transpose(), eval);
        report.selections[k] = {model.factors(), model.lags()};
      }
    } catch (const Error& e) {
      report.excluded[k] = 1;
      report.exclusion_reasons[k] = e.what();
      return;
    }
    const auto target = static_cast<Eigen::Index>(origin + h - 1);
    for (std::size_t i = 0; i < eval.size(); ++i) {
      const double realized = data.panel.table()(target, eval_cols[i]);
      if (!DiscretePanel::is_missing(realized)) {
        report.errors(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) =
            predicted(static_cast<Eigen::Index>(i)) - realized;
      }
    }
  });
  if (report.excluded_count() == n_origins) {
    throw NumericError(concat("every backtest origin failed; first reason: ",
                              report.exclusion_reasons.front()));
  }
  report.rmsfe = rmsfe(report.errors);
  return report;
}

}  // namespace detail

/// Backtest on discretely observed curves: FFM methods spline each row onto
/// `grid` first, DNS regresses on the observed maturities directly.
inline BacktestReport rolling_backtest(const DiscretePanel& panel, const Grid& grid,
                                       const BacktestOptions& options) {
  FunctionalSample sample = panel_to_sample(panel, grid);
  return detail::run_backtest({panel, std::move(sample)}, options);
}

/// Backtest on curves already on a grid; the grid points act as the
/// observed maturities.
inline BacktestReport rolling_backtest(const FunctionalSample& sample,
                                       const BacktestOptions& options) {
  DiscretePanel panel(sample.grid().points(), sample.values(), sample.times());
  return detail::run_backtest({std::move(panel), sample}, options);
}

}  // namespace ffm

#endif  // FFM_BACKTEST_HPP
