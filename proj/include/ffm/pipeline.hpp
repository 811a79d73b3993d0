#ifndef FFM_PIPELINE_HPP
#define FFM_PIPELINE_HPP

/** @file
 * End-to-end functional factor model: FPCA, joint (K, p) selection, VAR fit
 * on the selected scores, fitted curves and h-step curve forecasts.
 */

#include "ffm/core.hpp"
#include "ffm/fpca.hpp"
#include "ffm/selection.hpp"
#include "ffm/var.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace ffm {

struct FfmConfig {
  Criterion criterion = Criterion::Bic;
  std::size_t k_max = 8;
  std::size_t p_max = 8;
  bool restricted = false;
  bool intercept = false;
  /// When set, (K, p) are fixed and no selection grid is computed.
  std::optional<Selection> fixed;
};

/// Signals that the selected dynamics do not improve on a no-dynamics model
/// with the same number of factors (typical for factor-free data).
struct DynamicsDiagnostic {
  /// 1 - tr(Sigma_eta) / (mean square of the selected scores on the fit window).
  double r_squared = 0.0;
  /// Criterion at the chosen cell minus the criterion with m = 0 and the
  /// same J; nonnegative means the lags do not pay for their penalty.
  double criterion_gain = 0.0;
  bool insignificant = false;
};

class FfmModel {
 public:
  FfmModel(FpcaResult fpca, std::optional<SelectionGrid> selection, VarFit var_fit,
           FfmConfig config, std::vector<std::string> warnings, DynamicsDiagnostic diagnostic)
      : fpca_(std::move(fpca)),
        selection_(std::move(selection)),
        var_fit_(std::move(var_fit)),
        config_(std::move(config)),
        warnings_(std::move(warnings)),
        diagnostic_(diagnostic) {}

  const FpcaResult& fpca() const noexcept { return fpca_; }
  const std::optional<SelectionGrid>& selection() const noexcept { return selection_; }
  const VarFit& var_fit() const noexcept { return var_fit_; }
  const FfmConfig& config() const noexcept { return config_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  const DynamicsDiagnostic& diagnostic() const noexcept { return diagnostic_; }

  std::size_t factors() const noexcept { return var_fit_.dimension(); }
  std::size_t lags() const noexcept { return var_fit_.order(); }

 private:
  FpcaResult fpca_;
  std::optional<SelectionGrid> selection_;
  VarFit var_fit_;
  FfmConfig config_;
  std::vector<std::string> warnings_;
  DynamicsDiagnostic diagnostic_;
};

struct ForecastResult {
  Grid grid;
  /// h x N; row k is the (k+1)-step-ahead curve.
  Matrix curves;
  /// h x K; the score forecasts behind each curve.
  Matrix score_forecasts;

  std::size_t horizon() const noexcept { return static_cast<std::size_t>(curves.rows()); }
  Curve curve(std::size_t k) const {
    return Curve(grid, curves.row(static_cast<Eigen::Index>(k)).transpose());
  }
};

namespace detail {

inline DynamicsDiagnostic diagnose(const FpcaResult& fpca, const VarFit& fit, Criterion criterion) {
  const auto j = static_cast<Eigen::Index>(fit.dimension());
  const auto window = static_cast<Eigen::Index>(fit.residuals().rows());
  const Matrix recent = fpca.scores().leftCols(j).bottomRows(window);
  const double baseline = recent.squaredNorm() / static_cast<double>(window);
  const double trace = fit.sigma_eta().trace();
  const double trailing = fpca.trailing_variance(fit.dimension());
  const std::size_t t_len = fpca.length();
  DynamicsDiagnostic d;
  d.r_squared = baseline > 0 ? 1.0 - trace / baseline : 0.0;
  d.criterion_gain = criterion_value(criterion, trace, trailing, fit.dimension(), fit.order(), t_len) -
                     criterion_value(criterion, baseline, trailing, fit.dimension(), 0, t_len);
  d.insignificant = !(d.criterion_gain < 0.0);
  return d;
}

}  // namespace detail

/// Selection and VAR fit on precomputed FPCA output.
inline FfmModel fit_ffm(FpcaResult fpca, FfmConfig config) {
  std::vector<std::string> warnings;
  if (config.k_max < 1 || config.p_max < 1) {
    throw ConfigError("k_max and p_max must be >= 1");
  }
  if (config.k_max > fpca.components()) {
    warnings.push_back(detail::concat("k_max = ", config.k_max, " clipped to the ",
                                      fpca.components(), " available components"));
    config.k_max = fpca.components();
  }

  std::optional<SelectionGrid> grid;
  Selection pick;
  if (config.fixed) {
    pick = *config.fixed;
    if (pick.factors < 1 || pick.factors > fpca.components()) {
      throw ConfigError(detail::concat("fixed K = ", pick.factors, " outside 1..",
                                       fpca.components()));
    }
    if (pick.lags < 1) {
      throw ConfigError("fixed p must be >= 1");
    }
  } else {
    grid = criterion_grid(fpca, config.k_max, config.p_max,
                          {.criterion = config.criterion, .restricted = config.restricted});
    for (const auto& w : grid->warnings()) {
      warnings.push_back(w);
    }
    pick = grid->chosen();
  }

  VarFit fit = fit_var(fpca.scores().leftCols(static_cast<Eigen::Index>(pick.factors)), pick.lags,
                       {.restricted = config.restricted, .intercept = config.intercept});
  const DynamicsDiagnostic diag = detail::diagnose(fpca, fit, config.criterion);
  if (diag.insignificant) {
    warnings.push_back(detail::concat("selected dynamics (K = ", pick.factors, ", p = ", pick.lags,
                                      ") do not improve on a no-dynamics model; the data may "
                                      "contain no predictable factors"));
  }
  return FfmModel(std::move(fpca), std::move(grid), std::move(fit), std::move(config),
                  std::move(warnings), diag);
}

/// Steps 1-3 on a sample: FPCA with k_max components, selection, VAR fit.
inline FfmModel fit_ffm(const FunctionalSample& sample, const FfmConfig& config) {
  std::size_t k = config.k_max;
  if (config.fixed) {
    k = std::max(k, config.fixed->factors);
  }
  return fit_ffm(fpca(sample, std::max<std::size_t>(k, 1)), config);
}

/// mu + sum_{l <= K} F_{l,t} psi_l.
inline FunctionalSample fitted_curves(const FfmModel& model) {
  return reconstruct(model.fpca(), model.factors());
}

/// Maps score vectors (rows) to curves mu + Psi' f.
inline Matrix scores_to_curves(const FpcaResult& fpca, const Eigen::Ref<const Matrix>& scores) {
  const auto j = scores.cols();
  Matrix curves = scores * fpca.eigenfunctions().leftCols(j).transpose();
  curves.rowwise() += fpca.mean().transpose();
  return curves;
}

inline ForecastResult forecast(const FfmModel& model, std::size_t h) {
  const auto k = static_cast<Eigen::Index>(model.factors());
  const Matrix scores = model.fpca().scores().leftCols(k);
  Matrix path = forecast_scores(model.var_fit(), scores, h);
  Matrix curves = scores_to_curves(model.fpca(), path);
  return {model.fpca().grid(), std::move(curves), std::move(path)};
}

}  // namespace ffm

#endif  // FFM_PIPELINE_HPP
