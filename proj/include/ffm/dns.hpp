#ifndef FFM_DNS_HPP
#define FFM_DNS_HPP

/** @file
 * Dynamic Nelson-Siegel benchmark: fixed-decay loadings, per-date
 * cross-sectional regressions for the level/slope/curvature factors and a
 * VAR(1) (or three AR(1)) without constant on the factor series.
 */

#include "ffm/core.hpp"
#include "ffm/var.hpp"

#include <Eigen/QR>

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace ffm {

/// Decay that puts the curvature maximum near 30 months.
inline constexpr double kDnsDefaultLambda = 0.0609;

/// M x 3 matrix of loadings (1, (1-e^{-x})/x, (1-e^{-x})/x - e^{-x}) with
/// x = lambda * r.  The removable singularity at r = 0 takes its limit.
inline Matrix dns_loadings(double lambda, std::span<const double> maturities) {
  if (!(lambda > 0) || !std::isfinite(lambda)) {
    throw ConfigError("Nelson-Siegel decay lambda must be positive and finite");
  }
  Matrix out(static_cast<Eigen::Index>(maturities.size()), 3);
  for (std::size_t i = 0; i < maturities.size(); ++i) {
    const double r = maturities[i];
    if (!(r >= 0) || !std::isfinite(r)) {
      throw ConfigError(detail::concat("maturity ", r, " must be nonnegative and finite"));
    }
    const auto row = static_cast<Eigen::Index>(i);
    out(row, 0) = 1.0;
    if (r == 0.0) {
      out(row, 1) = 1.0;
      out(row, 2) = 0.0;
      continue;
    }
    const double x = lambda * r;
    const double slope = -std::expm1(-x) / x;
    out(row, 1) = slope;
    out(row, 2) = slope - std::exp(-x);
  }
  return out;
}

class DnsModel {
 public:
  DnsModel(double lambda, std::vector<double> maturities, Matrix beta, VarFit dynamics)
      : lambda_(lambda),
        maturities_(std::move(maturities)),
        beta_(std::move(beta)),
        dynamics_(std::move(dynamics)) {
    if (beta_.cols() != 3 || dynamics_.dimension() != 3) {
      throw DataError("DNS model needs three factors");
    }
  }

  double lambda() const noexcept { return lambda_; }
  const std::vector<double>& maturities() const noexcept { return maturities_; }
  /// T x 3 level, slope and curvature factors.
  const Matrix& beta() const noexcept { return beta_; }
  const VarFit& dynamics() const noexcept { return dynamics_; }

 private:
  double lambda_;
  std::vector<double> maturities_;
  Matrix beta_;
  VarFit dynamics_;
};

/// Least-squares Nelson-Siegel factors for every row of the panel, using the
/// observed maturities of that row only.
inline Matrix dns_factors(const DiscretePanel& panel, double lambda) {
  const auto rows = static_cast<Eigen::Index>(panel.length());
  Matrix beta(rows, 3);
  for (Eigen::Index t = 0; t < rows; ++t) {
    const auto [xs, ys] = panel.observed(static_cast<std::size_t>(t));
    if (xs.size() < 3) {
      throw DataError(detail::concat("panel row ", t, " has ", xs.size(),
                                     " observed maturities; the DNS regression needs 3"));
    }
    const Matrix x = dns_loadings(lambda, xs);
    const Eigen::Map<const Vector> y(ys.data(), static_cast<Eigen::Index>(ys.size()));
    Eigen::ColPivHouseholderQR<Matrix> qr(x);
    qr.setThreshold(1e-10);
    if (qr.rank() < 3) {
      throw NumericError(detail::concat("rank-deficient Nelson-Siegel cross-section in row ", t));
    }
    beta.row(t) = qr.solve(y).transpose();
  }
  return beta;
}

/// Cross-sectional factors followed by VAR(1) (or diagonal AR(1)) dynamics
/// without constant.
inline DnsModel fit_dns(const DiscretePanel& panel, double lambda = kDnsDefaultLambda,
                        bool diagonal = false) {
  Matrix beta = dns_factors(panel, lambda);
  VarFit dynamics = fit_var(beta, 1, {.restricted = diagonal, .intercept = false});
  return DnsModel(lambda, panel.maturities(), std::move(beta), std::move(dynamics));
}

/// h x M yield forecasts at the requested maturities.
inline Matrix dns_forecast(const DnsModel& model, std::span<const double> maturities,
                           std::size_t h) {
  const Matrix path = forecast_scores(model.dynamics(), model.beta(), h);
  return path * dns_loadings(model.lambda(), maturities).transpose();
}

}  // namespace ffm

#endif  // FFM_DNS_HPP
