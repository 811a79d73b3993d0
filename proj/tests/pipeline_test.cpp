#include "support.hpp"

#include <gtest/gtest.h>

using namespace ffm;
using testing_support::random_matrix;
using testing_support::random_sample;

namespace {

FunctionalSample rank_one_ar(std::uint64_t seed, std::size_t t_len, double a) {
  std::mt19937_64 rng(seed);
  const Grid g = make_grid(0, 1, 41);
  const Vector v = fourier_basis(g, 2).col(1);
  std::normal_distribution<double> z;
  Matrix values(static_cast<Eigen::Index>(t_len), 41);
  double f = 0;
  for (int burn = 0; burn < 100; ++burn) f = a * f + z(rng);
  for (Eigen::Index t = 0; t < values.rows(); ++t) {
    f = a * f + z(rng);
    values.row(t) = (0.2 + f * v.array()).matrix().transpose();
    for (int i = 0; i < 41; ++i) values(t, i) += 0.01 * z(rng);
  }
  return FunctionalSample(g, values);
}

}  // namespace

// BIC picks (1, 1) on about 94% of seeds here; the seed is fixed.
TEST(FitFfm, RankOneArRecoversDynamics) {
  const FfmModel model = fit_ffm(rank_one_ar(50, 500, 0.7), FfmConfig{});
  EXPECT_EQ(model.factors(), 1u);
  EXPECT_EQ(model.lags(), 1u);
  EXPECT_NEAR(model.var_fit().lags()[0](0, 0), 0.7, 0.1);
  EXPECT_FALSE(model.diagnostic().insignificant);
}

TEST(FitFfm, WhiteNoiseIsFlagged) {
  std::mt19937_64 rng(52);
  const Grid g = make_grid(0, 1, 31);
  const FunctionalSample s(g, random_matrix(rng, 300, 31));
  const FfmModel model = fit_ffm(s, FfmConfig{});
  EXPECT_EQ(model.factors(), 1u);
  EXPECT_EQ(model.lags(), 1u);
  EXPECT_NEAR(model.var_fit().sigma_eta().trace(), model.fpca().eigenvalues()(0),
              0.05 * model.fpca().eigenvalues()(0));
  EXPECT_TRUE(model.diagnostic().insignificant);
  EXPECT_FALSE(model.warnings().empty());
}

TEST(FitFfm, KmaxClippedWithWarning) {
  std::mt19937_64 rng(53);
  const FfmModel model = fit_ffm(random_sample(rng, 6, 20), FfmConfig{});
  EXPECT_LE(model.selection()->k_max(), 5u);
  bool clipped = false;
  for (const auto& w : model.warnings()) clipped = clipped || w.find("clipped") != std::string::npos;
  EXPECT_TRUE(clipped);
}

TEST(FittedCurves, CompleteBasisAndRankOne) {
  std::mt19937_64 rng(54);
  const FunctionalSample s = random_sample(rng, 12, 8);
  FfmConfig c;
  c.fixed = Selection{8, 1};
  const FfmModel model = fit_ffm(s, c);
  ASSERT_EQ(model.fpca().rank(), 8u);
  EXPECT_LT((fitted_curves(model).values() - s.values()).cwiseAbs().maxCoeff(), 1e-6);
  const FunctionalSample mean_only = reconstruct(model.fpca(), 0);
  for (int t = 0; t < 12; ++t) EXPECT_EQ(mean_only.values().row(t), model.fpca().mean().transpose());
}

TEST(Forecast, ZeroDynamicsGivesMean) {
  std::mt19937_64 rng(55);
  const FpcaResult r = fpca(random_sample(rng, 30, 10), 2);
  const VarFit zero({Matrix::Zero(2, 2)}, Vector(), Matrix::Zero(29, 2), false);
  const FfmModel model(r, std::nullopt, zero, FfmConfig{}, {}, {});
  const ForecastResult fc = forecast(model, 3);
  for (int k = 0; k < 3; ++k) EXPECT_EQ(fc.curves.row(k), r.mean().transpose());
}

TEST(Forecast, ScalarRecursionTwoSteps) {
  const Grid g = make_grid(0, 1, 21);
  const Vector psi = fourier_basis(g, 2).col(1);
  Matrix scores(3, 1);
  scores << -1, -3, 4;
  const Vector mu = Vector::Constant(21, 0.1);
  const FpcaResult r(g, mu, Vector::Constant(1, 1.0), psi, scores, 1.0);
  const VarFit fit({Matrix::Constant(1, 1, 0.5)}, Vector(), Matrix::Zero(2, 1), false);
  const FfmModel model(r, std::nullopt, fit, FfmConfig{}, {}, {});
  const ForecastResult fc = forecast(model, 2);
  EXPECT_LT((fc.curves.row(1).transpose() - (mu + psi)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Forecast, RecursionOracle) {
  std::mt19937_64 rng(56);
  const FunctionalSample s = random_sample(rng, 80, 25);
  FfmConfig c;
  c.fixed = Selection{3, 2};
  const FfmModel model = fit_ffm(s, c);
  const ForecastResult fc = forecast(model, 5);
  const Matrix sc = model.fpca().scores().leftCols(3);
  Vector f1 = sc.row(79).transpose(), f2 = sc.row(78).transpose();
  for (int k = 0; k < 5; ++k) {
    const Vector next = model.var_fit().lags()[0] * f1 + model.var_fit().lags()[1] * f2;
    const Vector curve = model.fpca().mean() + model.fpca().eigenfunctions().leftCols(3) * next;
    EXPECT_LT((fc.curves.row(k).transpose() - curve).cwiseAbs().maxCoeff(), 1e-12);
    f2 = f1;
    f1 = next;
  }
}

TEST(Forecast, SignFlipsDoNotMatter) {
  std::mt19937_64 rng(57);
  const FunctionalSample s = random_sample(rng, 60, 20);
  const FpcaResult r = fpca(s, 4);
  FfmConfig c;
  c.fixed = Selection{4, 2};
  const FfmModel a = fit_ffm(r, c);
  const std::vector<int> signs{-1, 1, -1, -1};
  const FfmModel b = fit_ffm(r.with_signs(signs), c);
  EXPECT_LT((fitted_curves(a).values() - fitted_curves(b).values()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((forecast(a, 6).curves - forecast(b, 6).curves).cwiseAbs().maxCoeff(), 1e-10);
}

// ---------------------------------------------------------------------------
// Dynamic Nelson-Siegel

TEST(DnsLoadings, LimitsAtZero) {
  const std::vector<double> r{0.0, 1e-9};
  const Matrix l = dns_loadings(kDnsDefaultLambda, r);
  EXPECT_EQ(l(0, 1), 1.0);
  EXPECT_EQ(l(0, 2), 0.0);
  EXPECT_NEAR(l(1, 1), 1.0, 1e-10);
  EXPECT_NEAR(l(1, 2), 0.0, 1e-10);
}

TEST(DnsLoadings, ThirtyMonths) {
  const std::vector<double> r{30.0};
  const Matrix l = dns_loadings(0.0609, r);
  const double x = 0.0609 * 30;
  EXPECT_NEAR(l(0, 1), (1 - std::exp(-x)) / x, 1e-15);
  EXPECT_NEAR(l(0, 1), 0.4593, 1e-4);
  EXPECT_NEAR(l(0, 2), 0.2984, 1e-4);
}

TEST(DnsLoadings, CurvatureArgmaxNearThirty) {
  std::vector<double> r;
  for (int m = 1; m <= 360; ++m) r.push_back(m);
  const Matrix l = dns_loadings(0.0609, r);
  Eigen::Index arg = 0;
  l.col(2).maxCoeff(&arg);
  EXPECT_LE(std::abs(r[static_cast<std::size_t>(arg)] - 30.0), 1.0);
}

TEST(FitDns, ExactRecovery) {
  std::mt19937_64 rng(58);
  const std::vector<double> mats{3, 6, 12, 24, 36, 60, 84, 120, 240, 360};
  const Matrix beta = random_matrix(rng, 20, 3);
  const Matrix table = beta * dns_loadings(kDnsDefaultLambda, mats).transpose();
  const Matrix est = dns_factors(DiscretePanel(mats, table), kDnsDefaultLambda);
  EXPECT_LT((est - beta).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(FitDns, ConstantCurveIsLevelOnly) {
  const std::vector<double> mats{1, 3, 12, 60, 120};
  const Matrix table = Matrix::Constant(3, 5, 4.2);
  const Matrix est = dns_factors(DiscretePanel(mats, table), kDnsDefaultLambda);
  for (int t = 0; t < 3; ++t) {
    EXPECT_NEAR(est(t, 0), 4.2, 1e-12);
    EXPECT_NEAR(est(t, 1), 0.0, 1e-10);
    EXPECT_NEAR(est(t, 2), 0.0, 1e-10);
  }
}

TEST(FitDns, PerDateOlsOracleWithMissing) {
  std::mt19937_64 rng(59);
  const std::vector<double> mats{1, 3, 6, 12, 24, 36, 60, 84, 120, 240, 360};
  Matrix table = random_matrix(rng, 8, 11);
  table(2, 4) = kMissing;
  table(5, 0) = kMissing;
  const DiscretePanel panel(mats, table);
  const Matrix est = dns_factors(panel, 0.05);
  for (std::size_t t = 0; t < 8; ++t) {
    const auto [xs, ys] = panel.observed(t);
    Matrix x(static_cast<Eigen::Index>(xs.size()), 3);
    Vector y(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double z = 0.05 * xs[i];
      x.row(static_cast<Eigen::Index>(i)) << 1.0, (1 - std::exp(-z)) / z, (1 - std::exp(-z)) / z - std::exp(-z);
      y(static_cast<Eigen::Index>(i)) = ys[i];
    }
    const Vector b = (x.transpose() * x).ldlt().solve(x.transpose() * y);
    EXPECT_LT((est.row(static_cast<Eigen::Index>(t)).transpose() - b).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(DnsForecast, ZeroDynamicsAndLevelHalving) {
  const std::vector<double> mats{3, 12, 60};
  const VarFit zero({Matrix::Zero(3, 3)}, Vector(), Matrix::Zero(5, 3), false);
  Matrix beta(2, 3);
  beta << 0.3, 0.2, 0.1,  //
      1.0, 0.0, 0.0;
  EXPECT_EQ(dns_forecast(DnsModel(0.06, mats, beta, zero), mats, 2), Matrix::Zero(2, 3));
  Matrix a = Matrix::Zero(3, 3);
  a(0, 0) = 0.5;
  a(1, 1) = 0.9;
  const VarFit half({a}, Vector(), Matrix::Zero(5, 3), true);
  const Matrix fc = dns_forecast(DnsModel(0.06, mats, beta, half), mats, 1);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(fc(0, i), 0.5, 1e-15);
}

TEST(DnsForecast, RecursionOracle) {
  std::mt19937_64 rng(60);
  const std::vector<double> mats{3, 6, 12, 24, 60, 120};
  Matrix beta(200, 3);
  beta.row(0) << 5, -1, 0.5;
  std::normal_distribution<double> z(0.0, 0.1);
  for (int t = 1; t < 200; ++t) {
    beta.row(t) << 0.5 + 0.9 * beta(t - 1, 0) + z(rng), 0.8 * beta(t - 1, 1) + z(rng), 0.7 * beta(t - 1, 2) + z(rng);
  }
  const Matrix table = beta * dns_loadings(0.0609, mats).transpose();
  const DnsModel model = fit_dns(DiscretePanel(mats, table));
  const Matrix fc = dns_forecast(model, mats, 4);
  Vector b = model.beta().row(199).transpose();
  const Matrix load = dns_loadings(0.0609, mats);
  for (int k = 0; k < 4; ++k) {
    b = model.dynamics().lags()[0] * b;
    EXPECT_LT((fc.row(k).transpose() - load * b).cwiseAbs().maxCoeff(), 1e-12);
  }
}

// The DNS curves span a 3-dimensional space; an FFM with three factors on
// the same panel can do no worse in-sample.
TEST(DnsNesting, FfmThreeFactorsFitAtLeastAsWell) {
  std::mt19937_64 rng(61);
  const std::vector<double> mats{3, 6, 9, 12, 18, 24, 36, 48, 60, 84, 120};
  const Matrix beta = random_matrix(rng, 120, 3);
  Matrix table = beta * dns_loadings(0.0609, mats).transpose() + random_matrix(rng, 120, 11, 0.05);
  const DiscretePanel panel(mats, table);
  const Grid grid(mats);
  const FunctionalSample s = panel_as_sample(panel);
  const FpcaResult r = fpca(s, 3);
  const Matrix ffm_fit = reconstruct(r, 3).values();
  const Matrix dns_fit = dns_factors(panel, 0.0609) * dns_loadings(0.0609, mats).transpose();
  const Vector w = grid.weight_vector();
  const double ffm_err = ((s.values() - ffm_fit).array().square().rowwise() * w.transpose().array()).sum();
  const double dns_err = ((s.values() - dns_fit).array().square().rowwise() * w.transpose().array()).sum();
  EXPECT_LE(ffm_err, dns_err * (1 + 1e-12));
}
