#include "support.hpp"

#include <gtest/gtest.h>

using namespace ffm;

TEST(Random, StreamsAreDistinctAndStable) {
  EXPECT_NE(stream_seed(1, 0), stream_seed(1, 1));
  EXPECT_NE(stream_seed(1, 0), stream_seed(2, 0));
  EXPECT_EQ(stream_seed(7, 3), stream_seed(7, 3));
  // SplitMix64 reference output for seed 0: first value of the generator.
  EXPECT_EQ(mix64(0x9e3779b97f4a7c15ULL), 0xe220a8397b1dcdafULL);
}

TEST(Simulate, ZeroErrorsGiveZeroSample) {
  SimSpec spec;
  spec.length = 50;
  spec.error_sd = Vector::Zero(10);
  EXPECT_EQ(simulate(spec).values(), Matrix::Zero(50, 51));
}

TEST(Simulate, SameSeedBitIdentical) {
  SimSpec spec;
  spec.length = 120;
  spec.seed = 9;
  EXPECT_EQ(simulate(spec).values(), simulate(spec).values());
  SimSpec other = spec;
  other.seed = 10;
  EXPECT_NE(simulate(spec).values(), simulate(other).values());
}

TEST(Simulate, CurvesAreBasisExpansion) {
  SimSpec spec;
  spec.length = 30;
  spec.model = model_m2();
  const Simulation sim = simulate_detailed(spec);
  Matrix coef(30, 10);
  coef.leftCols(2) = sim.factors;
  coef.rightCols(8) = sim.errors.rightCols(8);
  EXPECT_LT((sim.sample.values() - coef * fourier_basis(spec.grid, 10).transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Simulate, FourierBasisOrthonormalOnDefaultGrid) {
  const Grid g = make_grid(0, 1, kDefaultSimulationGridSize);
  const Matrix v = fourier_basis(g, 10);
  const Matrix gram = v.transpose() * g.weight_vector().asDiagonal() * v;
  EXPECT_LT((gram - Matrix::Identity(10, 10)).cwiseAbs().maxCoeff(), 1e-12);
}

// Long M1 run against the Yule-Walker moments of its VAR(1) matrix.
TEST(Simulate, LongRunMomentsMatchTheory) {
  SimSpec spec;
  spec.length = 100000;
  spec.seed = 3;
  const Simulation sim = simulate_detailed(spec);
  for (int l = 3; l < 10; ++l) {
    const Vector e = sim.errors.col(l);
    const double var = (e.array() - e.mean()).square().mean();
    const double expected = 1.0 / ((l + 1.0) * (l + 1.0));
    EXPECT_LT(std::abs(var - expected), 0.03 * expected) << "l = " << l + 1;
  }
  const Matrix a = model_m1().lags()[0];
  const Matrix gamma0 = stationary_state_covariance({a}, Vector(spec.error_sd.head(3).array().square()).asDiagonal());
  const Matrix gamma1 = a * gamma0;  // Cov(F_t, F_{t-1})
  const Vector s0 = gamma0.diagonal().cwiseSqrt();
  const Matrix rho = s0.cwiseInverse().asDiagonal() * gamma1 * s0.cwiseInverse().asDiagonal();

  const Matrix& f = sim.factors;
  const Matrix c = f.rowwise() - f.colwise().mean();
  const auto n = c.rows();
  const Matrix g1 = c.bottomRows(n - 1).transpose() * c.topRows(n - 1) / static_cast<double>(n);
  const Vector sd = (c.array().square().colwise().sum() / static_cast<double>(n)).sqrt().transpose();
  const Matrix rho_hat = sd.cwiseInverse().asDiagonal() * g1 * sd.cwiseInverse().asDiagonal();
  EXPECT_LT((rho_hat - rho).cwiseAbs().maxCoeff(), 0.02);
}

TEST(Simulate, LyapunovSolution) {
  const ModelSpec m = model_m3();
  const Matrix q = Vector(Vector::Constant(2, 0.7)).asDiagonal();
  const Matrix g = stationary_state_covariance(m.lags(), q);
  const Matrix c = companion_matrix(m.lags());
  Matrix qq = Matrix::Zero(8, 8);
  qq.topLeftCorner(2, 2) = q;
  EXPECT_LT((g - (c * g * c.transpose() + qq)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Simulate, RejectsBadSpecs) {
  Matrix a(1, 1);
  a << 1.1;
  EXPECT_THROW(ModelSpec("bad", {a}), ConfigError);
  EXPECT_THROW(model_by_name("M9"), ConfigError);
}

TEST(MonteCarlo, SingleReplicationIsTheError) {
  SimSpec spec;
  spec.length = 150;
  McOptions o;
  o.replications = 1;
  o.k_max = 4;
  o.p_max = 3;
  const McReport rep = monte_carlo(spec, o);
  SimSpec local = spec;
  local.seed = stream_seed(spec.seed, 0);
  const auto picks = select_on_sample(simulate(local), o);
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_EQ(rep.criteria[c].factors.bias, static_cast<double>(picks[c].factors) - 3.0);
    EXPECT_EQ(rep.criteria[c].lags.bias, static_cast<double>(picks[c].lags) - 1.0);
    EXPECT_EQ(rep.criteria[c].factors.rmse, std::abs(static_cast<double>(picks[c].factors) - 3.0));
  }
}

TEST(MonteCarlo, JobsDoNotChangeResults) {
  SimSpec spec;
  spec.length = 120;
  spec.model = model_m2();
  McOptions o;
  o.replications = 12;
  o.k_max = 4;
  o.p_max = 4;
  const McReport a = monte_carlo(spec, o);
  o.jobs = 4;
  const McReport b = monte_carlo(spec, o);
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_EQ(a.selections[c], b.selections[c]);
    EXPECT_EQ(a.criteria[c].frequencies, b.criteria[c].frequencies);
  }
  EXPECT_NEAR(a.criteria[0].frequencies.sum(), 1.0, 1e-15);
}

// ---------------------------------------------------------------------------
// Backtests

TEST(Rmsfe, HandArithmetic) {
  Matrix e(2, 1);
  e << 3, 4;
  EXPECT_DOUBLE_EQ(rmsfe(e), std::sqrt(25.0 / 2.0));
  Matrix m(2, 2);
  m << 3, kMissing, 4, kMissing;
  EXPECT_DOUBLE_EQ(rmsfe(m), std::sqrt(25.0 / 2.0));
}

// Noiseless DNS panel with VAR(1) factors: DNS forecasts are exact.
TEST(Backtest, PerfectForecastIsZero) {
  const std::vector<double> mats{3, 6, 12, 24, 60, 120};
  const double th = 0.3;
  Matrix a(3, 3);
  a << 0.99 * std::cos(th), -0.99 * std::sin(th), 0,  //
      0.99 * std::sin(th), 0.99 * std::cos(th), 0,    //
      0, 0, 0.95;
  Matrix beta(40, 3);
  beta.row(0) << 1.0, 0.5, -0.7;
  for (int t = 1; t < 40; ++t) beta.row(t) = (a * beta.row(t - 1).transpose()).transpose();
  const Matrix table = beta * dns_loadings(kDnsDefaultLambda, mats).transpose();
  BacktestOptions o;
  o.method = BacktestMethod::Dns;
  o.initial_window = 20;
  o.horizon = 2;
  const BacktestReport r = rolling_backtest(DiscretePanel(mats, table), Grid(mats), o);
  EXPECT_LT(r.rmsfe, 1e-9);
  EXPECT_EQ(r.origins.front(), 20u);
  EXPECT_EQ(r.origins.back(), 38u);
}

TEST(Backtest, ReportedRmsfeMatchesErrors) {
  SimSpec spec;
  spec.length = 150;
  spec.grid = make_grid(0, 1, 21);
  const FunctionalSample s = simulate(spec);
  BacktestOptions o;
  o.fixed = {3, 1};
  o.initial_window = 100;
  o.horizon = 3;
  const BacktestReport r = rolling_backtest(s, o);
  ASSERT_EQ(r.errors.rows(), 150 - 3 - 100 + 1);
  double sum = 0;
  int n = 0;
  for (Eigen::Index i = 0; i < r.errors.rows(); ++i) {
    for (Eigen::Index j = 0; j < r.errors.cols(); ++j) {
      sum += r.errors(i, j) * r.errors(i, j);
      ++n;
    }
  }
  EXPECT_NEAR(r.rmsfe, std::sqrt(sum / n), 1e-12);
  EXPECT_EQ(n, (150 - 3 - 100 + 1) * 21);
}

TEST(Backtest, ErrorsMatchStandaloneForecast) {
  SimSpec spec;
  spec.length = 130;
  spec.grid = make_grid(0, 1, 15);
  const FunctionalSample s = simulate(spec);
  BacktestOptions o;
  o.fixed = {2, 1};
  o.initial_window = 125;
  const BacktestReport r = rolling_backtest(s, o);
  FfmConfig c;
  c.fixed = Selection{2, 1};
  c.k_max = 2;
  const ForecastResult fc = forecast(fit_ffm(s.head(127), c), 1);
  const Vector expected = fc.curves.row(0).transpose() - s.values().row(127).transpose();
  EXPECT_LT((r.errors.row(2).transpose() - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Backtest, MissingRealizedCellsAreSkipped) {
  const std::vector<double> mats{3, 6, 12, 24, 60, 120};
  std::mt19937_64 rng(71);
  Matrix table = testing_support::random_matrix(rng, 30, 6);
  table(25, 2) = kMissing;
  BacktestOptions o;
  o.method = BacktestMethod::Dns;
  o.initial_window = 20;
  const BacktestReport r = rolling_backtest(DiscretePanel(mats, table), Grid(mats), o);
  int missing = 0;
  for (Eigen::Index i = 0; i < r.errors.rows(); ++i) missing += std::isnan(r.errors(i, 2)) ? 1 : 0;
  EXPECT_EQ(missing, 1);
  EXPECT_TRUE(std::isnan(r.errors(5, 2)));  // origin 25 forecasts row index 25
}

TEST(Backtest, CriterionMethodAndParallelAgree) {
  SimSpec spec;
  spec.length = 140;
  spec.grid = make_grid(0, 1, 21);
  const FunctionalSample s = simulate(spec);
  BacktestOptions o;
  o.method = BacktestMethod::FfmCriterion;
  o.k_max = 4;
  o.p_max = 3;
  const BacktestReport a = rolling_backtest(s, o);
  o.jobs = 3;
  const BacktestReport b = rolling_backtest(s, o);
  EXPECT_EQ(a.rmsfe, b.rmsfe);
  EXPECT_EQ(a.selections, b.selections);
}
