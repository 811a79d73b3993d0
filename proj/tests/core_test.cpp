#include "support.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace ffm;
using testing_support::random_matrix;

TEST(Grid, ThreePointTrapezoid) {
  const Grid g = make_grid(0, 1, 3);
  EXPECT_EQ(g.points(), (std::vector<double>{0, 0.5, 1}));
  EXPECT_EQ(g.weights(), (std::vector<double>{0.25, 0.5, 0.25}));
}

TEST(Grid, EndpointOnly) {
  EXPECT_EQ(make_grid(0, 1, 2).weights(), (std::vector<double>{0.5, 0.5}));
}

TEST(Grid, WeightSumIsLength) {
  const Grid g = make_grid(3, 120, 118);
  double s = 0;
  for (double w : g.weights()) s += w;
  EXPECT_DOUBLE_EQ(s, 117.0);
  EXPECT_TRUE(g.is_uniform());
}

TEST(Grid, WeightsPositiveOnIrregularPoints) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> pts{0.0};
    for (int i = 0; i < 30; ++i) pts.push_back(pts.back() + u(rng));
    const Grid g(pts);
    double s = 0;
    for (double w : g.weights()) {
      EXPECT_GT(w, 0);
      s += w;
    }
    EXPECT_NEAR(s, pts.back() - pts.front(), 1e-12 * pts.back());
  }
}

TEST(Grid, RejectsBadPoints) {
  EXPECT_THROW(Grid({0.0}), ConfigError);
  EXPECT_THROW(Grid({0.0, 0.0, 1.0}), ConfigError);
  EXPECT_THROW(Grid({0.0, std::nan(""), 1.0}), ConfigError);
  EXPECT_THROW(make_grid(1, 0, 5), ConfigError);
}

TEST(InnerProduct, Constants) {
  const Grid g = make_grid(0, 1, 11);
  EXPECT_DOUBLE_EQ(inner_product(g, Vector::Ones(11), Vector::Ones(11)), 1.0);
}

TEST(InnerProduct, LinearIntegrandIsExact) {
  const Grid g = make_grid(0, 1, 101);
  EXPECT_NEAR(inner_product(g, Vector::Ones(101), g.point_vector()), 0.5, 1e-15);
}

TEST(InnerProduct, FourierPairOrthogonal) {
  const Grid g = make_grid(0, 1, 401);
  Vector s(401), c(401);
  for (int i = 0; i < 401; ++i) {
    const double r = g.points()[static_cast<std::size_t>(i)];
    s(i) = std::numbers::sqrt2 * std::sin(2 * std::numbers::pi * r);
    c(i) = std::numbers::sqrt2 * std::cos(2 * std::numbers::pi * r);
  }
  EXPECT_NEAR(inner_product(g, s, c), 0.0, 1e-10);
  // Unit norm: the trapezoid rule is exact for trigonometric polynomials of
  // low degree on a full period.
  EXPECT_NEAR(inner_product(g, s, s), 1.0, 1e-10);
}

TEST(InnerProduct, GridMismatchRejected) {
  const Curve a(make_grid(0, 1, 5), Vector::Ones(5));
  const Curve b(make_grid(0, 2, 5), Vector::Ones(5));
  EXPECT_THROW(inner_product(a, b), DataError);
}

TEST(InnerProduct, SymmetricBilinear) {
  std::mt19937_64 rng(1);
  const Grid g = make_grid(-1, 2, 37);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix m = random_matrix(rng, 37, 3);
    const Vector x = m.col(0), y = m.col(1), z = m.col(2);
    EXPECT_NEAR(inner_product(g, x, y), inner_product(g, y, x), 1e-14);
    EXPECT_NEAR(inner_product(g, 2 * x + y, z), 2 * inner_product(g, x, z) + inner_product(g, y, z),
                1e-12);
    EXPECT_GE(inner_product(g, x, x), 0);
  }
}

TEST(Panel, ObservedSkipsMissing) {
  Matrix table(1, 4);
  table << 1, kMissing, 3, 4;
  const DiscretePanel p({1, 2, 3, 4}, table);
  const auto [xs, ys] = p.observed(0);
  EXPECT_EQ(xs, (std::vector<double>{1, 3, 4}));
  EXPECT_EQ(ys, (std::vector<double>{1, 3, 4}));
}

TEST(Sample, RejectsNonFinite) {
  Matrix v = Matrix::Zero(2, 3);
  v(1, 1) = std::nan("");
  EXPECT_THROW(FunctionalSample(make_grid(0, 1, 3), v), DataError);
}
