#ifndef FFM_SIMULATE_HPP
#define FFM_SIMULATE_HPP

/** @file
 * Simulation of curve time series driven by a VAR(p) factor process:
 *
 *   Y_t(r) = sum_{l <= K} F_{l,t} v_l(r) + sum_{l = K+1}^{10} e_{l,t} v_l(r),
 *
 * with Fourier functions v_1 = 1, v_{2j} = sqrt(2) sin(2 j pi r),
 * v_{2j+1} = sqrt(2) cos(2 j pi r), independent e_t ~ N(0, diag(1, 2^-2, ...,
 * 10^-2)) and F_t = A_1 F_{t-1} + ... + A_p F_{t-p} + (e_{1,t}, ..., e_{K,t})'.
 */

#include "ffm/core.hpp"
#include "ffm/random.hpp"
#include "ffm/var.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace ffm {

inline constexpr std::size_t kBasisSize = 10;
inline constexpr std::size_t kDefaultBurnIn = 200;
inline constexpr std::size_t kDefaultSimulationGridSize = 51;

/// Factor dynamics of a simulation model.
class ModelSpec {
 public:
  ModelSpec(std::string name, std::vector<Matrix> lags) : name_(std::move(name)), lags_(std::move(lags)) {
    if (lags_.empty()) {
      throw ConfigError("model needs at least one lag matrix");
    }
    const auto k = lags_.front().rows();
    if (k < 1 || static_cast<std::size_t>(k) > kBasisSize) {
      throw ConfigError(detail::concat("model needs 1..", kBasisSize, " factors"));
    }
    for (const auto& a : lags_) {
      if (a.rows() != k || a.cols() != k) {
        throw ConfigError("model lag matrices must be K x K");
      }
    }
    radius_ = companion_spectral_radius(lags_);
    if (!(radius_ < 1.0)) {
      throw ConfigError(detail::concat("model '", name_, "' is not stationary (companion radius ",
                                       radius_, ")"));
    }
  }

  const std::string& name() const noexcept { return name_; }
  std::size_t factors() const noexcept { return static_cast<std::size_t>(lags_.front().rows()); }
  std::size_t order() const noexcept { return lags_.size(); }
  const std::vector<Matrix>& lags() const noexcept { return lags_; }
  double companion_radius() const noexcept { return radius_; }

 private:
  std::string name_;
  std::vector<Matrix> lags_;
  double radius_ = 0.0;
};

/// Monte Carlo designs M1-M4.
inline ModelSpec model_m1() {
  Matrix a(3, 3);
  a << -0.05, -0.23, 0.76,  //
      0.80, -0.05, 0.04,    //
      0.04, 0.76, 0.23;
  return ModelSpec("M1", {a});
}

inline ModelSpec model_m2() {
  Matrix a1(2, 2), a2(2, 2);
  a1 << 0.8, -0.8,  //
      0.1, -0.5;
  a2 << -0.3, -0.3,  //
      -0.2, 0.3;
  return ModelSpec("M2", {a1, a2});
}

inline ModelSpec model_m3() {
  Matrix a1(2, 2), a2(2, 2), a3(2, 2), a4(2, 2);
  a1 << 0.4, -0.2,  //
      0.0, 0.3;
  a2 << -0.1, -0.1,  //
      0.0, -0.1;
  a3 << 0.15, 0.15,  //
      0.00, 0.15;
  a4 << 0.3, -0.4,  //
      0.0, 0.6;
  return ModelSpec("M3", {a1, a2, a3, a4});
}

inline ModelSpec model_m4() {
  Matrix a1(1, 1), a2 = Matrix::Zero(1, 1), a3 = Matrix::Zero(1, 1), a4(1, 1);
  a1 << 0.2;
  a4 << 0.7;
  return ModelSpec("M4", {a1, a2, a3, a4});
}

inline ModelSpec model_by_name(std::string_view name) {
  if (name == "M1" || name == "m1") return model_m1();
  if (name == "M2" || name == "m2") return model_m2();
  if (name == "M3" || name == "m3") return model_m3();
  if (name == "M4" || name == "m4") return model_m4();
  throw ConfigError(detail::concat("unknown model '", name, "' (expected M1, M2, M3 or M4)"));
}

/// Standard deviations 1, 1/2, ..., 1/10 of e_{1..10}.
inline Vector default_error_sd() {
  Vector sd(static_cast<Eigen::Index>(kBasisSize));
  for (Eigen::Index l = 0; l < sd.size(); ++l) {
    sd(l) = 1.0 / static_cast<double>(l + 1);
  }
  return sd;
}

struct SimSpec {
  ModelSpec model = model_m1();
  std::size_t length = 500;
  Grid grid = make_grid(0.0, 1.0, kDefaultSimulationGridSize);
  std::uint64_t seed = 1;
  std::size_t burn_in = kDefaultBurnIn;
  Vector error_sd = default_error_sd();
};

/// N x count matrix of v_1..v_count on the grid.
inline Matrix fourier_basis(const Grid& grid, std::size_t count) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Matrix v(n, static_cast<Eigen::Index>(count));
  const double root2 = std::numbers::sqrt2;
  const double two_pi = 2.0 * std::numbers::pi;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = grid.points()[static_cast<std::size_t>(i)];
    for (std::size_t l = 1; l <= count; ++l) {
      const auto c = static_cast<Eigen::Index>(l - 1);
      if (l == 1) {
        v(i, c) = 1.0;
      } else if (l % 2 == 0) {
        v(i, c) = root2 * std::sin(two_pi * static_cast<double>(l / 2) * r);
      } else {
        v(i, c) = root2 * std::cos(two_pi * static_cast<double>(l / 2) * r);
      }
    }
  }
  return v;
}

struct Simulation {
  FunctionalSample sample;
  Matrix factors;  ///< T x K
  Matrix errors;   ///< T x 10, including the innovations e_{1..K}
};

inline Simulation simulate_detailed(const SimSpec& spec) {
  if (spec.length < 2) {
    throw ConfigError("simulation length must be >= 2");
  }
  if (static_cast<std::size_t>(spec.error_sd.size()) != kBasisSize) {
    throw ConfigError(detail::concat("error_sd must have ", kBasisSize, " entries"));
  }
  const auto k = static_cast<Eigen::Index>(spec.model.factors());
  const auto p = static_cast<Eigen::Index>(spec.model.order());
  const auto total = static_cast<Eigen::Index>(spec.burn_in + spec.length);
  const auto t_len = static_cast<Eigen::Index>(spec.length);
  const auto basis = static_cast<Eigen::Index>(kBasisSize);

  Engine engine = make_engine(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Zero initial state for the p pre-sample periods.
  Matrix f = Matrix::Zero(total + p, k);
  Matrix e(total, basis);
  for (Eigen::Index t = 0; t < total; ++t) {
    for (Eigen::Index l = 0; l < basis; ++l) {
      e(t, l) = spec.error_sd(l) * normal(engine);
    }
    Vector next = e.row(t).head(k).transpose();
    for (Eigen::Index i = 0; i < p; ++i) {
      next.noalias() += spec.model.lags()[static_cast<std::size_t>(i)] * f.row(t + p - 1 - i).transpose();
    }
    f.row(t + p) = next.transpose();
  }

  Matrix factors = f.bottomRows(t_len);
  Matrix errors = e.bottomRows(t_len);
  Matrix coef(t_len, basis);
  coef.leftCols(k) = factors;
  coef.rightCols(basis - k) = errors.rightCols(basis - k);
  Matrix values = coef * fourier_basis(spec.grid, kBasisSize).transpose();
  return {FunctionalSample(spec.grid, std::move(values)), std::move(factors), std::move(errors)};
}

inline FunctionalSample simulate(const SimSpec& spec) { return simulate_detailed(spec).sample; }

/// Stationary covariance of the stacked state (F_t', ..., F_{t-p+1}')',
/// solving Gamma = C Gamma C' + Q for the companion matrix C.
inline Matrix stationary_state_covariance(const std::vector<Matrix>& lags, const Matrix& sigma_eta) {
  const Matrix c = companion_matrix(lags);
  const auto n = c.rows();
  const auto k = sigma_eta.rows();
  Matrix q = Matrix::Zero(n, n);
  q.topLeftCorner(k, k) = sigma_eta;
  Matrix kron(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      kron.block(i * n, j * n, n, n) = c(i, j) * c;
    }
  }
  const Matrix lhs = Matrix::Identity(n * n, n * n) - kron;
  const Vector vec_q = Eigen::Map<const Vector>(q.data(), n * n);
  const Vector vec_g = lhs.partialPivLu().solve(vec_q);
  Matrix gamma = Eigen::Map<const Matrix>(vec_g.data(), n, n);
  return 0.5 * (gamma + gamma.transpose());
}

/// Population eigenstructure of the factor block of a model: eigenvalues of
/// Var(F_t) in descending order and the K x K rotation U whose column l
/// gives psi_l = sum_k U(k, l) v_k.
struct PopulationFactors {
  Vector eigenvalues;
  Matrix rotation;
  Matrix factor_covariance;
};

inline PopulationFactors population_factors(const ModelSpec& model,
                                            const Vector& error_sd = default_error_sd()) {
  const auto k = static_cast<Eigen::Index>(model.factors());
  const Matrix sigma = error_sd.head(k).array().square().matrix().asDiagonal();
  const Matrix gamma = stationary_state_covariance(model.lags(), sigma);
  const Matrix cov = gamma.topLeftCorner(k, k);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  PopulationFactors out;
  out.factor_covariance = cov;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.rotation = solver.eigenvectors().rowwise().reverse();
  return out;
}

}  // namespace ffm

#endif  // FFM_SIMULATE_HPP
