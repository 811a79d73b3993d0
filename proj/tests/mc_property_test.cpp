// Monte Carlo properties of the selection criteria at desk scale.

#include "support.hpp"

#include <gtest/gtest.h>

#include <map>

using namespace ffm;

namespace {

constexpr std::size_t kReps = 1000;
constexpr double kHitSlack = 0.03;

// One study per (model, T) with every criterion, shared by the tests below.
const McReport& study(const std::string& model, std::size_t t_len) {
  static std::map<std::pair<std::string, std::size_t>, McReport> cache;
  const auto key = std::pair{model, t_len};
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  SimSpec spec;
  spec.model = model_by_name(model);
  spec.length = t_len;
  spec.seed = 31 * t_len + static_cast<std::uint64_t>(model.back());
  McOptions o;
  o.replications = kReps;
  o.jobs = default_jobs();
  return cache.emplace(key, monte_carlo(spec, o)).first->second;
}

const std::vector<std::string> kModels{"M1", "M2", "M3", "M4"};
const std::vector<std::size_t> kLengths{100, 200, 500};

}  // namespace

TEST(McProperties, HitRateIncreasesWithSampleSize) {
  for (const auto& model : kModels) {
    for (Criterion c : {Criterion::Bic, Criterion::Hqc}) {
      double prev = -1;
      for (std::size_t t : kLengths) {
        const double hit = study(model, t).summary(c).hit_rate;
        EXPECT_GE(hit, prev - kHitSlack) << model << " " << to_string(c) << " T=" << t;
        prev = hit;
      }
    }
  }
}

TEST(McProperties, BicNoWorseThanFfpe) {
  for (const auto& model : kModels) {
    for (std::size_t t : kLengths) {
      const McReport& r = study(model, t);
      const auto& bic = r.summary(Criterion::Bic);
      const auto& ffpe = r.summary(Criterion::Ffpe);
      EXPECT_LE(bic.factors.rmse, ffpe.factors.rmse + 0.05) << model << " T=" << t;
      EXPECT_LE(bic.lags.rmse, ffpe.lags.rmse + 0.05) << model << " T=" << t;
    }
  }
}

TEST(McProperties, FfpeOverselects) {
  const McReport& m1 = study("M1", 200);
  EXPECT_GT(m1.summary(Criterion::Ffpe).factors.bias - m1.summary(Criterion::Bic).factors.bias, 0.1);
  const McReport& m4 = study("M4", 500);
  EXPECT_GT(m4.summary(Criterion::Ffpe).lags.bias, 1.0);
  EXPECT_LT(m4.summary(Criterion::Bic).lags.bias, 0.1);
}

// Past the true (K, p) the mean MSE stays flat up to 2%.
TEST(McProperties, MseFlatPastTruth) {
  constexpr std::size_t kFlatReps = 200;
  SimSpec spec;
  spec.length = 1000;
  std::vector<double> at_truth(kFlatReps), beyond(kFlatReps);
  parallel_for(kFlatReps, default_jobs(), [&](std::size_t r) {
    SimSpec local = spec;
    local.seed = stream_seed(99, r);
    const FpcaResult f = fpca(simulate(local), 4);
    at_truth[r] = mse_simplified(f, 3, 1);
    beyond[r] = mse_simplified(f, 4, 2);
  });
  double a = 0, b = 0;
  for (std::size_t r = 0; r < kFlatReps; ++r) {
    a += at_truth[r] / kFlatReps;
    b += beyond[r] / kFlatReps;
  }
  EXPECT_LE(b, a * 1.02);
}
