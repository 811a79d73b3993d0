#ifndef FFM_MONTE_CARLO_HPP
#define FFM_MONTE_CARLO_HPP

/** @file
 * Monte Carlo study of the joint (K, p) estimators: bias, RMSE and selection
 * frequencies per criterion.
 */

#include "ffm/fpca.hpp"
#include "ffm/parallel.hpp"
#include "ffm/random.hpp"
#include "ffm/selection.hpp"
#include "ffm/simulate.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace ffm {

struct EstimatorStats {
  double bias = 0.0;
  double rmse = 0.0;
};

struct CriterionSummary {
  Criterion criterion = Criterion::Bic;
  EstimatorStats factors;
  EstimatorStats lags;
  /// k_max x p_max; entry (J-1, m-1) = share of replications selecting (J, m).
  Matrix frequencies;
  /// Share of replications selecting the true (K, p).
  double hit_rate = 0.0;
};

struct McReport {
  std::string model;
  std::size_t length = 0;
  std::size_t replications = 0;
  std::size_t k_max = 0;
  std::size_t p_max = 0;
  std::size_t true_factors = 0;
  std::size_t true_lags = 0;
  std::vector<CriterionSummary> criteria;
  /// selections[c][r] is the choice of criteria[c] in replication r.
  std::vector<std::vector<Selection>> selections;

  const CriterionSummary& summary(Criterion c) const {
    for (const auto& s : criteria) {
      if (s.criterion == c) {
        return s;
      }
    }
    throw ConfigError(detail::concat("criterion ", to_string(c), " was not part of the study"));
  }
};

struct McOptions {
  std::size_t replications = 1000;
  std::size_t k_max = 8;
  std::size_t p_max = 8;
  std::vector<Criterion> criteria{kAllCriteria.begin(), kAllCriteria.end()};
  bool restricted = false;
  std::size_t jobs = 1;
};

/// Selection made by every requested criterion on one simulated sample.
inline std::vector<Selection> select_on_sample(const FunctionalSample& sample, const McOptions& options) {
  const FpcaResult result = fpca(sample, options.k_max);
  const std::size_t k_max = std::min(options.k_max, result.components());
  const SelectionGrid grid =
      criterion_grid(result, k_max, options.p_max, {.restricted = options.restricted});
  std::vector<Selection> out;
  out.reserve(options.criteria.size());
  for (Criterion c : options.criteria) {
    out.push_back(grid.chosen(c));
  }
  return out;
}

/// Replication r simulates with seed stream_seed(spec.seed, r), so the report
/// does not depend on `jobs`.
inline McReport monte_carlo(const SimSpec& spec, const McOptions& options) {
  if (options.replications < 1) {
    throw ConfigError("monte carlo needs at least one replication");
  }
  if (options.criteria.empty()) {
    throw ConfigError("monte carlo needs at least one criterion");
  }
  const std::size_t reps = options.replications;
  std::vector<std::vector<Selection>> per_rep(reps);
  parallel_for(reps, options.jobs, [&](std::size_t r) {
    SimSpec local = spec;
    local.seed = stream_seed(spec.seed, r);
    per_rep[r] = select_on_sample(simulate(local), options);
  });

  McReport report;
  report.model = spec.model.name();
  report.length = spec.length;
  report.replications = reps;
  report.k_max = options.k_max;
  report.p_max = options.p_max;
  report.true_factors = spec.model.factors();
  report.true_lags = spec.model.order();
  const double k_true = static_cast<double>(report.true_factors);
  const double p_true = static_cast<double>(report.true_lags);
  const double n = static_cast<double>(reps);

  for (std::size_t c = 0; c < options.criteria.size(); ++c) {
    CriterionSummary s;
    s.criterion = options.criteria[c];
    s.frequencies = Matrix::Zero(static_cast<Eigen::Index>(options.k_max),
                                 static_cast<Eigen::Index>(options.p_max));
    double dk = 0, dk2 = 0, dp = 0, dp2 = 0, hits = 0;
    std::vector<Selection> picks(reps);
    for (std::size_t r = 0; r < reps; ++r) {
      const Selection sel = per_rep[r][c];
      picks[r] = sel;
      const double ek = static_cast<double>(sel.factors) - k_true;
      const double ep = static_cast<double>(sel.lags) - p_true;
      dk += ek;
      dk2 += ek * ek;
      dp += ep;
      dp2 += ep * ep;
      hits += (sel.factors == report.true_factors && sel.lags == report.true_lags) ? 1.0 : 0.0;
      s.frequencies(static_cast<Eigen::Index>(sel.factors - 1),
                    static_cast<Eigen::Index>(sel.lags - 1)) += 1.0;
    }
    s.frequencies /= n;
    s.factors = {dk / n, std::sqrt(dk2 / n)};
    s.lags = {dp / n, std::sqrt(dp2 / n)};
    s.hit_rate = hits / n;
    report.criteria.push_back(std::move(s));
    report.selections.push_back(std::move(picks));
  }
  return report;
}

}  // namespace ffm

#endif  // FFM_MONTE_CARLO_HPP
