#ifndef RVAS_POWER_HPP
#define RVAS_POWER_HPP

// Burden-test statistics and power, plus the two design analyses: power
// versus cohort size at fixed depth (fixed design) and power versus depth
// with the cohort size set by the budget (fixed budget). The one-sided test
// rejects when the statistic exceeds the central t quantile; power is the
// noncentral t tail at that quantile with the statistic as noncentrality.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rvas/error.hpp"
#include "rvas/genotype.hpp"
#include "rvas/numerics.hpp"
#include "rvas/predictive.hpp"
#include "rvas/rng.hpp"
#include "rvas/seqmodel.hpp"
#include "rvas/simulate.hpp"

namespace rvas::power {

struct SampleSummary {
  double mean_per_individual = 0.0;
  double variance = 0.0;  // individual-level variance s^2 (s^2/M estimates Var of the mean)
  long group_size = 1;

  void validate() const {
    detail::require(mean_per_individual >= 0, "SampleSummary.mean must be >= 0");
    detail::require(variance >= 0, "SampleSummary.variance must be >= 0");
    detail::require(group_size >= 1, "SampleSummary.group_size must be >= 1");
  }
};

// Welch-Satterthwaite effective degrees of freedom (fourth powers in the
// denominator).
inline double welch_df(const SampleSummary& a, const SampleSummary& u) {
  a.validate();
  u.validate();
  if (a.variance == 0.0 && u.variance == 0.0)
    throw numeric_error("welch_df: both variances are 0");
  const double va = a.variance / static_cast<double>(a.group_size);
  const double vu = u.variance / static_cast<double>(u.group_size);
  auto quartic = [](const SampleSummary& s) {
    const double m = static_cast<double>(s.group_size);
    const double denom = m * m * std::max(m - 1.0, 1.0);
    return s.variance * s.variance / denom;
  };
  return (va + vu) * (va + vu) / (quartic(a) + quartic(u));
}

// Two-sample burden statistic: scaled excess of per-individual counts.
inline double t_statistic(const SampleSummary& a, const SampleSummary& u) {
  a.validate();
  u.validate();
  const double denom = std::sqrt(a.variance / static_cast<double>(a.group_size) +
                                 u.variance / static_cast<double>(u.group_size));
  if (denom == 0.0) throw numeric_error("t_statistic: zero denominator");
  return (a.mean_per_individual - u.mean_per_individual) / denom;
}

// Model-based statistic: Poisson k-ton means with mean-equals-variance.
inline double model_based_t(const predict::PriorParams& prior_a,
                            const predict::PriorParams& prior_u, long m_a, long m_u, long k,
                            sim::KtonMode mode, double phi,
                            const numerics::Tolerance& tol = numerics::Tolerance{}) {
  detail::require(k >= 1 && k <= std::min(m_a, m_u), "model_based_t: k must lie in [1, min(M)]");
  auto expected = [&](const predict::PriorParams& p, long m) {
    return mode == sim::KtonMode::exact
               ? predict::gamma_k(p, 0, m, k, 1.0, phi, tol).expected_count
               : predict::cumulative_gamma_k(p, 0, m, k, 1.0, phi, tol);
  };
  const double ga = expected(prior_a, m_a);
  const double gu = expected(prior_u, m_u);
  if (ga == 0.0 && gu == 0.0) throw numeric_error("model_based_t: both expected counts are 0");
  const double ma = static_cast<double>(m_a), mu = static_cast<double>(m_u);
  return (ga / ma - gu / mu) / std::sqrt(ga / (ma * ma) + gu / (mu * mu));
}

// One-sided power at the given significance: P(X > t_{1-alpha}(df)) for
// X noncentral t with noncentrality `statistic`.
inline double power_at(double statistic, double welch_df, double significance) {
  detail::require(welch_df > 0, "power_at: welch_df must be > 0");
  detail::require(significance > 0 && significance < 1, "power_at: significance must lie in (0,1)");
  const double crit = numerics::central_t_quantile(1.0 - significance, welch_df);
  return 1.0 - numerics::noncentral_t_cdf(crit, welch_df, statistic);
}

// --- design curves -----------------------------------------------------

struct AnalyticModel {
  predict::PriorParams affected;
  predict::PriorParams unaffected;
};

enum class VarianceMode { replicate, poisson };

struct McModel {
  sim::HierParams hier;
  long replicates = 200;
  rng::Stream stream{0};
  VarianceMode variance_mode = VarianceMode::replicate;
  int threads = 1;
};

using PowerModel = std::variant<AnalyticModel, McModel>;

// One evaluated design point: the statistic, Welch df and power together
// with the (depth, balanced per-group size) that produced them.
struct PowerResult {
  std::optional<double> budget;
  double depth = 0.0;
  long size = 0;  // per-group size (balanced design)
  double mean_a = 0.0, mean_u = 0.0;
  double var_a = 0.0, var_u = 0.0;
  double statistic = 0.0;
  double welch_df = 0.0;
  double significance = 0.05;
  double power = 0.0;
  bool degenerate = false;  // statistic undefined; power pinned to the level
};

struct CurveResult {
  std::vector<PowerResult> rows;
  std::vector<std::string> warnings;
  std::vector<double> truncation_bounds;  // per MC grid point, in row order
};

namespace detail_power {

inline PowerResult evaluate_summaries(const SampleSummary& a, const SampleSummary& u,
                                   double significance, double depth) {
  PowerResult row;
  row.depth = depth;
  row.size = a.group_size;
  row.mean_a = a.mean_per_individual;
  row.mean_u = u.mean_per_individual;
  row.var_a = a.variance;
  row.var_u = u.variance;
  if (a.variance == 0.0 && u.variance == 0.0) {
    row.degenerate = true;
    const double diff = a.mean_per_individual - u.mean_per_individual;
    row.statistic = 0.0;
    row.welch_df = 0.0;
    row.power = diff > 0 ? 1.0 : significance;
    row.significance = significance;
    return row;
  }
  row.statistic = t_statistic(a, u);
  row.welch_df = welch_df(a, u);
  row.significance = significance;
  row.power = power_at(row.statistic, row.welch_df, significance);
  return row;
}

// Analytic summaries: mean gamma/M and s^2 = gamma/M, so that s^2/M equals
// the Poisson squared standard error gamma/M^2 and t_statistic reproduces
// the model-based statistic exactly.
inline PowerResult analytic_point(const AnalyticModel& model, double depth, long m, long k,
                               sim::KtonMode mode, double phi, double significance) {
  auto expected = [&](const predict::PriorParams& p) {
    return mode == sim::KtonMode::exact
               ? predict::gamma_k(p, 0, m, k, 1.0, phi).expected_count
               : predict::cumulative_gamma_k(p, 0, m, k, 1.0, phi);
  };
  const double md = static_cast<double>(m);
  const double ga = expected(model.affected);
  const double gu = expected(model.unaffected);
  SampleSummary a{ga / md, ga / md, m};
  SampleSummary u{gu / md, gu / md, m};
  return evaluate_summaries(a, u, significance, depth);
}

inline SampleSummary from_mc(const sim::KtonSummary& s, long m, VarianceMode vmode) {
  // the across-replicate variance of the per-individual mean is the squared
  // standard error of the group mean; scale back to the individual level so
  // s^2 / M recovers it
  const double var = vmode == VarianceMode::replicate
                         ? s.variance * static_cast<double>(m)
                         : s.mean;  // Poisson plug-in: total-count variance = mean
  return SampleSummary{s.mean, var, m};
}

}  // namespace detail_power

// Power across a (depth x size) grid under a balanced design. Analytic mode
// uses the Poisson k-ton means; MC mode estimates the group summaries from
// hierarchical cohort simulation (and is the only mode supporting
// `exclusive`). Rows are ordered depth-ascending then size-ascending.
inline CurveResult fixed_design_curve(const PowerModel& model, const seq::SeqConfig& seq_base,
                                      const std::vector<double>& depths,
                                      const std::vector<long>& sizes, long k, sim::KtonMode mode,
                                      bool exclusive, double significance) {
  detail::require(!depths.empty() && !sizes.empty(), "fixed_design_curve: empty grid");
  detail::require(significance > 0 && significance < 1,
                  "fixed_design_curve: significance must lie in (0,1)");
  detail::require(k >= 1, "fixed_design_curve: k must be >= 1");
  if (std::holds_alternative<AnalyticModel>(model))
    detail::require(!exclusive, "fixed_design_curve: exclusive counts need the MC model");
  CurveResult out;
  long point = 0;
  for (double depth : depths) {
    const seq::SeqConfig cfg = seq_base.with_depth(depth);
    const double phi = seq::detection_prob(cfg);
    for (long m : sizes) {
      detail::require(m >= 1, "fixed_design_curve: sizes must be >= 1");
      detail::require(k <= m, "fixed_design_curve: k must be <= every size");
      PowerResult row;
      if (const auto* an = std::get_if<AnalyticModel>(&model)) {
        row = detail_power::analytic_point(*an, depth, m, k, mode, phi, significance);
      } else {
        const auto& mc = std::get<McModel>(model);
        detail::require(mc.hier.populations.size() == 2,
                        "fixed_design_curve: MC mode expects two populations");
        const std::vector<long> group_sizes{m, m};
        const sim::HierCohortSampler sampler(mc.hier, group_sizes, cfg);
        out.truncation_bounds.push_back(sampler.truncation_bound());
        const auto values = sim::mc_kton_values(
            sampler, group_sizes, std::vector<long>{k}, mode, exclusive, mc.replicates,
            mc.stream.child(static_cast<std::uint64_t>(point)), mc.threads);
        row = detail_power::evaluate_summaries(
            detail_power::from_mc(sim::summarize(values[0][0]), m, mc.variance_mode),
            detail_power::from_mc(sim::summarize(values[0][1]), m, mc.variance_mode), significance,
            depth);
      }
      if (row.degenerate)
        out.warnings.push_back("degenerate statistic at depth=" + std::to_string(depth) +
                               " size=" + std::to_string(m) + "; power pinned");
      out.rows.push_back(row);
      ++point;
    }
  }
  return out;
}

// Power versus depth under a fixed budget: the per-group size is the
// largest affordable at each depth; infeasible depths are skipped with a
// warning. Errors out if nothing on the grid is affordable.
inline CurveResult fixed_budget_curve(const PowerModel& model, const seq::SeqConfig& seq_base,
                                      double budget, const std::vector<double>& depth_grid,
                                      const seq::CostModel& cm, long k, sim::KtonMode mode,
                                      bool exclusive, double significance) {
  detail::require(!depth_grid.empty(), "fixed_budget_curve: empty depth grid");
  for (double d : depth_grid)
    detail::require(d > 0, "fixed_budget_curve: depths must be > 0");
  CurveResult out;
  long point = 0;
  for (double depth : depth_grid) {
    const long m = seq::max_samples_under_budget(budget, depth, cm, 2);
    if (m == 0 || m < k) {
      out.warnings.push_back("infeasible depth=" + std::to_string(depth) + " under budget " +
                             std::to_string(budget));
      ++point;
      continue;
    }
    auto shifted = model;
    if (auto* mc = std::get_if<McModel>(&shifted))
      mc->stream = mc->stream.child(static_cast<std::uint64_t>(point));
    CurveResult one = fixed_design_curve(shifted, seq_base, {depth}, {m}, k, mode, exclusive,
                                         significance);
    for (auto& r : one.rows) {
      r.budget = budget;
      out.rows.push_back(r);
    }
    for (auto& w : one.warnings) out.warnings.push_back(std::move(w));
    for (double b : one.truncation_bounds) out.truncation_bounds.push_back(b);
    ++point;
  }
  if (out.rows.empty())
    throw numeric_error("fixed_budget_curve: every depth on the grid is infeasible under budget " +
                        std::to_string(budget));
  return out;
}

// Grid point of maximum power; ties break toward the smaller depth (the
// larger cohort).
inline PowerResult optimize_depth(const std::vector<PowerResult>& curve) {
  if (curve.empty()) throw numeric_error("optimize_depth: empty curve");
  const PowerResult* best = &curve.front();
  for (const auto& row : curve) {
    if (row.power > best->power || (row.power == best->power && row.depth < best->depth))
      best = &row;
  }
  return *best;
}

// Default depth grid: 40 log-spaced points on [1, 100].
inline std::vector<double> default_depth_grid(double lo = 1.0, double hi = 100.0, int points = 40) {
  detail::require(lo > 0 && hi > lo && points >= 2, "default_depth_grid: bad range");
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i)
    g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
  return g;
}

}  // namespace rvas::power

#endif  // RVAS_POWER_HPP
