#ifndef RVAS_SIMULATE_HPP
#define RVAS_SIMULATE_HPP

// Generative samplers for the three-parameter beta-Bernoulli model and its
// two-level hierarchical extension with Hardy-Weinberg diploid emissions.
//
// The non-hierarchical cohort sampler is the exact sequential (Indian
// buffet) scheme. The hierarchical sampler cannot truncate the shared
// frequency measure at practically interesting discount values without blowing up the
// atom count, so it samples the *visible* columns exactly instead:
// candidate atoms are drawn from the finite measure min(1, u(t))*levy(dt),
// where u(t) bounds the probability that an atom with shared frequency t
// is carried by anyone, and each candidate is accepted with the exact
// visibility ratio and emitted conditionally on being visible. Columns that
// would be all-zero everywhere are never materialized, which is also how
// they enter every downstream count.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "rvas/error.hpp"
#include "rvas/genotype.hpp"
#include "rvas/numerics.hpp"
#include "rvas/parallel.hpp"
#include "rvas/predictive.hpp"
#include "rvas/rng.hpp"
#include "rvas/seqmodel.hpp"

namespace rvas::sim {

using predict::PriorParams;

struct FrequencyMeasure {
  std::vector<double> atoms;          // frequencies in (0,1]
  double truncation_mass_bound = 0.0; // expected detectable variants lost to truncation

  void validate() const {
    for (double t : atoms)
      detail::require(t > 0 && t <= 1, "FrequencyMeasure: atoms must lie in (0,1]");
    detail::require(truncation_mass_bound >= 0, "FrequencyMeasure: bound must be >= 0");
  }
};

struct PopulationMix {
  double a = 100.0;
  double b = 100.0;
};

struct HierParams {
  PriorParams shared;
  std::vector<PopulationMix> populations;

  void validate() const {
    shared.validate();
    detail::require(!populations.empty(), "HierParams: at least one population");
    for (const auto& p : populations)
      detail::require(p.a > 0 && p.b > 0, "HierParams: population a, b must be > 0");
  }
};

inline std::array<double, 3> hwe_probs(double theta) {
  detail::require(theta >= 0 && theta <= 1, "hwe_probs: theta must lie in [0,1]");
  return {(1.0 - theta) * (1.0 - theta), 2.0 * theta * (1.0 - theta), theta * theta};
}

// Poisson mean of the number of new columns added by the row following
// n_prev existing rows in the sequential scheme; equals mass at n_prev = 0.
inline double ibp_new_dish_rate(const PriorParams& prior, long n_prev) {
  prior.validate();
  detail::require(n_prev >= 0, "ibp_new_dish_rate: n_prev must be >= 0");
  const double c = prior.concentration, s = prior.discount;
  const double n = static_cast<double>(n_prev);
  return prior.mass *
         std::exp(std::lgamma(1.0 + c) + std::lgamma(n + c + s) - std::lgamma(n + 1.0 + c) -
                  std::lgamma(c + s));
}

// Exact draw from the beta-Bernoulli model by the sequential marginal
// scheme: a new row revisits column l with probability (m_l - discount) /
// (rows_so_far + concentration) and opens Poisson-many new columns.
inline GenotypeMatrix sample_bernoulli_cohort(const PriorParams& prior, long n, rng::Stream stream,
                                              const std::string& population_id = "pop") {
  prior.validate();
  detail::require(n >= 1, "sample_bernoulli_cohort: n must be >= 1");
  std::vector<std::vector<long>> column_rows;  // carrier rows per column
  std::vector<long> counts;
  for (long r = 0; r < n; ++r) {
    const double denom = static_cast<double>(r) + prior.concentration;
    for (std::size_t l = 0; l < column_rows.size(); ++l) {
      const double p = (static_cast<double>(counts[l]) - prior.discount) / denom;
      if (stream.uniform() < p) {
        column_rows[l].push_back(r);
        ++counts[l];
      }
    }
    const long fresh = stream.poisson(ibp_new_dish_rate(prior, r));
    for (long f = 0; f < fresh; ++f) {
      column_rows.push_back({r});
      counts.push_back(1);
    }
  }
  GenotypeMatrix m(population_id, n, static_cast<long>(column_rows.size()), PloidyMode::binary);
  for (std::size_t l = 0; l < column_rows.size(); ++l)
    for (long r : column_rows[l]) m(r, static_cast<long>(l)) = 1;
  return m;
}

namespace detail_sim {

// Piecewise inverse-CDF tables for a weighted Levy density
// weight(t) * K * t^(-1-discount) * (1-t)^(conc+discount-1) on (lo, 1).
// Segment A covers (lo, 1/2] on a log-t grid; segment B covers [1/2, 1)
// after the substitution w = (1-t)^(conc+discount), which absorbs the
// (1-t) singularity exactly and reaches t = 1 with no cut.
struct LevyTable {
  std::vector<double> grid_a;  // log t
  std::vector<double> cum_a;
  std::vector<double> grid_b;  // w, descending in t
  std::vector<double> cum_b;   // continues cum_a
  double total = 0.0;
  double conc_plus_disc = 1.0;

  double sample(double u01) const {
    const double target = u01 * total;
    if (grid_a.size() >= 2 && target <= cum_a.back()) {
      const auto it = std::lower_bound(cum_a.begin(), cum_a.end(), target);
      std::size_t hi = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - cum_a.begin(), 1),
                                             cum_a.size() - 1);
      const double c0 = cum_a[hi - 1], c1 = cum_a[hi];
      const double fr = c1 > c0 ? (target - c0) / (c1 - c0) : 0.5;
      return std::exp(grid_a[hi - 1] + fr * (grid_a[hi] - grid_a[hi - 1]));
    }
    const auto it = std::lower_bound(cum_b.begin(), cum_b.end(), target);
    std::size_t hi =
        std::min<std::size_t>(std::max<std::ptrdiff_t>(it - cum_b.begin(), 1), cum_b.size() - 1);
    const double c0 = cum_b[hi - 1], c1 = cum_b[hi];
    const double fr = c1 > c0 ? (target - c0) / (c1 - c0) : 0.5;
    const double w = grid_b[hi - 1] + fr * (grid_b[hi] - grid_b[hi - 1]);
    const double t = 1.0 - std::pow(std::max(w, 0.0), 1.0 / conc_plus_disc);
    return std::clamp(t, 0.5, 1.0 - 1e-16);
  }
};

inline LevyTable build_levy_table(const PriorParams& prior, double lo,
                                  const std::function<double(double)>& weight, int na = 4096,
                                  int nb = 1024) {
  const double c = prior.concentration, s = prior.discount;
  const double knu =
      prior.mass * std::exp(std::lgamma(1.0 + c) - std::lgamma(1.0 - s) - std::lgamma(c + s));
  LevyTable tab;
  tab.conc_plus_disc = c + s;
  detail::require(lo > 0 && lo < 0.5, "levy table: lo must lie in (0, 0.5)");

  // segment A: y = log t, integrand knu * W(t) * t^(-s) * (1-t)^(c+s-1);
  // panel density scales with the log range so per-panel variation stays small
  const double y0 = std::log(lo), y1 = std::log(0.5);
  na = std::clamp(static_cast<int>((y1 - y0) * 96.0), na, 65536);
  tab.grid_a.resize(na + 1);
  tab.cum_a.resize(na + 1);
  auto fa = [&](double y) {
    const double t = std::exp(y);
    return knu * weight(t) * std::pow(t, -s) * std::pow(1.0 - t, c + s - 1.0);
  };
  double acc = 0.0;
  double prev = fa(y0);
  tab.grid_a[0] = y0;
  tab.cum_a[0] = 0.0;
  for (int i = 1; i <= na; ++i) {
    const double y = y0 + (y1 - y0) * i / na;
    const double cur = fa(y);
    acc += 0.5 * (prev + cur) * (y1 - y0) / na;
    tab.grid_a[i] = y;
    tab.cum_a[i] = acc;
    prev = cur;
  }

  // segment B: w = (1-t)^(c+s) from (1/2)^(c+s) down to 0, integrand
  // knu * W(t) * t^(-1-s) / (c+s); the (1-t) power cancels exactly.
  tab.grid_b.resize(nb + 1);
  tab.cum_b.resize(nb + 1);
  const double w_hi = std::pow(0.5, c + s);
  auto fb = [&](double w) {
    const double t = 1.0 - std::pow(w, 1.0 / (c + s));
    return knu * weight(t) * std::pow(std::max(t, 0.5), -1.0 - s) / (c + s);
  };
  double prevb = fb(w_hi);
  tab.grid_b[0] = w_hi;
  tab.cum_b[0] = acc;
  for (int i = 1; i <= nb; ++i) {
    const double w = w_hi * (1.0 - static_cast<double>(i) / nb);
    const double cur = fb(w);
    acc += 0.5 * (prevb + cur) * w_hi / nb;
    tab.grid_b[i] = w;
    tab.cum_b[i] = acc;
    prevb = cur;
  }
  tab.total = acc;
  return tab;
}

}  // namespace detail_sim

struct TruncationOptions {
  double mass_bound = 0.01;      // expected detectable variants allowed below the cut
  double atom_budget = 4.0e6;    // refuse truncations that need more atoms than this
};

// Finite draw from the shared three-parameter beta process, truncated so
// that the expected number of variants among `horizon` individuals carried
// by discarded atoms stays below the requested bound.
inline FrequencyMeasure sample_shared_measure(const PriorParams& prior, long horizon,
                                              rng::Stream stream,
                                              const TruncationOptions& opt = {}) {
  prior.validate();
  detail::require(horizon >= 1, "sample_shared_measure: horizon must be >= 1");
  detail::require(opt.mass_bound > 0 && opt.mass_bound <= 0.01,
                  "sample_shared_measure: mass bound must lie in (0, 0.01]");
  const double c = prior.concentration, s = prior.discount;
  const double knu =
      prior.mass * std::exp(std::lgamma(1.0 + c) - std::lgamma(1.0 - s) - std::lgamma(c + s));
  // expected carried-by-someone mass below eps:
  //   horizon * knu * Beta(1-s, c+s) * I_eps(1-s, c+s)
  const double lbeta = std::lgamma(1.0 - s) + std::lgamma(c + s) - std::lgamma(1.0 + c);
  const double scale = static_cast<double>(horizon) * knu * std::exp(lbeta);
  double target = opt.mass_bound / scale;
  double eps;
  if (target >= 1.0) {
    eps = 0.25;  // bound holds with a generous cut; keep atoms anyway
  } else {
    eps = boost::math::ibeta_inv(1.0 - s, c + s, target);
    eps = std::clamp(eps, 1e-300, 0.25);
  }
  const double achieved = scale * boost::math::ibeta(1.0 - s, c + s, eps);

  auto tab = detail_sim::build_levy_table(prior, eps, [](double) { return 1.0; });
  if (tab.total > opt.atom_budget)
    throw numeric_error("sample_shared_measure: truncation needs " + std::to_string(tab.total) +
                        " expected atoms, over the budget of " + std::to_string(opt.atom_budget));
  FrequencyMeasure fm;
  fm.truncation_mass_bound = achieved;
  const long count = stream.poisson(tab.total);
  fm.atoms.reserve(count);
  for (long i = 0; i < count; ++i) fm.atoms.push_back(tab.sample(stream.uniform()));
  return fm;
}

namespace detail_sim {

struct HierColumn {
  std::vector<std::vector<std::int8_t>> genotypes;  // per population, per row
  long first_pop = 0;
  long first_row = 0;
};

// E[theta_j | theta0] under Beta(a*theta0, b*(1-theta0)).
inline double pop_mean_freq(double a, double b, double theta0) {
  const double num = a * theta0;
  return num / (num + b * (1.0 - theta0));
}

// Fill one population's slice of a column given its variant-allele count:
// choose `alleles` distinct slots among 2*rows and pair consecutive slots
// into genotypes, which is the HWE multinomial conditioned on the count.
inline void place_alleles(std::vector<std::int8_t>& column, long rows, long alleles,
                          rng::Stream& stream) {
  column.assign(rows, 0);
  const long total_slots = 2 * rows;
  if (alleles <= 0) return;
  if (alleles >= total_slots) {
    column.assign(rows, 2);
    return;
  }
  if (alleles <= 16) {
    std::vector<long> chosen;
    chosen.reserve(alleles);
    while (static_cast<long>(chosen.size()) < alleles) {
      const long slot = static_cast<long>(stream.uniform_below(total_slots));
      if (std::find(chosen.begin(), chosen.end(), slot) == chosen.end()) chosen.push_back(slot);
    }
    for (long slot : chosen) ++column[slot / 2];
  } else {
    std::vector<long> idx(total_slots);
    std::iota(idx.begin(), idx.end(), 0);
    for (long i = 0; i < alleles; ++i) {
      const long j = i + static_cast<long>(stream.uniform_below(total_slots - i));
      std::swap(idx[i], idx[j]);
      ++column[idx[i] / 2];
    }
  }
}

}  // namespace detail_sim

// Joint cohort sampler for the hierarchical model: shared frequencies,
// per-population Beta-tilted frequencies, error-thinned Hardy-Weinberg
// genotypes. Matrices share the column index space; columns that carry no
// variant anywhere are dropped (they are exchangeable no-ops for every
// count statistic) and the rest are ordered by first appearance.
//
// Construction precomputes the candidate-intensity table for the design, so
// repeated replicate draws only pay for sampling. Each draw is exact:
//  - common-frequency candidates (visibility bound >= 1) simulate their
//    column outright and keep it when nonzero;
//  - rare-frequency candidates arrive at rate ubar(t0)*levy(t0) with
//    ubar = Sum_j A_j phi E[theta_j | t0]; the population frequencies are
//    drawn from the size-biased mixture Prod Beta * Sum_j A_j phi theta_j,
//    and the candidate is accepted with the closed-form ratio
//    (1 - Prod_j (1-phi theta_j)^(A_j)) / Sum_j A_j phi theta_j, which the
//    union bound keeps in [0,1]. Accepted columns are emitted conditional
//    on visibility (pattern over populations, then positive binomials).
class HierCohortSampler {
 public:
  HierCohortSampler(HierParams hp, std::vector<long> sizes, const seq::SeqConfig& cfg,
                    double grid_floor_mass = 1e-9)
      : hp_(std::move(hp)), sizes_(std::move(sizes)) {
    hp_.validate();
    cfg.validate();
    detail::require(sizes_.size() == hp_.populations.size(),
                    "sample_hier_cohorts: one size per population");
    for (long n : sizes_) detail::require(n >= 1, "sample_hier_cohorts: sizes must be >= 1");
    phi_ = seq::detection_prob(cfg);
    const std::size_t npop = sizes_.size();
    alleles_.resize(npop);
    for (std::size_t j = 0; j < npop; ++j) alleles_[j] = 2 * sizes_[j];
    if (phi_ == 0.0) return;  // nothing is ever called; empty table
    const auto& pri = hp_.shared;
    double c_sum = 0.0;
    for (std::size_t j = 0; j < npop; ++j)
      c_sum += static_cast<double>(alleles_[j]) * phi_ * (hp_.populations[j].a / hp_.populations[j].b);
    const double knu = pri.mass * std::exp(std::lgamma(1.0 + pri.concentration) -
                                           std::lgamma(1.0 - pri.discount) -
                                           std::lgamma(pri.concentration + pri.discount));
    const double one_ms = 1.0 - pri.discount;
    // grid floor: candidate mass below t_min is at most c_sum*knu*t_min^(1-s)/(1-s)
    double t_min =
        std::pow(grid_floor_mass * one_ms / std::max(c_sum * knu, 1e-300), 1.0 / one_ms);
    t_min = std::clamp(t_min, 1e-290, 1e-4);
    truncation_bound_ = c_sum * knu * std::pow(t_min, one_ms) / one_ms;
    if (truncation_bound_ > 1e-4)
      throw numeric_error(
          "sample_hier_cohorts: cannot reach the candidate grid floor (discount too close to 1)");
    table_ = detail_sim::build_levy_table(pri, t_min,
                                          [&](double t) { return std::min(1.0, ubar(t)); });
  }

  // Expected detectable variants lost to the table floor (near zero).
  double truncation_bound() const { return truncation_bound_; }

  std::vector<GenotypeMatrix> operator()(rng::Stream stream) const {
    const std::size_t npop = sizes_.size();
    std::vector<detail_sim::HierColumn> columns;
    if (phi_ == 0.0) return emit(columns);
    const long n_candidates = stream.poisson(table_.total);
    std::vector<double> freq(npop);
    std::vector<long> k_count(npop);
    for (long i = 0; i < n_candidates; ++i) {
      const double t0 = table_.sample(stream.uniform());
      const double u0 = ubar(t0);
      std::fill(k_count.begin(), k_count.end(), 0);
      bool any = false;
      if (u0 >= 1.0) {
        // common-variant region: simulate the column outright, keep if nonzero
        for (std::size_t j = 0; j < npop; ++j) {
          const double tj =
              stream.beta(hp_.populations[j].a * t0, hp_.populations[j].b * (1.0 - t0));
          k_count[j] = stream.binomial(alleles_[j], std::min(phi_ * tj, 1.0));
          any = any || k_count[j] > 0;
        }
        if (!any) continue;
      } else {
        // rare-variant region: size-biased frequency draw, closed-form accept
        double mix = stream.uniform() * u0;
        std::size_t biased = npop - 1;
        for (std::size_t j = 0; j < npop; ++j) {
          mix -= static_cast<double>(alleles_[j]) * phi_ *
                 detail_sim::pop_mean_freq(hp_.populations[j].a, hp_.populations[j].b, t0);
          if (mix < 0) {
            biased = j;
            break;
          }
        }
        double sum_rate = 0.0;
        double log_none = 0.0;
        for (std::size_t j = 0; j < npop; ++j) {
          const double shape1 = hp_.populations[j].a * t0 + (j == biased ? 1.0 : 0.0);
          freq[j] = stream.beta(shape1, hp_.populations[j].b * (1.0 - t0));
          sum_rate += static_cast<double>(alleles_[j]) * phi_ * freq[j];
          log_none += static_cast<double>(alleles_[j]) * std::log1p(-std::min(phi_ * freq[j], 1.0));
        }
        const double p_vis = -std::expm1(log_none);
        if (sum_rate <= 0.0 || stream.uniform() * sum_rate >= p_vis) continue;
        // visibility pattern over populations, conditioned on at least one
        std::vector<double> d(npop), suffix(npop + 1, 0.0);
        for (std::size_t j = npop; j-- > 0;) {
          d[j] = -std::expm1(static_cast<double>(alleles_[j]) *
                             std::log1p(-std::min(phi_ * freq[j], 1.0)));
          suffix[j] = 1.0 - (1.0 - d[j]) * (1.0 - suffix[j + 1]);
        }
        bool forced = true;
        for (std::size_t j = 0; j < npop; ++j) {
          double p_take = d[j];
          if (forced) {
            if (suffix[j] <= 0.0) continue;
            p_take = d[j] / suffix[j];
          }
          if (stream.uniform() < p_take) {
            forced = false;
            k_count[j] = stream.positive_binomial(alleles_[j], std::min(phi_ * freq[j], 1.0));
            any = true;
          }
        }
        if (!any) continue;  // conditioning forbids all-zero; guard regardless
      }
      detail_sim::HierColumn col;
      col.genotypes.resize(npop);
      long first_row = std::numeric_limits<long>::max();
      long first_pop = 0;
      for (std::size_t j = 0; j < npop; ++j) {
        detail_sim::place_alleles(col.genotypes[j], sizes_[j], k_count[j], stream);
        for (long r = 0; r < sizes_[j]; ++r) {
          if (col.genotypes[j][r] > 0) {
            if (r < first_row) {
              first_row = r;
              first_pop = static_cast<long>(j);
            }
            break;
          }
        }
      }
      col.first_row = first_row;
      col.first_pop = first_pop;
      columns.push_back(std::move(col));
    }
    return emit(columns);
  }

 private:
  double ubar(double t) const {
    double u = 0.0;
    for (std::size_t j = 0; j < sizes_.size(); ++j)
      u += static_cast<double>(alleles_[j]) * phi_ *
           detail_sim::pop_mean_freq(hp_.populations[j].a, hp_.populations[j].b, t);
    return u;
  }

  std::vector<GenotypeMatrix> emit(std::vector<detail_sim::HierColumn>& cols) const {
    const std::size_t npop = sizes_.size();
    std::vector<std::size_t> order(cols.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      if (cols[x].first_row != cols[y].first_row) return cols[x].first_row < cols[y].first_row;
      return cols[x].first_pop < cols[y].first_pop;
    });
    std::vector<GenotypeMatrix> out;
    out.reserve(npop);
    for (std::size_t j = 0; j < npop; ++j) {
      GenotypeMatrix m("pop" + std::to_string(j + 1), sizes_[j], static_cast<long>(cols.size()),
                       PloidyMode::diploid);
      for (std::size_t c = 0; c < order.size(); ++c) {
        const auto& col = cols[order[c]].genotypes[j];
        for (long r = 0; r < sizes_[j]; ++r) m(r, static_cast<long>(c)) = col[r];
      }
      out.push_back(std::move(m));
    }
    return out;
  }

  HierParams hp_;
  std::vector<long> sizes_;
  std::vector<long> alleles_;
  double phi_ = 0.0;
  double truncation_bound_ = 0.0;
  detail_sim::LevyTable table_;
};

inline std::vector<GenotypeMatrix> sample_hier_cohorts(const HierParams& hp,
                                                       const std::vector<long>& sizes,
                                                       const seq::SeqConfig& cfg,
                                                       rng::Stream stream) {
  return HierCohortSampler(hp, sizes, cfg)(std::move(stream));
}

// Reference implementation by plain truncation of the shared measure;
// feasible only when the discount is small. Kept as the independent oracle
// for the thinned sampler.
inline std::vector<GenotypeMatrix> sample_hier_cohorts_truncated(
    const HierParams& hp, const std::vector<long>& sizes, const seq::SeqConfig& cfg,
    rng::Stream stream, const TruncationOptions& trunc = {}) {
  hp.validate();
  cfg.validate();
  detail::require(sizes.size() == hp.populations.size(),
                  "sample_hier_cohorts_truncated: one size per population");
  const std::size_t npop = sizes.size();
  const double phi = seq::detection_prob(cfg);
  long horizon = 0;
  for (long n : sizes) horizon += 2 * n;  // allele-level exposure
  FrequencyMeasure fm = sample_shared_measure(hp.shared, std::max<long>(horizon, 1),
                                              stream.child(0), trunc);
  std::vector<detail_sim::HierColumn> columns;
  rng::Stream emission = stream.child(1);
  for (double t0 : fm.atoms) {
    detail_sim::HierColumn col;
    col.genotypes.resize(npop);
    bool any = false;
    long first_row = std::numeric_limits<long>::max();
    long first_pop = 0;
    for (std::size_t j = 0; j < npop; ++j) {
      const double tj = emission.beta(hp.populations[j].a * t0, hp.populations[j].b * (1.0 - t0));
      const double x = std::min(phi * tj, 1.0);
      col.genotypes[j].assign(sizes[j], 0);
      for (long r = 0; r < sizes[j]; ++r) {
        const long g = emission.binomial(2, x);
        col.genotypes[j][r] = static_cast<std::int8_t>(g);
        if (g > 0) {
          any = true;
          if (r < first_row) {
            first_row = r;
            first_pop = static_cast<long>(j);
          }
        }
      }
    }
    if (!any) continue;
    col.first_row = first_row;
    col.first_pop = first_pop;
    columns.push_back(std::move(col));
  }
  std::vector<std::size_t> order(columns.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (columns[x].first_row != columns[y].first_row)
      return columns[x].first_row < columns[y].first_row;
    return columns[x].first_pop < columns[y].first_pop;
  });
  std::vector<GenotypeMatrix> out;
  for (std::size_t j = 0; j < npop; ++j) {
    GenotypeMatrix m("pop" + std::to_string(j + 1), sizes[j], static_cast<long>(columns.size()),
                     PloidyMode::diploid);
    for (std::size_t c = 0; c < order.size(); ++c)
      for (long r = 0; r < sizes[j]; ++r) m(r, static_cast<long>(c)) = columns[order[c]].genotypes[j][r];
    out.push_back(std::move(m));
  }
  return out;
}

struct KtonSummary {
  double mean = 0.0;      // across-replicate mean of the per-individual count
  double variance = 0.0;  // across-replicate sample variance of that mean
  double se = 0.0;        // standard error of the mean
  long replicates = 0;
};

// Per-individual (exclusive) k-ton counts from repeated joint cohort draws.
// Values are indexed [k][population][replicate]; replicate r always derives
// stream.child(r), so any worker count produces the same tensor.
inline std::vector<std::vector<std::vector<double>>> mc_kton_values(
    const HierCohortSampler& sampler, const std::vector<long>& sizes, const std::vector<long>& ks,
    KtonMode mode, bool exclusive, long replicates, const rng::Stream& stream, int threads = 1) {
  detail::require(replicates >= 2, "mc_kton_values: replicates must be >= 2");
  detail::require(!ks.empty(), "mc_kton_values: at least one k");
  for (long k : ks) detail::require(k >= 1, "mc_kton_values: k must be >= 1");
  const std::size_t npop = sizes.size();
  std::vector<std::vector<std::vector<double>>> values(
      ks.size(), std::vector<std::vector<double>>(npop, std::vector<double>(replicates, 0.0)));
  parallel_for(replicates, threads, [&](long r) {
    auto cohorts = sampler(stream.child(static_cast<std::uint64_t>(r)));
    for (std::size_t j = 0; j < npop; ++j) {
      std::vector<const GenotypeMatrix*> others;
      if (exclusive)
        for (std::size_t o = 0; o < npop; ++o)
          if (o != j) others.push_back(&cohorts[o]);
      for (std::size_t ki = 0; ki < ks.size(); ++ki) {
        const long count = exclusive
                               ? count_exclusive_ktons(cohorts[j], others, ks[ki], mode)
                               : count_ktons(cohorts[j], ks[ki], mode);
        values[ki][j][r] = static_cast<double>(count) / static_cast<double>(sizes[j]);
      }
    }
  });
  return values;
}

inline std::vector<std::vector<std::vector<double>>> mc_kton_values(
    const HierParams& hp, const std::vector<long>& sizes, const seq::SeqConfig& cfg,
    const std::vector<long>& ks, KtonMode mode, bool exclusive, long replicates,
    const rng::Stream& stream, int threads = 1) {
  const HierCohortSampler sampler(hp, sizes, cfg);
  return mc_kton_values(sampler, sizes, ks, mode, exclusive, replicates, stream, threads);
}

inline KtonSummary summarize(const std::vector<double>& v) {
  KtonSummary s;
  s.replicates = static_cast<long>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  s.mean = mean;
  s.variance = v.size() > 1 ? ss / static_cast<double>(v.size() - 1) : 0.0;
  s.se = std::sqrt(s.variance / static_cast<double>(v.size()));
  return s;
}

// Monte Carlo mean/variance of the per-individual (exclusive) k-ton count,
// per population. [k][population].
inline std::vector<std::vector<KtonSummary>> mc_kton_summary(
    const HierParams& hp, const std::vector<long>& sizes, const seq::SeqConfig& cfg,
    const std::vector<long>& ks, KtonMode mode, bool exclusive, long replicates,
    const rng::Stream& stream, int threads = 1) {
  const auto values = mc_kton_values(hp, sizes, cfg, ks, mode, exclusive, replicates, stream, threads);
  std::vector<std::vector<KtonSummary>> out(values.size());
  for (std::size_t ki = 0; ki < values.size(); ++ki)
    for (const auto& pop : values[ki]) out[ki].push_back(summarize(pop));
  return out;
}

inline std::vector<KtonSummary> mc_kton_summary(const HierParams& hp, const std::vector<long>& sizes,
                                                const seq::SeqConfig& cfg, long k, KtonMode mode,
                                                bool exclusive, long replicates,
                                                const rng::Stream& stream, int threads = 1) {
  return mc_kton_summary(hp, sizes, cfg, std::vector<long>{k}, mode, exclusive, replicates, stream,
                         threads)[0];
}

}  // namespace rvas::sim

#endif  // RVAS_SIMULATE_HPP
