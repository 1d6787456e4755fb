#ifndef RVAS_SEQMODEL_HPP
#define RVAS_SEQMODEL_HPP

// Sequencing-error model, variant-calling thinning and the sequencing cost
// model. A present variant is called when at least `call_threshold` of its
// Poisson(depth) reads survive the per-read error channel; marginally that
// is a Bernoulli(phi) keep with phi = P(Poisson(depth*(1-err)) >= D).

#include <cmath>

#include "rvas/error.hpp"
#include "rvas/genotype.hpp"
#include "rvas/numerics.hpp"
#include "rvas/rng.hpp"

namespace rvas::seq {

struct SeqConfig {
  double depth = 30.0;       // mean reads per locus
  long call_threshold = 30;  // reads required to call
  double err_rate = 0.05;    // per-read error probability

  void validate() const {
    detail::require(depth >= 0 && std::isfinite(depth), "SeqConfig.depth must be >= 0");
    detail::require(call_threshold >= 1, "SeqConfig.call_threshold must be >= 1");
    detail::require(err_rate >= 0 && err_rate < 1, "SeqConfig.err_rate must lie in [0,1)");
  }

  SeqConfig with_depth(double d) const {
    SeqConfig c = *this;
    c.depth = d;
    return c;
  }
};

struct CostModel {
  double fixed_cost = 0.0;       // library preparation
  double per_sample_rate = 1.0;  // cost per sample per unit depth

  void validate() const {
    detail::require(fixed_cost >= 0, "CostModel.fixed_cost must be >= 0");
    detail::require(per_sample_rate > 0, "CostModel.per_sample_rate must be > 0");
  }
};

inline double detection_prob(const SeqConfig& cfg) {
  cfg.validate();
  return numerics::poisson_sf(cfg.depth * (1.0 - cfg.err_rate), cfg.call_threshold);
}

// Marginal thinning: every nonzero entry survives independently with
// probability detection_prob(cfg), keeping its full genotype value.
inline sim::GenotypeMatrix thin_matrix(const sim::GenotypeMatrix& x, const SeqConfig& cfg,
                                       rng::Stream stream) {
  const double phi = detection_prob(cfg);
  sim::GenotypeMatrix z(x.population_id(), x.rows(), x.cols(), x.mode());
  for (long r = 0; r < x.rows(); ++r)
    for (long c = 0; c < x.cols(); ++c)
      if (x(r, c) > 0 && stream.uniform() < phi) z(r, c) = x(r, c);
  return z;
}

// Read-level thinning: simulates the error-free read count explicitly.
// Same law as thin_matrix; used to cross-check the marginal shortcut.
inline sim::GenotypeMatrix thin_matrix_by_reads(const sim::GenotypeMatrix& x, const SeqConfig& cfg,
                                                rng::Stream stream) {
  cfg.validate();
  sim::GenotypeMatrix z(x.population_id(), x.rows(), x.cols(), x.mode());
  for (long r = 0; r < x.rows(); ++r)
    for (long c = 0; c < x.cols(); ++c) {
      if (x(r, c) == 0) continue;
      const long reads = stream.poisson(cfg.depth);
      const long correct = stream.binomial(reads, 1.0 - cfg.err_rate);
      if (correct >= cfg.call_threshold) z(r, c) = x(r, c);
    }
  return z;
}

inline double cost(long total_samples, double depth, const CostModel& cm) {
  cm.validate();
  detail::require(total_samples >= 0, "cost: sample count must be >= 0");
  detail::require(depth >= 0, "cost: depth must be >= 0");
  return static_cast<double>(total_samples) * depth * cm.per_sample_rate + cm.fixed_cost;
}

// Largest per-group size m with cost(groups*m, depth) <= budget under a
// balanced design; 0 when no size is affordable.
inline long max_samples_under_budget(double budget, double depth, const CostModel& cm,
                                     long groups) {
  cm.validate();
  detail::require(groups >= 1, "max_samples_under_budget: groups must be >= 1");
  detail::require(depth > 0, "max_samples_under_budget: depth must be > 0");
  detail::require(budget > cm.fixed_cost, "max_samples_under_budget: budget must exceed fixed cost");
  const double unit = static_cast<double>(groups) * depth * cm.per_sample_rate;
  long m = static_cast<long>(std::floor((budget - cm.fixed_cost) / unit));
  if (m < 0) m = 0;
  // floating-point floor can land one off; settle on the exact boundary
  while (cost(groups * (m + 1), depth, cm) <= budget) ++m;
  while (m > 0 && cost(groups * m, depth, cm) > budget) --m;
  return m;
}

}  // namespace rvas::seq

#endif  // RVAS_SEQMODEL_HPP
