#ifndef RVAS_PREDICTIVE_HPP
#define RVAS_PREDICTIVE_HPP

// Analytic predictive distributions for variant counts under the
// three-parameter beta-Bernoulli model. The central quantity is the Poisson
// mean of the number of variants that will appear in exactly k of M future
// samples after N pilot samples, with detection probabilities applied to
// both phases. Everything is evaluated in log space: the binomial
// coefficient and the beta expectation can individually overflow/underflow
// long before their product does.

#include <cmath>
#include <optional>

#include "rvas/error.hpp"
#include "rvas/numerics.hpp"

namespace rvas::predict {

struct PriorParams {
  double mass = 1.0;           // scales the expected number of variants
  double concentration = 1.0;  // tail weight toward common variants
  double discount = 0.0;       // heavy-tail index in [0,1)

  void validate() const {
    detail::require(mass > 0 && std::isfinite(mass), "PriorParams.mass must be > 0");
    detail::require(discount >= 0 && discount < 1, "PriorParams.discount must lie in [0,1)");
    detail::require(concentration > -discount && std::isfinite(concentration),
                    "PriorParams.concentration must exceed -discount");
  }

  PriorParams scaled_mass(double factor) const {
    PriorParams p = *this;
    p.mass *= factor;
    return p;
  }
};

struct KtonPrediction {
  long frequency = 1;       // k
  long n_pilot = 0;         // N
  long m_follow = 1;        // M
  double phi_pilot = 1.0;
  double phi_follow = 1.0;
  double expected_count = 0.0;  // Poisson mean of the future k-ton count

  void validate() const {
    detail::require(expected_count >= 0, "KtonPrediction.expected_count must be >= 0");
    detail::require(frequency >= 1 && frequency <= m_follow,
                    "KtonPrediction.frequency must lie in [1, m_follow]");
  }
};

namespace detail_pred {

inline void check_args(const PriorParams& prior, long n_pilot, long m_follow, long k,
                       double phi_pilot, double phi_follow) {
  prior.validate();
  detail::require(n_pilot >= 0, "gamma_k: n_pilot must be >= 0");
  detail::require(m_follow >= 1, "gamma_k: m_follow must be >= 1");
  detail::require(k >= 1 && k <= m_follow, "gamma_k: k must lie in [1, m_follow]");
  detail::require(phi_pilot >= 0 && phi_pilot <= 1, "gamma_k: phi_pilot must lie in [0,1]");
  detail::require(phi_follow >= 0 && phi_follow <= 1, "gamma_k: phi_follow must lie in [0,1]");
}

// The rising-factorial ratio follows from the Levy moment directly:
//   E[#k-tons] = C(M,k) Int (phi t)^k (1-phi t)^(M-k) levy(dt)
//              = mass C(M,k) phi^k (1-discount)_{k-1} / (1+conc)_{k-1}
//                * E[(1-phi B)^(M-k)],  B ~ Beta(k-discount, conc+discount),
// which the sequential-scheme Monte Carlo oracle confirms for k >= 2.
inline double log_gamma_k(const PriorParams& prior, long n_pilot, long m_follow, long k,
                          double phi_pilot, double phi_follow,
                          const numerics::Tolerance& tol) {
  if (phi_follow == 0.0) return -std::numeric_limits<double>::infinity();
  const double log_mass = std::log(prior.mass);
  const double log_choose = numerics::log_binomial_coefficient(m_follow, k);
  const double log_phi = static_cast<double>(k) * std::log(phi_follow);
  const double log_rf = numerics::log_rising_factorial(1.0 - prior.discount, k - 1) -
                        numerics::log_rising_factorial(1.0 + prior.concentration, k - 1);
  const double log_expect = numerics::log_beta_expectation_power(
      static_cast<double>(k) - prior.discount, prior.concentration + prior.discount, phi_follow,
      m_follow - k, phi_pilot, n_pilot, tol);
  return log_mass + log_choose + log_phi + log_rf + log_expect;
}

}  // namespace detail_pred

// Poisson mean of the count of variants observed in exactly k of m_follow
// future samples, given n_pilot pilot samples, with per-phase detection
// probabilities.
inline KtonPrediction gamma_k(const PriorParams& prior, long n_pilot, long m_follow, long k,
                              double phi_pilot, double phi_follow,
                              const numerics::Tolerance& tol = numerics::Tolerance{}) {
  detail_pred::check_args(prior, n_pilot, m_follow, k, phi_pilot, phi_follow);
  KtonPrediction pred;
  pred.frequency = k;
  pred.n_pilot = n_pilot;
  pred.m_follow = m_follow;
  pred.phi_pilot = phi_pilot;
  pred.phi_follow = phi_follow;
  const double lg = detail_pred::log_gamma_k(prior, n_pilot, m_follow, k, phi_pilot, phi_follow, tol);
  pred.expected_count = std::isfinite(lg) ? std::exp(lg) : 0.0;
  return pred;
}

// Poisson mean of the per-sample k-ton count.
inline double per_sample_kton_rate(const KtonPrediction& pred) {
  pred.validate();
  return pred.expected_count / static_cast<double>(pred.m_follow);
}

// Expected count of variants appearing at most k times (cumulative k-tons).
inline double cumulative_gamma_k(const PriorParams& prior, long n_pilot, long m_follow, long k,
                                 double phi_pilot, double phi_follow,
                                 const numerics::Tolerance& tol = numerics::Tolerance{}) {
  detail_pred::check_args(prior, n_pilot, m_follow, k, phi_pilot, phi_follow);
  double total = 0.0;
  for (long j = 1; j <= k; ++j)
    total += gamma_k(prior, n_pilot, m_follow, j, phi_pilot, phi_follow, tol).expected_count;
  return total;
}

// Expected number of new distinct variants in m_follow samples: the sum of
// gamma_k over all frequencies.
inline double expected_new_variants(const PriorParams& prior, long n_pilot, long m_follow,
                                    double phi_pilot, double phi_follow,
                                    const numerics::Tolerance& tol = numerics::Tolerance{}) {
  return cumulative_gamma_k(prior, n_pilot, m_follow, m_follow, phi_pilot, phi_follow, tol);
}

// Ratio of expected new (k-ton) variants, affected over unaffected, on a
// shared design. Without k it compares total new-variant counts.
inline double excess_ratio(const PriorParams& prior_a, const PriorParams& prior_u, long n_pilot,
                           long m_follow, std::optional<long> k, double phi,
                           const numerics::Tolerance& tol = numerics::Tolerance{}) {
  double num, den;
  if (k.has_value()) {
    num = gamma_k(prior_a, n_pilot, m_follow, *k, phi, phi, tol).expected_count;
    den = gamma_k(prior_u, n_pilot, m_follow, *k, phi, phi, tol).expected_count;
  } else {
    num = expected_new_variants(prior_a, n_pilot, m_follow, phi, phi, tol);
    den = expected_new_variants(prior_u, n_pilot, m_follow, phi, phi, tol);
  }
  if (den == 0.0) throw numeric_error("excess_ratio: unaffected expectation is 0");
  return num / den;
}

}  // namespace rvas::predict

#endif  // RVAS_PREDICTIVE_HPP
