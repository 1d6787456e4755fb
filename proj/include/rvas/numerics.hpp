#ifndef RVAS_NUMERICS_HPP
#define RVAS_NUMERICS_HPP

// Special functions and probability distributions used by every other
// module. No domain semantics here: everything is expressed in terms of
// generic shapes, scales and exponents.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/non_central_t.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "rvas/error.hpp"

namespace rvas::numerics {

struct Tolerance {
  double abs_tol = 1e-10;
  double rel_tol = 1e-9;
  long max_iter = 10000;

  void validate() const {
    detail::require(abs_tol > 0, "Tolerance.abs_tol must be > 0");
    detail::require(rel_tol > 0, "Tolerance.rel_tol must be > 0");
    detail::require(max_iter >= 1, "Tolerance.max_iter must be >= 1");
  }
};

// log Gamma(a + n) - log Gamma(a). Exactly 0 for n = 0.
inline double log_rising_factorial(double a, long n) {
  detail::require(a > 0, "log_rising_factorial: base must be > 0");
  detail::require(n >= 0, "log_rising_factorial: exponent must be >= 0");
  if (n == 0) return 0.0;
  return std::lgamma(a + static_cast<double>(n)) - std::lgamma(a);
}

inline double log_binomial_coefficient(long n, long k) {
  detail::require(n >= 0 && k >= 0 && k <= n, "log_binomial_coefficient: need 0 <= k <= n");
  if (k == 0 || k == n) return 0.0;
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

// P(Y >= threshold) for Y ~ Poisson(mean), via the regularized lower
// incomplete gamma identity P(Y >= k) = P(k, mean).
inline double poisson_sf(double mean, long threshold) {
  detail::require(mean >= 0 && std::isfinite(mean), "poisson_sf: mean must be finite and >= 0");
  detail::require(threshold >= 0, "poisson_sf: threshold must be >= 0");
  if (threshold == 0) return 1.0;
  if (mean == 0.0) return 0.0;
  try {
    return boost::math::gamma_p(static_cast<double>(threshold), mean);
  } catch (const std::exception& e) {
    throw numeric_error(std::string("poisson_sf: ") + e.what());
  }
}

inline double central_t_cdf(double x, double df) {
  detail::require(df > 0, "central_t_cdf: df must be > 0");
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  try {
    return boost::math::cdf(boost::math::students_t_distribution<double>(df), x);
  } catch (const std::exception& e) {
    throw numeric_error(std::string("central_t_cdf: ") + e.what());
  }
}

inline double central_t_quantile(double p, double df) {
  detail::require(p > 0 && p < 1, "central_t_quantile: p must lie in (0,1)");
  detail::require(df > 0, "central_t_quantile: df must be > 0");
  try {
    return boost::math::quantile(boost::math::students_t_distribution<double>(df), p);
  } catch (const std::exception& e) {
    throw numeric_error(std::string("central_t_quantile: ") + e.what());
  }
}

// P(X <= x) for X noncentral t with `df` degrees of freedom and
// noncentrality `delta`. Reduces to central_t_cdf at delta = 0. Boost's
// evaluation errors (series non-convergence reports its iteration count)
// surface as numeric_error rather than a silent wrong value.
inline double noncentral_t_cdf(double x, double df, double delta) {
  detail::require(df > 0, "noncentral_t_cdf: df must be > 0");
  detail::require(std::isfinite(delta), "noncentral_t_cdf: noncentrality must be finite");
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  try {
    boost::math::non_central_t_distribution<double> dist(df, delta);
    return boost::math::cdf(dist, x);
  } catch (const std::exception& e) {
    throw numeric_error(std::string("noncentral_t_cdf: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Gauss-Jacobi quadrature for Beta-weighted integrals, via Golub-Welsch.
// ---------------------------------------------------------------------------

namespace gj {

// Symmetric tridiagonal QL with implicit shifts; diag/offdiag are consumed,
// `first_row` tracks the first eigenvector component of each column.
inline void tridiag_eigen(std::vector<double>& diag, std::vector<double>& offdiag,
                          std::vector<double>& first_row) {
  const std::size_t n = diag.size();
  offdiag.push_back(0.0);
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        double dd = std::fabs(diag[m]) + std::fabs(diag[m + 1]);
        if (std::fabs(offdiag[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
      }
      if (m != l) {
        if (++iter == 60) throw numeric_error("gauss_jacobi: eigenvalue iteration stalled", iter);
        double g = (diag[l + 1] - diag[l]) / (2.0 * offdiag[l]);
        double r = std::hypot(g, 1.0);
        g = diag[m] - diag[l] + offdiag[l] / (g + (g >= 0 ? std::fabs(r) : -std::fabs(r)));
        double s = 1.0, c = 1.0, p = 0.0;
        for (std::size_t i = m; i-- > l;) {
          double f = s * offdiag[i];
          double b = c * offdiag[i];
          r = std::hypot(f, g);
          offdiag[i + 1] = r;
          if (r == 0.0) {
            diag[i + 1] -= p;
            offdiag[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = diag[i + 1] - p;
          r = (diag[i] - g) * s + 2.0 * c * b;
          p = s * r;
          diag[i + 1] = g + p;
          g = c * r - b;
          double fr = first_row[i + 1];
          first_row[i + 1] = s * first_row[i] + c * fr;
          first_row[i] = c * first_row[i] - s * fr;
        }
        if (r == 0.0 && m - l > 1) continue;
        diag[l] -= p;
        offdiag[l] = g;
        offdiag[m] = 0.0;
      }
    } while (m != l);
  }
}

struct Rule {
  std::vector<double> nodes;    // on (0,1), ascending
  std::vector<double> weights;  // normalized to sum 1 (Beta-density weights)
};

// Nodes/weights for E_B[f(B)] with B ~ Beta(shape1, shape2): weight
// t^(shape1-1) (1-t)^(shape2-1) on (0,1), i.e. Jacobi parameters
// alpha = shape2-1, beta = shape1-1 on [-1,1] after t = (1+x)/2.
inline Rule rule(double shape1, double shape2, int order) {
  detail::require(shape1 > 0 && shape2 > 0, "gauss_jacobi: shapes must be > 0");
  detail::require(order >= 1, "gauss_jacobi: order must be >= 1");
  const double a = shape2 - 1.0;  // exponent on (1-x)
  const double b = shape1 - 1.0;  // exponent on (1+x)
  std::vector<double> diag(order), off(order > 1 ? order - 1 : 0), row(order, 0.0);
  row[0] = 1.0;
  diag[0] = (b - a) / (a + b + 2.0);
  for (int n = 1; n < order; ++n) {
    double s = 2.0 * n + a + b;
    diag[n] = (b * b - a * a) / (s * (s + 2.0));
  }
  if (order > 1) {
    // n = 1 uses the cancelled form; the generic one divides by (a+b+1),
    // which is 0 when shape1 + shape2 == 1.
    off[0] = std::sqrt(4.0 * (1.0 + a) * (1.0 + b) / ((a + b + 2.0) * (a + b + 2.0) * (a + b + 3.0)));
    for (int n = 2; n < order; ++n) {
      double s = 2.0 * n + a + b;
      double num = 4.0 * n * (n + a) * (n + b) * (n + a + b);
      double den = s * s * (s + 1.0) * (s - 1.0);
      off[n - 1] = std::sqrt(num / den);
    }
  }
  tridiag_eigen(diag, off, row);
  Rule r;
  std::vector<std::size_t> idx(order);
  for (int i = 0; i < order; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return diag[i] < diag[j]; });
  r.nodes.resize(order);
  r.weights.resize(order);
  double wsum = 0.0;
  for (int i = 0; i < order; ++i) {
    r.nodes[i] = 0.5 * (1.0 + diag[idx[i]]);
    r.weights[i] = row[idx[i]] * row[idx[i]];
    wsum += r.weights[i];
  }
  for (auto& w : r.weights) w /= wsum;
  return r;
}

}  // namespace gj

inline double log_sum_exp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

namespace detail_num {

// Robust fallback for log E[Prod (1-scale_i B)^(pow_i)], B ~ Beta(p, q),
// when both p and the decay rate are large and comparable: composite
// Simpson over a +-14 sigma window around the interior peak, an exact
// (1-B)^q-substituted rule for everything to the right (absorbs a q < 1
// endpoint spike), and a proven-negligible bound for the left tail.
// Scales equal to 1 fold into the (1-B) exponent exactly.
inline double log_beta_power_peak_window(double p, double q, double sa, long pa, double sb,
                                         long pb, const Tolerance& tol) {
  double qe = q;
  std::vector<std::pair<double, double>> factors;
  if (sa > 0 && pa > 0) {
    if (sa == 1.0)
      qe += static_cast<double>(pa);
    else
      factors.emplace_back(sa, static_cast<double>(pa));
  }
  if (sb > 0 && pb > 0) {
    if (sb == 1.0)
      qe += static_cast<double>(pb);
    else
      factors.emplace_back(sb, static_cast<double>(pb));
  }
  if (p <= 1.5)
    throw numeric_error("beta_expectation_power: quadrature did not converge by order 8192", 8192);
  auto log_h = [&](double t) {
    double v = (p - 1.0) * std::log(t) + (qe - 1.0) * std::log1p(-t);
    for (const auto& [s, m] : factors) v += m * std::log1p(-s * t);
    return v;
  };
  auto dlog_h = [&](double t) {
    double v = (p - 1.0) / t - (qe - 1.0) / (1.0 - t);
    for (const auto& [s, m] : factors) v -= m * s / (1.0 - s * t);
    return v;
  };
  // leftmost stationary point: derivative starts positive near 0
  double lo = 1e-12, hi = lo;
  bool bracketed = false;
  for (double t = 2e-12; t < 0.75; t *= 1.25) {
    if (dlog_h(t) < 0.0) {
      hi = t;
      bracketed = true;
      break;
    }
    lo = t;
  }
  if (!bracketed)
    throw numeric_error("beta_expectation_power: quadrature did not converge by order 8192", 8192);
  for (int it = 0; it < 200 && (hi - lo) > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (dlog_h(mid) > 0.0 ? lo : hi) = mid;
  }
  const double mode = 0.5 * (lo + hi);
  double curv = (p - 1.0) / (mode * mode) + (qe - 1.0) / ((1.0 - mode) * (1.0 - mode));
  for (const auto& [s, m] : factors) curv += m * s * s / ((1.0 - s * mode) * (1.0 - s * mode));
  if (!(curv > 0.0))
    throw numeric_error("beta_expectation_power: quadrature did not converge by order 8192", 8192);
  const double sigma = 1.0 / std::sqrt(curv);
  const double w_lo = std::max(mode - 14.0 * sigma, mode / 30.0);
  const double w_hi = std::min(mode + 14.0 * sigma, 0.5 * (1.0 + mode));

  auto evaluate = [&](long n) {
    // window: Simpson in B over [w_lo, w_hi]
    std::vector<double> terms;
    terms.reserve(n + n / 2 + 4);
    const double dt = (w_hi - w_lo) / static_cast<double>(n - 1);
    for (long i = 0; i < n; ++i) {
      const double t = w_lo + dt * i;
      const double coeff = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      terms.push_back(std::log(coeff * dt / 3.0) + log_h(t));
    }
    const double log_window = log_sum_exp(terms);
    // right of the window: w = (1-B)^qe absorbs the endpoint exactly
    terms.clear();
    const double wcap = std::pow(1.0 - w_hi, qe);
    const double dw = wcap / static_cast<double>(n - 1);
    for (long i = 0; i < n; ++i) {
      const double w = wcap - dw * i;  // B increasing
      const double t = std::min(1.0 - std::pow(std::max(w, 1e-300), 1.0 / qe), 1.0 - 1e-16);
      double v = (p - 1.0) * std::log(t);
      for (const auto& [s, m] : factors) v += m * std::log1p(-s * t);
      const double coeff = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      terms.push_back(std::log(coeff * dw / 3.0) - std::log(qe) + v);
    }
    const double log_right = log_sum_exp(terms);
    // left tail: log h is concave below the mode when (p-1)/B^2 dominates,
    // so the tail integral is at most h(w_lo)/dlog_h(w_lo)
    const double dleft = dlog_h(w_lo);
    const bool concave = (p - 1.0) / (w_lo * w_lo) >
                         std::max(0.0, 1.0 - qe) / ((1.0 - w_lo) * (1.0 - w_lo));
    if (!(concave && dleft > 0.0))
      throw numeric_error("beta_expectation_power: quadrature did not converge by order 8192",
                          8192);
    const double lglo = log_h(w_lo) - std::log(dleft);
    if (lglo > std::max(log_window, log_right) - 60.0)
      throw numeric_error("beta_expectation_power: quadrature did not converge by order 8192",
                          8192);
    return log_sum_exp({log_window, log_right});
  };

  const double lbeta = std::lgamma(p) + std::lgamma(q) - std::lgamma(p + q);
  long n = 2001;
  double prev = evaluate(n);
  for (int round = 0; round < 3; ++round) {
    n = 2 * (n - 1) + 1;
    const double cur = evaluate(n);
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::fabs(cur));
    if (std::fabs(cur - prev) <= std::max({tol.rel_tol, 4 * tol.abs_tol, floor}))
      return cur - lbeta;
    prev = cur;
  }
  throw numeric_error("beta_expectation_power: fallback rule did not converge", 16001);
}

}  // namespace detail_num

// log E[(1 - scale_a B)^pow_a * (1 - scale_b B)^pow_b], B ~ Beta(shape1, shape2),
// by Gauss-Jacobi with the order doubled until the change falls below tol.
// Log-space throughout: the expectation underflows double for large exponents
// while the quantities it feeds stay moderate.
//
// When the exponents push the integrand's peak far below the Beta bulk
// (large shape1 with much larger pow*scale), a single rule on the full Beta
// weight cannot resolve it; the integral is then split at the peak scale
// and each side gets its own one-endpoint Jacobi rule.
inline double log_beta_expectation_power(double shape1, double shape2, double scale_a, long pow_a,
                                         double scale_b, long pow_b,
                                         const Tolerance& tol = Tolerance{}) {
  detail::require(shape1 > 0 && shape2 > 0, "beta_expectation_power: shapes must be > 0");
  detail::require(scale_a >= 0 && scale_a <= 1 && scale_b >= 0 && scale_b <= 1,
                  "beta_expectation_power: scales must lie in [0,1]");
  detail::require(pow_a >= 0 && pow_b >= 0, "beta_expectation_power: exponents must be >= 0");
  tol.validate();
  const bool a_active = scale_a > 0 && pow_a > 0;
  const bool b_active = scale_b > 0 && pow_b > 0;
  if (!a_active && !b_active) return 0.0;  // integrand is identically 1

  auto log_powers = [&](double t) {
    double lf = 0.0;
    if (a_active) lf += static_cast<double>(pow_a) * std::log1p(-scale_a * t);
    if (b_active) lf += static_cast<double>(pow_b) * std::log1p(-scale_b * t);
    return lf;
  };

  const double decay = (a_active ? scale_a * static_cast<double>(pow_a) : 0.0) +
                       (b_active ? scale_b * static_cast<double>(pow_b) : 0.0);
  // integrand peak sits near (shape1-1)/decay; when that is well below the
  // Beta bulk, split above the peak so it lies inside the left piece
  const double peak_scale = (shape1 + 10.0) / (1.0 + decay);
  const double split = std::min(3.0 * peak_scale, 0.6);

  std::function<double(int)> evaluate;
  if (peak_scale >= 0.15) {
    // bulk and peak coincide; one rule on the full Beta weight
    evaluate = [&, log_powers](int order) {
      gj::Rule r = gj::rule(shape1, shape2, order);
      std::vector<double> terms;
      terms.reserve(r.nodes.size());
      for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        if (r.weights[i] <= 0.0) continue;
        terms.push_back(std::log(r.weights[i]) + log_powers(r.nodes[i]));
      }
      return log_sum_exp(terms);
    };
  } else {
    const double c = split;
    const double lbeta =
        std::lgamma(shape1) + std::lgamma(shape2) - std::lgamma(shape1 + shape2);
    evaluate = [&, log_powers, c, lbeta](int order) {
      // [0, c]: weight t^(shape1-1) after B = c t; smooth remainder
      gj::Rule left = gj::rule(shape1, 1.0, order);
      std::vector<double> terms;
      terms.reserve(2 * left.nodes.size());
      const double l_left = shape1 * std::log(c) - std::log(shape1);
      for (std::size_t i = 0; i < left.nodes.size(); ++i) {
        if (left.weights[i] <= 0.0) continue;
        const double bb = c * left.nodes[i];
        terms.push_back(l_left + std::log(left.weights[i]) +
                        (shape2 - 1.0) * std::log1p(-bb) + log_powers(bb));
      }
      // [c, 1]: weight (1-B)^(shape2-1) after B = c + (1-c) u
      gj::Rule right = gj::rule(1.0, shape2, order);
      const double l_right = shape2 * std::log1p(-c) - std::log(shape2);
      for (std::size_t i = 0; i < right.nodes.size(); ++i) {
        if (right.weights[i] <= 0.0) continue;
        const double bb = c + (1.0 - c) * right.nodes[i];
        terms.push_back(l_right + std::log(right.weights[i]) +
                        (shape1 - 1.0) * std::log(bb) + log_powers(bb));
      }
      return log_sum_exp(terms) - lbeta;
    };
  }

  int order = 16;
  double prev = evaluate(order);
  while (order < 8192) {
    order *= 2;
    double cur = evaluate(order);
    bool both_tiny = !std::isfinite(prev) && !std::isfinite(cur);
    // |delta log| is the relative change of the expectation itself; the
    // floor reflects what double precision supports at this log magnitude
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::fabs(cur));
    if (both_tiny || std::fabs(cur - prev) <= std::max({tol.rel_tol, 4 * tol.abs_tol, floor})) {
      return std::min(cur, 0.0);
    }
    prev = cur;
  }
  // Jacobi ladders can stall when shape1 and the decay rate are both large
  // and comparable: the peak is interior and far from either endpoint
  // cluster. Fall back to a peak-windowed composite rule with explicit
  // bounds on everything outside the window.
  const double fb = detail_num::log_beta_power_peak_window(shape1, shape2, scale_a, pow_a, scale_b,
                                                           pow_b, tol);
  return std::min(fb, 0.0);
}

inline double beta_expectation_power(double shape1, double shape2, double scale_a, long pow_a,
                                     double scale_b, long pow_b,
                                     const Tolerance& tol = Tolerance{}) {
  double le = log_beta_expectation_power(shape1, shape2, scale_a, pow_a, scale_b, pow_b, tol);
  return std::clamp(std::exp(le), 0.0, 1.0);
}

}  // namespace rvas::numerics

#endif  // RVAS_NUMERICS_HPP
