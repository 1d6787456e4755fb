#ifndef RVAS_RNG_HPP
#define RVAS_RNG_HPP

// Counter-derived random streams (xoshiro256++ behind splitmix64 key
// derivation). A stream is a pure function of (seed, path): deriving the
// same child path from the same seed always yields the same draws, which
// is what makes replicate-level parallelism reproducible for any worker
// count. All samplers are hand-rolled: std:: distributions do not promise
// identical streams across standard libraries.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include "rvas/error.hpp"

namespace rvas::rng {

namespace detail2 {

inline std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace detail2

class Stream {
 public:
  explicit Stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path = {})
      : key_(detail2::splitmix(seed ^ 0xA02B0C75D1E2F380ULL)) {
    for (std::uint64_t p : path) key_ = derive_key(key_, p);
    reset_state();
  }

  // Deterministic substream: same (seed, path) always yields the same stream.
  Stream child(std::uint64_t index) const {
    Stream c(*this);
    c.key_ = derive_key(key_, index);
    c.reset_state();
    return c;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail2::rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail2::rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0,1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1], safe under log().
  double uniform_pos() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

  // Uniform on (0,1), symmetric around 1/2; feeds the normal quantile.
  double uniform_open() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  std::uint64_t uniform_below(std::uint64_t bound) {
    // modulo rejection; bound is tiny relative to 2^64 in all call sites
    const std::uint64_t threshold = (0ULL - bound) % bound;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  double normal() { return normal_quantile(uniform_open()); }

  // Marsaglia-Tsang; shapes < 1 use the boost U^(1/a) trick in log space.
  double gamma(double shape) { return std::exp(log_gamma_draw(shape)); }

  double log_gamma_draw(double shape) {
    detail::require(shape > 0, "rng::gamma: shape must be > 0");
    double boost_log = 0.0;
    if (shape < 1.0) {
      boost_log = std::log(uniform_pos()) / shape;
      shape += 1.0;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / (3.0 * std::sqrt(d));
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return std::log(d * v) + boost_log;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return std::log(d * v) + boost_log;
    }
  }

  // Degenerate shapes (exact 0) are allowed: they arise at the endpoints of
  // the hierarchical frequency model.
  double beta(double a, double b) {
    if (a == 0.0 && b > 0.0) return 0.0;
    if (b == 0.0 && a > 0.0) return 1.0;
    detail::require(a > 0 && b > 0, "rng::beta: shapes must be >= 0, not both 0");
    const double lx = log_gamma_draw(a);
    const double ly = log_gamma_draw(b);
    // x/(x+y) without leaving log space until the ratio is formed
    return 1.0 / (1.0 + std::exp(ly - lx));
  }

  long poisson(double mean) {
    detail::require(mean >= 0 && std::isfinite(mean), "rng::poisson: mean must be finite, >= 0");
    if (mean <= 32.0) return poisson_small(mean);
    // additivity keeps the sequential inversion in a range where exp(-m)
    // cannot underflow, whatever the mean
    const long chunks = static_cast<long>(std::ceil(mean / 32.0));
    const double part = mean / static_cast<double>(chunks);
    long total = 0;
    for (long i = 0; i < chunks; ++i) total += poisson_small(part);
    return total;
  }

  long binomial(long n, double p) {
    detail::require(n >= 0, "rng::binomial: n must be >= 0");
    detail::require(p >= 0 && p <= 1, "rng::binomial: p must lie in [0,1]");
    if (n == 0 || p == 0.0) return 0;
    if (p == 1.0) return n;
    const bool flip = p > 0.5;
    const double pp = flip ? 1.0 - p : p;
    const double log_q = std::log1p(-pp);
    long successes = 0;
    long i = -1;
    for (;;) {
      const double skip = std::floor(std::log(uniform_pos()) / log_q);
      if (skip >= static_cast<double>(n - i)) break;  // jumped past the last trial
      i += 1 + static_cast<long>(skip);
      if (i >= n) break;
      ++successes;
    }
    return flip ? n - successes : successes;
  }

  // Binomial(n, p) conditioned on being >= 1.
  long positive_binomial(long n, double p) {
    detail::require(n >= 1 && p > 0 && p <= 1, "rng::positive_binomial: need n >= 1, p in (0,1]");
    if (p == 1.0) return n;
    const double log_p0 = static_cast<double>(n) * std::log1p(-p);
    const double p0 = std::exp(log_p0);
    if (p0 < 1e-9) {
      for (;;) {
        long k = binomial(n, p);
        if (k >= 1) return k;
      }
    }
    // inversion on the truncated distribution
    const double u = p0 + uniform() * (1.0 - p0);
    double pmf = p0;
    double cdf = p0;
    const double ratio = p / (1.0 - p);
    long k = 0;
    while (cdf < u && k < n) {
      pmf *= static_cast<double>(n - k) / static_cast<double>(k + 1) * ratio;
      cdf += pmf;
      ++k;
    }
    return k < 1 ? 1 : k;
  }

  // Wichura's AS241 (PPND16) rational approximation of the standard normal
  // quantile; |error| well below 1e-12 across (0,1).
  static double normal_quantile(double p) {
    detail::require(p > 0 && p < 1, "normal_quantile: p must lie in (0,1)");
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
      const double r = 0.180625 - q * q;
      return q *
             (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                   6.7265770927008700853e+4) *
                      r +
                  4.5921953931549871457e+4) *
                     r +
                 1.3731693765509461125e+4) *
                    r +
                1.9715909503065514427e+3) *
                   r +
               1.3314166789178437745e+2) *
                  r +
              3.3871328727963666080e+0) /
             (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                   3.9307895800092710610e+4) *
                      r +
                  2.1213794301586595867e+4) *
                     r +
                 5.3941960214247511077e+3) *
                    r +
                6.8718700749205790830e+2) *
                   r +
               4.2313330701600911252e+1) *
                  r +
              1.0);
    }
    double r = q < 0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
      r -= 1.6;
      val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) *
                     r +
                 1.27045825245236838258e+0) *
                    r +
                3.64784832476320460504e+0) *
                   r +
               5.76949722146069140550e+0) *
                  r +
              4.63033784615654529590e+0) *
                 r +
             1.42343711074968357734e+0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) *
                     r +
                 1.48103976427480074590e-1) *
                    r +
                6.89767334985100004550e-1) *
                   r +
               1.67638483018380384940e+0) *
                  r +
              2.05319162663775882187e+0) *
                 r +
             1.0);
    } else {
      r -= 5.0;
      val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) *
                     r +
                 2.65321895265761230930e-2) *
                    r +
                2.96560571828504891230e-1) *
                   r +
               1.78482653991729133580e+0) *
                  r +
              5.46378491116411436990e+0) *
                 r +
             6.65790464350110377720e+0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) *
                     r +
                 7.86869131145613259100e-4) *
                    r +
                1.48753612908506148525e-2) *
                   r +
               1.36929880922735805310e-1) *
                  r +
              5.99832206555887937690e-1) *
                 r +
             1.0);
    }
    return q < 0 ? -val : val;
  }

 private:
  static std::uint64_t derive_key(std::uint64_t key, std::uint64_t index) {
    return detail2::splitmix(key ^ detail2::splitmix(index ^ 0x6C62272E07BB0142ULL));
  }

  void reset_state() {
    std::uint64_t k = key_;
    for (auto& w : s_) {
      k = detail2::splitmix(k);
      w = k;
    }
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;  // xoshiro forbids the zero state
  }

  long poisson_small(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    long k = 0;
    double prod = uniform_pos();
    while (prod > limit) {
      ++k;
      prod *= uniform_pos();
    }
    return k;
  }

  std::uint64_t key_;
  std::uint64_t s_[4];
};

}  // namespace rvas::rng

#endif  // RVAS_RNG_HPP
