#include <doctest.h>

#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "oracles.hpp"
#include "rvas/numerics.hpp"
#include "rvas/rng.hpp"

using namespace rvas;

TEST_CASE("tolerance invariants") {
  numerics::Tolerance tol;
  CHECK_NOTHROW(tol.validate());
  tol.abs_tol = 0;
  CHECK_THROWS_AS(tol.validate(), domain_error);
  tol = {};
  tol.max_iter = 0;
  CHECK_THROWS_AS(tol.validate(), domain_error);
}

TEST_CASE("log_rising_factorial") {
  CHECK(numerics::log_rising_factorial(2.5, 0) == 0.0);
  CHECK(numerics::log_rising_factorial(1.0, 4) == doctest::Approx(std::log(24.0)).epsilon(1e-12));
  const double expect = std::log(oracle::rising_factorial_product(0.5, 3));
  CHECK(numerics::log_rising_factorial(0.5, 3) == doctest::Approx(expect).epsilon(1e-12));
  // random spot-checks against the direct product
  rng::Stream s(11);
  for (int i = 0; i < 20; ++i) {
    const double a = 0.1 + 5.0 * s.uniform();
    const long n = 1 + static_cast<long>(s.uniform_below(12));
    CHECK(numerics::log_rising_factorial(a, n) ==
          doctest::Approx(std::log(oracle::rising_factorial_product(a, n))).epsilon(1e-10));
  }
  CHECK_THROWS_AS(numerics::log_rising_factorial(0.0, 2), domain_error);
  CHECK_THROWS_AS(numerics::log_rising_factorial(-1.0, 2), domain_error);
}

TEST_CASE("poisson_sf basics and oracle") {
  CHECK(numerics::poisson_sf(123.4, 0) == 1.0);
  CHECK(numerics::poisson_sf(0.0, 1) == 0.0);
  CHECK(numerics::poisson_sf(1.0, 1) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
  for (double mean : {0.3, 2.0, 17.5, 38.0, 95.0}) {
    for (long k : {1L, 5L, 30L, 60L}) {
      CHECK(numerics::poisson_sf(mean, k) ==
            doctest::Approx(oracle::poisson_tail_sum(mean, k)).epsilon(1e-9));
    }
  }
  CHECK_THROWS_AS(numerics::poisson_sf(-0.1, 1), domain_error);
}

TEST_CASE("poisson_sf monotone in mean and threshold") {
  for (long k = 1; k < 40; k += 7) {
    double prev = -1.0;
    for (double mean = 0.5; mean < 60.0; mean += 3.1) {
      const double v = numerics::poisson_sf(mean, k);
      CHECK(v >= prev);
      prev = v;
    }
  }
  for (double mean : {3.0, 31.0}) {
    double prev = 2.0;
    for (long k = 0; k < 50; k += 3) {
      const double v = numerics::poisson_sf(mean, k);
      CHECK(v <= prev);
      prev = v;
    }
  }
}

TEST_CASE("noncentral t cdf: trivial points") {
  CHECK(numerics::noncentral_t_cdf(0.0, 5.0, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(numerics::noncentral_t_cdf(1e6, 10.0, 3.0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK_THROWS_AS(numerics::noncentral_t_cdf(0.0, -1.0, 0.0), domain_error);
}

TEST_CASE("noncentral t cdf agrees with central cdf at zero noncentrality") {
  for (double x : {-2.5, -0.3, 0.0, 1.2, 4.0}) {
    for (double df : {1.5, 7.0, 42.0}) {
      CHECK(numerics::noncentral_t_cdf(x, df, 0.0) ==
            doctest::Approx(numerics::central_t_cdf(x, df)).epsilon(1e-10));
    }
  }
}

TEST_CASE("noncentral t cdf vs sampling oracle" * doctest::timeout(120)) {
  const auto est = oracle::noncentral_t_cdf_mc(2.0, 18.0, 1.5, 10'000'000, rng::Stream(404));
  const double v = numerics::noncentral_t_cdf(2.0, 18.0, 1.5);
  CHECK(std::fabs(v - est.mean) <= 3.0 * est.se);
}

TEST_CASE("noncentral t cdf monotone in x and noncentrality") {
  for (double df : {4.0, 21.0}) {
    double prev = -1.0;
    for (double x = -4.0; x <= 4.0; x += 0.5) {
      const double v = numerics::noncentral_t_cdf(x, df, 1.0);
      CHECK(v >= prev);
      prev = v;
    }
    prev = 2.0;
    for (double delta = -2.0; delta <= 3.0; delta += 0.5) {
      const double v = numerics::noncentral_t_cdf(1.3, df, delta);
      CHECK(v <= prev);
      prev = v;
    }
  }
}

TEST_CASE("central t quantile") {
  CHECK(numerics::central_t_quantile(0.5, 7.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(numerics::central_t_quantile(0.975, 1e8) == doctest::Approx(1.959964).epsilon(1e-3));
  rng::Stream s(7);
  for (int i = 0; i < 25; ++i) {
    const double p = 0.01 + 0.98 * s.uniform();
    const double df = 0.5 + 80.0 * s.uniform();
    const double q = numerics::central_t_quantile(p, df);
    CHECK(numerics::central_t_cdf(q, df) == doctest::Approx(p).epsilon(1e-7));
  }
  CHECK_THROWS_AS(numerics::central_t_quantile(0.0, 5.0), domain_error);
  CHECK_THROWS_AS(numerics::central_t_quantile(1.0, 5.0), domain_error);
  CHECK_THROWS_AS(numerics::central_t_quantile(0.5, 0.0), domain_error);
}

TEST_CASE("beta expectation power: exact unit cases") {
  CHECK(numerics::beta_expectation_power(1.3, 2.2, 0.0, 5, 0.0, 9) == 1.0);
  CHECK(numerics::beta_expectation_power(0.7, 6.0, 0.9, 0, 0.4, 0) == 1.0);
  CHECK_THROWS_AS(numerics::beta_expectation_power(0.0, 1.0, 0.5, 2, 0.0, 0), domain_error);
  CHECK_THROWS_AS(numerics::beta_expectation_power(1.0, 1.0, 1.5, 2, 0.0, 0), domain_error);
}

TEST_CASE("beta expectation power vs Monte Carlo oracle" * doctest::timeout(180)) {
  // shapes (0.5, 4.5), phi_follow = 0.9, exponent 10
  rng::Stream s(909);
  const long draws = 10'000'000;
  std::vector<double> acc;
  acc.reserve(1000);
  double sum = 0.0, sumsq = 0.0;
  for (long i = 0; i < draws; ++i) {
    const double b = s.beta(0.5, 4.5);
    const double v = std::exp(10.0 * std::log1p(-0.9 * b));
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / draws;
  const double se = std::sqrt((sumsq / draws - mean * mean) / draws);
  const double got = numerics::beta_expectation_power(0.5, 4.5, 0.9, 10, 0.0, 0);
  CHECK(std::fabs(got - mean) <= 3.0 * se);
}

TEST_CASE("beta expectation power: range and monotonicity") {
  for (double phi : {0.1, 0.5, 0.95}) {
    double prev = 2.0;
    for (long m : {0L, 1L, 4L, 16L, 64L}) {
      const double v = numerics::beta_expectation_power(0.8, 3.5, phi, m, 0.3, 2);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      CHECK(v <= prev + 1e-12);
      prev = v;
    }
  }
  double prev = 2.0;
  for (double phi = 0.0; phi <= 1.0; phi += 0.2) {
    const double v = numerics::beta_expectation_power(1.5, 2.0, phi, 12, 0.0, 0);
    CHECK(v <= prev + 1e-12);
    prev = v;
  }
}

TEST_CASE("beta expectation power: log form handles huge exponents") {
  const double lv = numerics::log_beta_expectation_power(400.5, 4.5, 0.9, 100000, 0.0, 0);
  CHECK(std::isfinite(lv));
  CHECK(lv < -2000.0);  // far beyond double range as a plain value
  CHECK(numerics::beta_expectation_power(400.5, 4.5, 0.9, 100000, 0.0, 0) == 0.0);
}

TEST_CASE("beta expectation power: interior-peak regime against dense oracle") {
  // shape and decay both large and comparable; value frozen from an
  // 8e6-panel log-space trapezoid oracle
  const double lv = numerics::log_beta_expectation_power(2111.9, 0.6, 0.9, 7888, 0.0, 0);
  CHECK(lv == doctest::Approx(-4931.481524007).epsilon(1e-9));
}

TEST_CASE("beta expectation power: strictly decreasing in the exponent across regimes") {
  double prev = 1.0;
  for (long pw = 10; pw <= 3000; pw = pw * 3 / 2) {
    const double lv = numerics::log_beta_expectation_power(3.0, 4.5, 0.9, pw, 0.0, 0);
    CHECK(lv < prev);
    prev = lv;
  }
}

TEST_CASE("pure functions: repeated calls bit-identical") {
  const double a = numerics::beta_expectation_power(0.5, 4.5, 0.9, 10, 0.2, 3);
  const double b = numerics::beta_expectation_power(0.5, 4.5, 0.9, 10, 0.2, 3);
  CHECK(a == b);
  CHECK(numerics::noncentral_t_cdf(1.7, 9.0, 2.2) == numerics::noncentral_t_cdf(1.7, 9.0, 2.2));
}

TEST_CASE("gauss-jacobi rule integrates beta moments") {
  // E[B] and E[B^2] under Beta(2.5, 3.5) have closed forms
  auto rule = numerics::gj::rule(2.5, 3.5, 24);
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    m1 += rule.weights[i] * rule.nodes[i];
    m2 += rule.weights[i] * rule.nodes[i] * rule.nodes[i];
  }
  CHECK(m1 == doctest::Approx(2.5 / 6.0).epsilon(1e-12));
  CHECK(m2 == doctest::Approx(2.5 * 3.5 / (6.0 * 6.0 * 7.0) + (2.5 / 6.0) * (2.5 / 6.0)).epsilon(1e-12));
  // shape1 + shape2 == 1 exercises the cancelled n=1 recurrence coefficient
  auto singular = numerics::gj::rule(0.4, 0.6, 16);
  double total = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < singular.nodes.size(); ++i) {
    total += singular.weights[i];
    mean += singular.weights[i] * singular.nodes[i];
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mean == doctest::Approx(0.4).epsilon(1e-10));
}

TEST_CASE("normal quantile matches boost") {
  boost::math::normal_distribution<double> nd;
  for (double p : {1e-8, 1e-4, 0.025, 0.3, 0.5, 0.84, 0.999, 1.0 - 1e-7}) {
    CHECK(rng::Stream::normal_quantile(p) ==
          doctest::Approx(boost::math::quantile(nd, p)).epsilon(1e-10));
  }
}
