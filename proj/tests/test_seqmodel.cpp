#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rvas/seqmodel.hpp"

using namespace rvas;

namespace {
sim::GenotypeMatrix random_matrix(long rows, long cols, sim::PloidyMode mode, rng::Stream s) {
  sim::GenotypeMatrix m("t", rows, cols, mode);
  const long top = mode == sim::PloidyMode::binary ? 1 : 2;
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c)
      m(r, c) = static_cast<std::int8_t>(s.uniform_below(top + 1));
  return m;
}
}  // namespace

TEST_CASE("config invariants") {
  CHECK_THROWS_AS((seq::SeqConfig{-1.0, 30, 0.05}.validate()), domain_error);
  CHECK_THROWS_AS((seq::SeqConfig{10.0, 0, 0.05}.validate()), domain_error);
  CHECK_THROWS_AS((seq::SeqConfig{10.0, 5, 1.0}.validate()), domain_error);
  CHECK_NOTHROW((seq::SeqConfig{0.0, 1, 0.0}.validate()));
  CHECK_THROWS_AS((seq::CostModel{-1.0, 1.0}.validate()), domain_error);
  CHECK_THROWS_AS((seq::CostModel{0.0, 0.0}.validate()), domain_error);
}

TEST_CASE("detection probability: reference setting and degenerate cases") {
  const double phi = seq::detection_prob({40.0, 30, 0.05});
  CHECK(phi > 0.9);
  CHECK(phi < 1.0);
  CHECK(phi == doctest::Approx(oracle::poisson_tail_sum(38.0, 30)).epsilon(1e-10));
  CHECK(seq::detection_prob({0.0, 1, 0.0}) == 0.0);
  CHECK(seq::detection_prob({10.0, 3, 1.0 - 1e-16}) == doctest::Approx(0.0).epsilon(1e-12));
  // effective mean 1, threshold 1: 1 - exp(-1)
  CHECK(seq::detection_prob({2.0, 1, 0.5}) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("detection probability monotone in depth, threshold, error") {
  double prev = -1.0;
  for (double lam = 1.0; lam < 80.0; lam += 4.0) {
    const double v = seq::detection_prob({lam, 30, 0.05});
    CHECK(v >= prev);
    prev = v;
  }
  prev = 2.0;
  for (long d = 1; d < 60; d += 4) {
    const double v = seq::detection_prob({40.0, d, 0.05});
    CHECK(v <= prev);
    prev = v;
  }
  prev = 2.0;
  for (double err = 0.0; err < 0.9; err += 0.1) {
    const double v = seq::detection_prob({40.0, 30, err});
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("thin_matrix fixes zeros and keeps everything at phi = 1") {
  sim::GenotypeMatrix zeros("z", 8, 5, sim::PloidyMode::binary);
  auto thinned = seq::thin_matrix(zeros, {40.0, 30, 0.05}, rng::Stream(2));
  for (long r = 0; r < 8; ++r)
    for (long c = 0; c < 5; ++c) CHECK(thinned(r, c) == 0);

  auto x = random_matrix(12, 9, sim::PloidyMode::diploid, rng::Stream(3));
  const seq::SeqConfig sure{10000.0, 1, 0.0};  // phi rounds to exactly 1
  CHECK(seq::detection_prob(sure) == 1.0);
  auto kept = seq::thin_matrix(x, sure, rng::Stream(4));
  for (long r = 0; r < x.rows(); ++r)
    for (long c = 0; c < x.cols(); ++c) CHECK(kept(r, c) == x(r, c));
}

TEST_CASE("thinning never creates variants and keeps genotype values") {
  rng::Stream root(77);
  for (int rep = 0; rep < 1000; ++rep) {
    auto s = root.child(rep);
    const long rows = 1 + static_cast<long>(s.uniform_below(12));
    const long cols = 1 + static_cast<long>(s.uniform_below(16));
    const auto mode = s.uniform() < 0.5 ? sim::PloidyMode::binary : sim::PloidyMode::diploid;
    auto x = random_matrix(rows, cols, mode, s.child(0));
    auto z = seq::thin_matrix(x, {20.0, 25, 0.05}, s.child(1));
    for (long r = 0; r < rows; ++r)
      for (long c = 0; c < cols; ++c) {
        CHECK(z(r, c) <= x(r, c));
        CHECK((z(r, c) == 0 || z(r, c) == x(r, c)));
      }
  }
}

TEST_CASE("thinned keep-rate concentrates at phi" * doctest::timeout(60)) {
  // depth ln 2 with threshold 1 gives phi = 1/2 exactly
  const seq::SeqConfig half{std::log(2.0), 1, 0.0};
  CHECK(seq::detection_prob(half) == doctest::Approx(0.5).epsilon(1e-12));
  sim::GenotypeMatrix ones("o", 1000, 1000, sim::PloidyMode::binary);
  for (long r = 0; r < 1000; ++r)
    for (long c = 0; c < 1000; ++c) ones(r, c) = 1;
  auto z = seq::thin_matrix(ones, half, rng::Stream(5));
  long kept = 0;
  for (long r = 0; r < 1000; ++r)
    for (long c = 0; c < 1000; ++c) kept += z(r, c);
  const double frac = kept / 1e6;
  CHECK(std::fabs(frac - 0.5) <= 3.0 * std::sqrt(0.25 / 1e6));
}

TEST_CASE("read-level thinning agrees with the marginal shortcut") {
  const seq::SeqConfig cfg{35.0, 30, 0.05};
  sim::GenotypeMatrix ones("o", 200, 200, sim::PloidyMode::binary);
  for (long r = 0; r < 200; ++r)
    for (long c = 0; c < 200; ++c) ones(r, c) = 1;
  auto za = seq::thin_matrix(ones, cfg, rng::Stream(6));
  auto zb = seq::thin_matrix_by_reads(ones, cfg, rng::Stream(7));
  long ka = 0, kb = 0;
  for (long r = 0; r < 200; ++r)
    for (long c = 0; c < 200; ++c) {
      ka += za(r, c);
      kb += zb(r, c);
    }
  const double phi = seq::detection_prob(cfg);
  const double sd_diff = std::sqrt(2.0 * 4e4 * phi * (1.0 - phi));
  CHECK(std::fabs(static_cast<double>(ka) - static_cast<double>(kb)) <= 4.0 * sd_diff);
}

TEST_CASE("cost model") {
  CHECK(seq::cost(10, 30.0, {0.0, 1.0}) == doctest::Approx(300.0));
  CHECK(seq::cost(0, 50.0, {7.0, 2.0}) == doctest::Approx(7.0));
  CHECK(seq::cost(25, 40.0, {0.0, 2.0}) == doctest::Approx(2000.0));
  // affine in samples and depth
  const seq::CostModel cm{3.0, 1.7};
  CHECK(seq::cost(12, 9.0, cm) - seq::cost(11, 9.0, cm) ==
        doctest::Approx(seq::cost(2, 9.0, cm) - seq::cost(1, 9.0, cm)));
}

TEST_CASE("max samples under budget") {
  CHECK(seq::max_samples_under_budget(5000.0, 25.0, {0.0, 1.0}, 2) == 100);
  CHECK(seq::max_samples_under_budget(100.0, 200.0, {0.0, 1.0}, 2) == 0);
  CHECK(seq::max_samples_under_budget(1001.0, 10.0, {1.0, 1.0}, 2) == 50);
  CHECK_THROWS_AS(seq::max_samples_under_budget(5.0, 10.0, {5.0, 1.0}, 2), domain_error);
  rng::Stream s(1234);
  for (int i = 0; i < 300; ++i) {
    const double budget = 10.0 + 5000.0 * s.uniform();
    const double depth = 0.5 + 60.0 * s.uniform();
    const seq::CostModel cm{5.0 * s.uniform(), 0.2 + 3.0 * s.uniform()};
    if (budget <= cm.fixed_cost) continue;
    const long groups = 1 + static_cast<long>(s.uniform_below(3));
    const long m = seq::max_samples_under_budget(budget, depth, cm, groups);
    CHECK(seq::cost(groups * m, depth, cm) <= budget);
    CHECK(seq::cost(groups * (m + 1), depth, cm) > budget);
  }
}
