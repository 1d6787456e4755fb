#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "rvas/power.hpp"

using namespace rvas;

TEST_CASE("welch df: symmetric, one-sample limit, hand formula") {
  const power::SampleSummary a{1.0, 4.0, 10};
  const power::SampleSummary u{1.0, 4.0, 10};
  CHECK(power::welch_df(a, u) == doctest::Approx(18.0).epsilon(1e-12));

  const power::SampleSummary big{2.0, 5.0, 40};
  const power::SampleSummary tiny{1.0, 1e-30, 17};
  CHECK(power::welch_df(big, tiny) == doctest::Approx(39.0).epsilon(1e-6));

  // independent hand evaluation for (sA2=3, MA=12, sU2=7, MU=30)
  const double va = 3.0 / 12.0, vu = 7.0 / 30.0;
  const double expect = (va + vu) * (va + vu) /
                        (3.0 * 3.0 / (12.0 * 12.0 * 11.0) + 7.0 * 7.0 / (30.0 * 30.0 * 29.0));
  CHECK(power::welch_df({0.0, 3.0, 12}, {0.0, 7.0, 30}) == doctest::Approx(expect).epsilon(1e-12));
  CHECK_THROWS_AS(power::welch_df({1.0, 0.0, 5}, {1.0, 0.0, 5}), numeric_error);
}

TEST_CASE("t statistic: zero, direct value, scale invariance") {
  CHECK(power::t_statistic({1.5, 2.0, 30}, {1.5, 3.0, 30}) == 0.0);
  CHECK(power::t_statistic({2.0, 1.0, 100}, {1.0, 1.0, 100}) ==
        doctest::Approx(7.0710678118654755).epsilon(1e-12));
  const double t1 = power::t_statistic({2.0, 1.5, 50}, {1.2, 0.8, 70});
  const double s = 3.7;
  const double t2 = power::t_statistic({2.0 * s, 1.5 * s * s, 50}, {1.2 * s, 0.8 * s * s, 70});
  CHECK(t1 == doctest::Approx(t2).epsilon(1e-12));
  CHECK_THROWS_AS(power::t_statistic({1.0, 0.0, 5}, {1.0, 0.0, 5}), numeric_error);
}

TEST_CASE("model-based statistic: identical priors and one-population limit") {
  const predict::PriorParams p{10, 4, 0.2};
  CHECK(power::model_based_t(p, p, 100, 100, 1, sim::KtonMode::exact, 0.8) ==
        doctest::Approx(0.0).epsilon(1e-9));
  // negligible unaffected mass: T approaches sqrt(gamma_A)
  const predict::PriorParams tiny{1e-12, 4, 0.2};
  const double ga = predict::gamma_k(p, 0, 100, 1, 1.0, 0.8).expected_count;
  CHECK(power::model_based_t(p, tiny, 100, 100, 1, sim::KtonMode::exact, 0.8) ==
        doctest::Approx(std::sqrt(ga)).epsilon(1e-5));
  CHECK_THROWS_AS(power::model_based_t(p, p, 100, 100, 1, sim::KtonMode::exact, 0.0),
                  numeric_error);
}

TEST_CASE("model-based statistic cross-checked by simulation" * doctest::timeout(300)) {
  // fixed-design pair: affected [10,4,0.2], unaffected [7,3,0.1], depth 30
  const predict::PriorParams pa{10, 4, 0.2};
  const predict::PriorParams pu{7, 3, 0.1};
  const seq::SeqConfig cfg{30.0, 30, 0.05};
  const double phi = seq::detection_prob(cfg);
  const long m = 100, reps = 2000;
  const double t_model = power::model_based_t(pa, pu, m, m, 1, sim::KtonMode::exact, phi);
  CHECK(t_model > 0.0);

  rng::Stream root(314);
  const long batches = 10, per_batch = reps / batches;
  std::vector<double> t_hat(batches);
  for (long bi = 0; bi < batches; ++bi) {
    std::vector<double> ca(per_batch), cu(per_batch);
    for (long r = 0; r < per_batch; ++r) {
      auto sa = root.child(bi).child(r).child(0);
      auto su = root.child(bi).child(r).child(1);
      auto xa = sim::sample_bernoulli_cohort(pa, m, sa);
      auto xu = sim::sample_bernoulli_cohort(pu, m, su);
      auto za = seq::thin_matrix(xa, cfg, sa.child(9));
      auto zu = seq::thin_matrix(xu, cfg, su.child(9));
      ca[r] = static_cast<double>(sim::count_ktons(za, 1, sim::KtonMode::exact));
      cu[r] = static_cast<double>(sim::count_ktons(zu, 1, sim::KtonMode::exact));
    }
    // per-batch plug-in of the model-based statistic from MC moments
    double ma = 0, mu = 0, va = 0, vu = 0;
    for (double v : ca) ma += v;
    for (double v : cu) mu += v;
    ma /= per_batch;
    mu /= per_batch;
    for (double v : ca) va += (v - ma) * (v - ma);
    for (double v : cu) vu += (v - mu) * (v - mu);
    va /= per_batch - 1;
    vu /= per_batch - 1;
    t_hat[bi] = (ma / m - mu / m) / std::sqrt(va / (static_cast<double>(m) * m) +
                                              vu / (static_cast<double>(m) * m));
  }
  const auto est = oracle::summarize_mean(t_hat);
  CHECK(std::fabs(est.mean - t_model) <= 3.0 * est.se);
}

TEST_CASE("power_at: level at the null, saturation, monotonicity") {
  for (double alpha : {1e-4, 0.01, 0.05}) {
    for (double df : {5.0, 18.0, 100.0}) {
      CHECK(power::power_at(0.0, df, alpha) == doctest::Approx(alpha).epsilon(1e-6));
    }
  }
  CHECK(power::power_at(1e3, 18.0, 0.05) == doctest::Approx(1.0).epsilon(1e-6));
  double prev = -1.0;
  for (double stat = 0.0; stat <= 6.0; stat += 0.5) {
    const double v = power::power_at(stat, 24.0, 0.01);
    CHECK(v >= prev - 1e-9);
    prev = v;
  }
  prev = -1.0;
  for (double alpha : {1e-4, 1e-3, 0.01, 0.05, 0.2}) {
    const double v = power::power_at(2.0, 24.0, alpha);
    CHECK(v >= prev - 1e-9);
    prev = v;
  }
  CHECK_THROWS_AS(power::power_at(1.0, 0.0, 0.05), domain_error);
  CHECK_THROWS_AS(power::power_at(1.0, 5.0, 0.0), domain_error);
}

TEST_CASE("power_at vs sampling oracle" * doctest::timeout(120)) {
  const double stat = 3.0, df = 18.0, alpha = 0.05;
  const double crit = numerics::central_t_quantile(1.0 - alpha, df);
  const auto est = oracle::noncentral_t_cdf_mc(crit, df, stat, 10'000'000, rng::Stream(777));
  const double mc_power = 1.0 - est.mean;
  CHECK(std::fabs(power::power_at(stat, df, alpha) - mc_power) <= 3.0 * est.se);
}

TEST_CASE("analytic fixed-design curve reproduces the model-based statistic") {
  const power::AnalyticModel model{{10, 4, 0.2}, {7, 3, 0.1}};
  const seq::SeqConfig base{30.0, 30, 0.05};
  auto curve = power::fixed_design_curve(model, base, {30.0}, {100}, 1, sim::KtonMode::exact,
                                         false, 1e-4);
  REQUIRE(curve.rows.size() == 1);
  const auto& row = curve.rows[0];
  const double phi = seq::detection_prob(base);
  CHECK(row.statistic ==
        doctest::Approx(power::model_based_t({10, 4, 0.2}, {7, 3, 0.1}, 100, 100, 1,
                                             sim::KtonMode::exact, phi))
            .epsilon(1e-12));
  CHECK(row.power >= 0.0);
  CHECK(row.power <= 1.0);
}

TEST_CASE("single-point grid gives a power in [0,1]") {
  const power::AnalyticModel model{{10, 4, 0.2}, {7, 3, 0.1}};
  auto curve = power::fixed_design_curve(model, {30.0, 30, 0.05}, {30.0}, {1}, 1,
                                         sim::KtonMode::exact, false, 0.05);
  REQUIRE(curve.rows.size() == 1);
  CHECK(curve.rows[0].power >= 0.0);
  CHECK(curve.rows[0].power <= 1.0);
}

TEST_CASE("analytic power is monotone on the fixed-design grids") {
  struct Pair {
    predict::PriorParams a, u;
  };
  const std::vector<Pair> pairs = {{{10, 4, 0.2}, {7, 3, 0.1}},
                                   {{15, 8, 0.5}, {14, 6, 0.4}},
                                   {{24, 12, 0.5}, {20, 10, 0.3}}};
  const std::vector<double> depths{22.0, 25.0, 40.0};
  const std::vector<long> sizes{25, 50, 100, 200, 400};
  for (const auto& pr : pairs) {
    auto curve = power::fixed_design_curve(power::AnalyticModel{pr.a, pr.u}, {30.0, 30, 0.05},
                                           depths, sizes, 1, sim::KtonMode::exact, false, 1e-4);
    REQUIRE(curve.rows.size() == depths.size() * sizes.size());
    // non-decreasing in size for each depth
    for (std::size_t d = 0; d < depths.size(); ++d)
      for (std::size_t s = 1; s < sizes.size(); ++s)
        CHECK(curve.rows[d * sizes.size() + s].power >=
              curve.rows[d * sizes.size() + s - 1].power - 1e-12);
    // non-decreasing in depth for each size
    for (std::size_t s = 0; s < sizes.size(); ++s)
      for (std::size_t d = 1; d < depths.size(); ++d)
        CHECK(curve.rows[d * sizes.size() + s].power >=
              curve.rows[(d - 1) * sizes.size() + s].power - 1e-12);
  }
}

TEST_CASE("MC fixed-design curve is ordered by depth within error" * doctest::timeout(300)) {
  power::McModel mc;
  mc.hier = sim::HierParams{{5, 4, 0.5}, {{200, 100}, {150, 100}}};
  mc.replicates = 150;
  mc.stream = rng::Stream(424242);
  mc.threads = 2;
  auto curve = power::fixed_design_curve(mc, {30.0, 30, 0.05}, {25.0, 40.0}, {40, 80}, 1,
                                         sim::KtonMode::exact, false, 1e-3);
  REQUIRE(curve.rows.size() == 4);
  // depth 40 beats depth 25 at the same size, generously within MC error
  CHECK(curve.rows[2].power >= curve.rows[0].power - 0.1);
  CHECK(curve.rows[3].power >= curve.rows[1].power - 0.1);
  // exclusive counting also runs through the MC-only path
  auto excl = power::fixed_design_curve(mc, {30.0, 30, 0.05}, {40.0}, {40}, 1,
                                        sim::KtonMode::exact, true, 1e-3);
  CHECK(excl.rows[0].power >= 0.0);
  CHECK_THROWS_AS(power::fixed_design_curve(power::AnalyticModel{{5, 4, 0.5}, {5, 4, 0.5}},
                                            {30.0, 30, 0.05}, {40.0}, {40}, 1,
                                            sim::KtonMode::exact, true, 1e-3),
                  domain_error);
}

TEST_CASE("fixed-budget curve: feasibility, interior maximum, infeasible error") {
  const power::AnalyticModel model{{10, 4, 0.2}, {7, 3, 0.1}};
  const seq::CostModel cm{0.0, 1.0};
  const auto grid = power::default_depth_grid();
  auto curve = power::fixed_budget_curve(model, {30.0, 30, 0.05}, 5000.0, grid, cm, 1,
                                         sim::KtonMode::exact, false, 1e-4);
  REQUIRE(!curve.rows.empty());
  for (const auto& row : curve.rows) {
    CHECK(seq::cost(2 * row.size, row.depth, cm) <= 5000.0);
    CHECK(row.size == seq::max_samples_under_budget(5000.0, row.depth, cm, 2));
  }
  const auto best = power::optimize_depth(curve.rows);
  CHECK(best.power > curve.rows.front().power);
  CHECK(best.power > curve.rows.back().power);

  CHECK_THROWS_AS(power::fixed_budget_curve(model, {30.0, 30, 0.05}, 10.0, {50.0, 80.0}, cm, 1,
                                            sim::KtonMode::exact, false, 1e-4),
                  numeric_error);
}

TEST_CASE("optimize_depth: single point and tie break toward smaller depth") {
  power::PowerResult a;
  a.depth = 20.0;
  a.power = 0.4;
  CHECK(power::optimize_depth({a}).depth == 20.0);
  power::PowerResult b = a;
  b.depth = 35.0;
  b.power = 0.4;
  power::PowerResult c = a;
  c.depth = 10.0;
  c.power = 0.1;
  CHECK(power::optimize_depth({c, a, b}).depth == 20.0);
  CHECK(power::optimize_depth({b, a, c}).depth == 20.0);
  CHECK_THROWS_AS(power::optimize_depth({}), numeric_error);
}

TEST_CASE("argmax depth recorded under common mass rescaling (no equality asserted)") {
  const power::AnalyticModel base{{10, 4, 0.2}, {7, 3, 0.1}};
  const power::AnalyticModel scaled{predict::PriorParams{10, 4, 0.2}.scaled_mass(3.0),
                                    predict::PriorParams{7, 3, 0.1}.scaled_mass(3.0)};
  const seq::CostModel cm{0.0, 1.0};
  const auto grid = power::default_depth_grid(5.0, 80.0, 16);
  const auto best1 = power::optimize_depth(
      power::fixed_budget_curve(base, {30.0, 30, 0.05}, 5000.0, grid, cm, 1, sim::KtonMode::exact,
                                false, 1e-4)
          .rows);
  const auto best2 = power::optimize_depth(
      power::fixed_budget_curve(scaled, {30.0, 30, 0.05}, 5000.0, grid, cm, 1,
                                sim::KtonMode::exact, false, 1e-4)
          .rows);
  CHECK(best1.depth > 0.0);
  CHECK(best2.depth > 0.0);
  MESSAGE("argmax depth, base mass: ", best1.depth, "; tripled mass: ", best2.depth);
}

TEST_CASE("degenerate grid points pin power to the significance level") {
  // zero detection probability: both populations identically zero
  const power::AnalyticModel model{{10, 4, 0.2}, {7, 3, 0.1}};
  auto curve = power::fixed_design_curve(model, {0.0, 30, 0.05}, {0.0}, {50}, 1,
                                         sim::KtonMode::exact, false, 0.01);
  REQUIRE(curve.rows.size() == 1);
  CHECK(curve.rows[0].degenerate);
  CHECK(curve.rows[0].power == doctest::Approx(0.01));
  CHECK(!curve.warnings.empty());
}
