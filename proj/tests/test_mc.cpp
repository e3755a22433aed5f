#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "slm/config.hpp"
#include "slm/mc.hpp"

using namespace slm;

namespace {

SdeSystem bundled(const std::string& name) {
  return build_system(load_system_config("builtin:" + name));
}

SimConfig coarse() {
  SimConfig c;
  c.dt_base = 1e-3;
  return c;
}

ExplosionEstimate explosion_with(std::size_t hits, std::size_t n, bool undetermined = false) {
  ExplosionEstimate e;
  e.estimate = binomial_estimate(hits, n);
  e.at_lower_barrier = e.estimate;
  e.undetermined = undetermined;
  return e;
}

EstimateWithCI point(double p, double se) {
  EstimateWithCI e;
  e.point = p;
  e.std_error = se;
  return e;
}

}  // namespace

TEST(Estimates, MeanAndBinomial) {
  const auto m = mean_estimate({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(m.point, 2.5);
  // Sample variance 5/3 over n = 4.
  EXPECT_NEAR(m.std_error, std::sqrt(5.0 / 12.0), 1e-12);
  const auto b = binomial_estimate(25, 100);
  EXPECT_DOUBLE_EQ(b.point, 0.25);
  EXPECT_NEAR(b.std_error, std::sqrt(0.25 * 0.75 / 100), 1e-12);
  EXPECT_DOUBLE_EQ(binomial_estimate(0, 50).std_error, 0.0);
  EXPECT_TRUE(point(0.1, 0.05).contains(0.0));
  EXPECT_FALSE(point(0.2, 0.05).contains(0.0));
}

TEST(MonteCarlo, ZeroVolatilityMeanIsExact) {
  SystemSpec s;
  s.name = "flat";
  s.sigma_diag = {"0"};
  s.sigma_bar = "0";
  s.b = "0";
  const auto m = estimate_terminal_mean(SdeSystem::from_spec(s), coarse(), 1, 500, 1);
  EXPECT_EQ(m.estimate.point, 1.0);
  EXPECT_EQ(m.estimate.std_error, 0.0);
  EXPECT_FALSE(m.biased);
}

TEST(MonteCarlo, GbmDoesNotExplodeUnderFoellmer) {
  const auto e = estimate_explosion_probability(bundled("gbm"), coarse(), 3, 2000,
                                                MeasureTag::foellmer(1), 1);
  EXPECT_TRUE(e.estimate.contains(0.0));
  EXPECT_EQ(e.estimate.point, 0.0);
  EXPECT_FALSE(e.undetermined);
  EXPECT_TRUE(e.hit_times.empty());
}

TEST(MonteCarlo, InverseBesselAgainstClosedForm) {
  const auto sys = bundled("inverse_bessel");
  const auto m = estimate_terminal_mean(sys, coarse(), 5, 4000, 1);
  EXPECT_TRUE(m.estimate.contains(oracle::inverse_bessel_mean()))
      << m.estimate.point << " +- " << m.estimate.std_error;
  const auto e = estimate_explosion_probability(sys, coarse(), 6, 4000, MeasureTag::foellmer(1), 1);
  EXPECT_TRUE(e.estimate.contains(oracle::inverse_bessel_explosion()))
      << e.estimate.point << " +- " << e.estimate.std_error;
  ASSERT_FALSE(e.hit_times.empty());
  EXPECT_TRUE(std::is_sorted(e.hit_times.begin(), e.hit_times.end()));
  EXPECT_LE(e.hit_times.back(), sys.horizon());
  EXPECT_GE(e.at_lower_barrier.point, e.estimate.point);
}

TEST(MonteCarlo, SamplingOracleAgreesWithClosedForm) {
  const auto s = oracle::inverse_bessel_mean_by_sampling(200000, 11);
  EXPECT_NEAR(s.mean, oracle::inverse_bessel_mean(), 4 * s.std_error);
}

TEST(Duality, HoldsForKnownSystems) {
  for (const std::string name : {"gbm", "inverse_bessel", "cev_1_5"}) {
    const auto r = duality_check(bundled(name), coarse(), 42, 2000, 1);
    EXPECT_TRUE(r.pass) << name << " gap " << r.gap << " se " << r.combined_se;
    EXPECT_NEAR(r.gap, std::fabs(r.mean.estimate.point + r.explosion.estimate.point - 1), 1e-15);
  }
}

TEST(Duality, SeedsAreIndependentPerSide) {
  EXPECT_NE(seed_for_original(42), seed_for_foellmer(42, 1));
  EXPECT_NE(seed_for_foellmer(42, 1), seed_for_foellmer(42, 2));
  EXPECT_EQ(seed_for_foellmer(42, 2), seed_for_foellmer(42, 2));
}

TEST(Classify, KnownLabels) {
  const auto gbm = classify(bundled("gbm"), coarse(), 42, 2000);
  ASSERT_EQ(gbm.components.size(), 1u);
  EXPECT_EQ(gbm.components[0].final_label, FinalLabel::Martingale);
  EXPECT_EQ(gbm.components[0].analytic_agreement, "NO-ANALYTIC");

  const auto ib = classify(bundled("inverse_bessel"), coarse(), 42, 2000);
  EXPECT_EQ(ib.components[0].final_label, FinalLabel::StrictLocalMartingale);
  EXPECT_NEAR(ib.components[0].defect.point, 1 - ib.components[0].mean.estimate.point, 0.0);
  EXPECT_FALSE(ib.components[0].boundary.consistent_cases.empty());
}

TEST(Classify, StandardErrorScalesWithPathCount) {
  // Low volatility keeps the sample kurtosis, and so the noise in the SE, small.
  SystemSpec spec;
  spec.name = "calm";
  spec.sigma_diag = {"0.3"};
  spec.sigma_bar = "0";
  spec.b = "0";
  const auto sys = SdeSystem::from_spec(spec);
  const auto small = estimate_terminal_mean(sys, coarse(), 9, 1000, 1);
  const auto large = estimate_terminal_mean(sys, coarse(), 9, 10000, 1);
  const double ratio = small.estimate.std_error / large.estimate.std_error;
  EXPECT_NEAR(ratio / std::sqrt(10.0), 1.0, 0.2);
}

TEST(Decide, Rule) {
  EXPECT_EQ(decide(point(0.01, 0.01), explosion_with(0, 1000), false), FinalLabel::Martingale);
  EXPECT_EQ(decide(point(0.3, 0.01), explosion_with(300, 1000), false),
            FinalLabel::StrictLocalMartingale);
  // One side significant, the other not.
  EXPECT_EQ(decide(point(0.3, 0.01), explosion_with(0, 1000), false), FinalLabel::Inconclusive);
  EXPECT_EQ(decide(point(0.0, 0.01), explosion_with(300, 1000), false), FinalLabel::Inconclusive);
  // A negative defect outside the interval is not a martingale either.
  EXPECT_EQ(decide(point(-0.3, 0.01), explosion_with(0, 1000), false), FinalLabel::Inconclusive);
  EXPECT_EQ(decide(point(0.01, 0.01), explosion_with(0, 1000), true), FinalLabel::Inconclusive);
  EXPECT_EQ(decide(point(0.3, 0.01), explosion_with(300, 1000, true), false),
            FinalLabel::Inconclusive);
}

TEST(Decide, IntervalBoundaries) {
  // Lower end exactly at 0 counts as containing 0.
  EXPECT_EQ(decide(point(0.75, 0.25), explosion_with(0, 10), false), FinalLabel::Martingale);
  EXPECT_EQ(decide(point(0.7501, 0.25), explosion_with(0, 10), false), FinalLabel::Inconclusive);
}

TEST(Supermartingale, BoundHoldsForBundledSystems) {
  for (const auto& [path, text] : bundled_configs()) {
    if (path.rfind("systems/", 0) != 0 || path == "systems/example2.json") continue;
    const auto name = path.substr(8, path.size() - 13);
    const auto sys = bundled(name);
    for (std::size_t j = 1; j <= sys.d(); ++j) {
      const auto m = estimate_terminal_mean(sys, coarse(), 77, 500, j);
      EXPECT_LE(m.estimate.point, 1.0 + 3 * m.estimate.std_error) << name << " component " << j;
    }
  }
}

TEST(Boundary, DiagnosticCountsVBoundaryHits) {
  // v = 1 - t on [0, 2] reaches 0 on every path that is not cut short; the
  // diagnostic is about v only, so M's own absorptions do not count.
  SystemSpec s;
  s.name = "drifting_v";
  s.sigma_diag = {"1/x1"};
  s.sigma_bar = "0";
  s.b = "-1";
  s.horizon = 2.0;
  const auto sys = SdeSystem::from_spec(s);
  const auto p = simulate_batch(EffectiveSystem(sys, MeasureTag::original()), coarse(), 1, 200);
  const auto p1 = simulate_batch(EffectiveSystem(sys, MeasureTag::foellmer(1)), coarse(), 2, 200);
  const auto d = boundary_diagnostic(p, p1);
  std::size_t zero = 0;
  for (const auto& o : p.outcomes) zero += o.v_down_time.has_value();
  EXPECT_DOUBLE_EQ(d.under_p.hits_zero.point, static_cast<double>(zero) / 200.0);
  EXPECT_GT(zero, 50u);
  EXPECT_DOUBLE_EQ(d.under_p.hits_infinity.point, 0.0);
  EXPECT_DOUBLE_EQ(d.under_pj.hits_infinity.point, 0.0);
  EXPECT_EQ(d.consistent_cases, std::vector<std::string>{"martingale case 2"});
}

TEST(Classify, LabelsHaveNames) {
  EXPECT_STREQ(to_string(FinalLabel::Martingale), "Martingale");
  EXPECT_STREQ(to_string(FinalLabel::StrictLocalMartingale), "StrictLocalMartingale");
  EXPECT_STREQ(to_string(FinalLabel::Inconclusive), "Inconclusive");
}
