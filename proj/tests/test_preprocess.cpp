#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rangevar/errors.hpp"
#include "rangevar/preprocess.hpp"
#include "rangevar/simulate.hpp"

using namespace rangevar;

namespace {

ScanDataset ladder(int profiles, const std::vector<double>& angles, double jitter, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-jitter, jitter);
  ScanDataset ds;
  for (int p = 0; p < profiles; ++p) {
    for (const double a : angles) ds.observations.push_back({p, a + u(rng), 0.0, 10.0, 1000.0});
  }
  return ds;
}

TickGroup group_of(const std::vector<double>& ranges, const std::vector<double>& intensities) {
  TickGroup g;
  g.ranges = ranges;
  g.intensities = intensities;
  for (std::size_t i = 0; i < ranges.size(); ++i) g.members.push_back(i);
  return g;
}

std::vector<double> gaussian(std::size_t n, double mu, double sigma, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(mu, sigma);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST(GroupByTick, IdenticalLaddersGiveOneGroupPerAngle) {
  const auto ds = ladder(2, {0.10, 0.11, 0.12, 0.13, 0.14}, 0.0, 1);
  for (const auto mode : {TickMode::ExplicitColumn, TickMode::QuantizeByStep}) {
    PreprocessConfig cfg;
    cfg.tick_mode = mode;
    const auto groups = group_by_vertical_tick(ds, cfg);
    ASSERT_EQ(groups.size(), 5u);
    for (const auto& g : groups) EXPECT_EQ(g.ranges.size(), 2u);
    for (std::size_t k = 1; k < groups.size(); ++k) {
      EXPECT_LT(groups[k - 1].vertical_angle_center, groups[k].vertical_angle_center);
    }
  }
}

TEST(GroupByTick, JitteredLadderMatchesNearestCenter) {
  const std::vector<double> centers = {0.20, 0.21, 0.22, 0.23, 0.24};
  const auto ds = ladder(40, centers, 0.01 * 0.01, 3);
  PreprocessConfig cfg;
  const auto groups = group_by_vertical_tick(ds, cfg);
  ASSERT_EQ(groups.size(), 5u);

  std::vector<double> angles;
  for (const auto& o : ds.observations) angles.push_back(o.vertical_angle);
  const auto expected = oracle::nearest_center(angles, centers);
  for (std::size_t k = 0; k < groups.size(); ++k) {
    for (const auto idx : groups[k].members) EXPECT_EQ(expected[idx], k);
    EXPECT_NEAR(groups[k].vertical_angle_center, centers[k], 0.0003);
  }
}

TEST(GroupByTick, MembersWithinHalfStepOfCenter) {
  const auto ds = ladder(20, {0.0, 0.002, 0.004, 0.006}, 0.00002, 9);
  PreprocessConfig cfg;
  const auto step = estimate_tick_step(ds);
  ASSERT_TRUE(step);
  for (const auto& g : group_by_vertical_tick(ds, cfg)) {
    for (const auto idx : g.members) {
      EXPECT_LE(std::abs(ds.observations[idx].vertical_angle - g.vertical_angle_center), *step / 2);
    }
  }
}

TEST(GroupByTick, SingleObservation) {
  ScanDataset ds;
  ds.observations.push_back({0, 0.3, 0.0, 5.0, 10.0});
  for (const auto mode : {TickMode::ExplicitColumn, TickMode::QuantizeByStep}) {
    PreprocessConfig cfg;
    cfg.tick_mode = mode;
    const auto groups = group_by_vertical_tick(ds, cfg);
    ASSERT_EQ(groups.size(), 1u);
    EXPECT_EQ(groups[0].members.size(), 1u);
  }
}

TEST(GroupByTick, PartitionsTheDataset) {
  const auto ds = ladder(37, {0.1, 0.105, 0.11, 0.115, 0.12, 0.125}, 0.00004, 4);
  PreprocessConfig cfg;
  const auto groups = group_by_vertical_tick(ds, cfg);
  std::vector<int> seen(ds.observations.size(), 0);
  std::size_t total = 0;
  for (const auto& g : groups) {
    total += g.members.size();
    for (const auto idx : g.members) ++seen[idx];
  }
  EXPECT_EQ(total, ds.observations.size());
  EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
}

TEST(GroupByTick, RejectsNonPositiveStep) {
  const auto ds = ladder(2, {0.1, 0.2}, 0.0, 1);
  PreprocessConfig cfg;
  cfg.tick_step = 0.0;
  EXPECT_THROW(group_by_vertical_tick(ds, cfg), Error);
}

TEST(StdAboutMean, HandValues) {
  EXPECT_DOUBLE_EQ(std_about_mean(std::vector<double>{1, 2, 3}), 1.0);
  EXPECT_DOUBLE_EQ(std_about_mean(std::vector<double>{5, 5, 5, 5}), 0.0);
}

TEST(StdAboutMean, SeededStandardNormal) {
  const auto v = gaussian(10000, 0.0, 1.0, 2024);
  EXPECT_NEAR(std_about_mean(v), 1.0, 0.03);
}

TEST(StdAboutMean, TooFewValues) {
  try {
    std_about_mean(std::vector<double>{1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewValues);
  }
  EXPECT_THROW(std_about_median(std::vector<double>{}), Error);
}

TEST(StdAboutMedian, HandValues) {
  EXPECT_DOUBLE_EQ(std_about_median(std::vector<double>{1, 2, 3}), 1.0);
  EXPECT_NEAR(std_about_median(std::vector<double>{0, 0, 0, 4}), 2.309401076758503, 1e-15);
  EXPECT_DOUBLE_EQ(median(std::vector<double>{4, 1, 3, 2}), 2.5);
}

TEST(StdAboutMedian, MatchesOracleAndDominatesMeanVersion) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> len(2, 200);
  std::lognormal_distribution<double> val(0.0, 1.5);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> v(static_cast<std::size_t>(len(rng)));
    for (auto& x : v) x = val(rng) - 2.0;
    const double med = std_about_median(v);
    const double mea = std_about_mean(v);
    EXPECT_NEAR(med, oracle::std_about_median(v), 1e-12);
    EXPECT_NEAR(mea, oracle::std_about_mean(v), 1e-12);
    EXPECT_GE(med, mea * (1 - 1e-14));
  }
}

TEST(DetectOutliers, SingleSpikeAmongConstants) {
  std::vector<double> ranges(30, 1.0);
  ranges.push_back(100.0);

  // Rule inputs computed by the reference formulas.
  const double spike_dev = std::abs(100.0 - static_cast<double>(oracle::mean(ranges)));
  const double three_sigma = 3.0 * oracle::std_about_mean(ranges);
  EXPECT_NEAR(spike_dev, 95.806, 1e-3);
  EXPECT_NEAR(three_sigma, 53.34, 1e-2);

  const auto g = group_of(ranges, std::vector<double>(31, 500.0));
  const auto mask = detect_outliers(g, PreprocessConfig{});
  EXPECT_EQ(mask.count(), 1u);
  EXPECT_TRUE(mask.flagged.back());
  EXPECT_EQ(mask.range_flags, 1u);
  EXPECT_EQ(mask.intensity_flags, 0u);
}

TEST(DetectOutliers, IdenticalValuesNeverFlag) {
  const auto g = group_of(std::vector<double>(50, 7.5), std::vector<double>(50, 3.0));
  EXPECT_EQ(detect_outliers(g, PreprocessConfig{}).count(), 0u);
}

TEST(DetectOutliers, IntensitySpikeIsFlaggedThroughEitherChannel) {
  SimulationConfig cfg;
  cfg.k_system = 1e7;
  cfg.boards = {{0.5, 10.0, 0.0, 1, 400}};
  cfg.seed = 17;
  const auto sim = simulate_profiles(cfg);
  auto g = group_by_vertical_tick(sim.dataset, PreprocessConfig{}).front();
  const std::size_t spike = 123;
  g.intensities[spike] *= 5.0;

  const auto mask = detect_outliers(g, PreprocessConfig{});
  EXPECT_TRUE(mask.flagged[spike]);

  // Direct evaluation of the rule on each channel.
  auto rule = [](const std::vector<double>& v, std::size_t i) {
    const double m = static_cast<double>(oracle::mean(v));
    const double md = static_cast<double>(oracle::median(v));
    return std::abs(v[i] - m) > 3 * oracle::std_about_mean(v) ||
           std::abs(v[i] - md) > 3 * oracle::std_about_median(v);
  };
  EXPECT_FALSE(rule(g.ranges, spike));
  EXPECT_TRUE(rule(g.intensities, spike));
  for (std::size_t i = 0; i < g.ranges.size(); ++i) {
    EXPECT_EQ(mask.flagged[i], rule(g.ranges, i) || rule(g.intensities, i)) << i;
  }
}

TEST(DetectOutliers, FlagsAreScaleEquivariant) {
  auto ranges = gaussian(2000, 10.0, 0.002, 8);
  ranges[5] = 10.05;
  auto intens = gaussian(2000, 300.0, 20.0, 9);
  const auto base = detect_outliers(group_of(ranges, intens), PreprocessConfig{});
  for (const double lambda : {0.001, 0.5, 4.0, 1000.0}) {
    auto r = ranges;
    auto i = intens;
    for (auto& x : r) x *= lambda;
    for (auto& x : i) x *= lambda;
    EXPECT_EQ(detect_outliers(group_of(r, i), PreprocessConfig{}).flagged, base.flagged) << lambda;
  }
}

TEST(DetectOutliers, CleanGaussianFlagRate) {
  const auto r = gaussian(10000, 25.0, 0.001, 31);
  const auto i = gaussian(10000, 5000.0, 100.0, 32);
  const auto mask = detect_outliers(group_of(r, i), PreprocessConfig{});
  EXPECT_LE(mask.range_flags, 80u);
  EXPECT_LE(mask.intensity_flags, 80u);
}

TEST(DetectOutliers, IteratedPassesReachAFixedPoint) {
  auto r = gaussian(3000, 10.0, 0.001, 41);
  for (std::size_t k = 0; k < 30; ++k) r[k * 100] += 0.02;
  ScanDataset ds;
  for (std::size_t k = 0; k < r.size(); ++k) ds.observations.push_back({static_cast<std::int64_t>(k), 0.1, 0.0, r[k], 10.0});
  PreprocessConfig cfg;
  cfg.max_passes = 50;
  const auto stats = preprocess(ds, cfg);
  ASSERT_EQ(stats.size(), 1u);

  // Rebuild the surviving group and check no further flags remain.
  cfg.max_passes = 1;
  auto g = group_by_vertical_tick(ds, cfg).front();
  for (int pass = 0; pass < 50; ++pass) {
    const auto mask = detect_outliers(g, cfg);
    if (mask.count() == 0) break;
    TickGroup kept;
    for (std::size_t i = 0; i < mask.flagged.size(); ++i) {
      if (!mask.flagged[i]) {
        kept.ranges.push_back(g.ranges[i]);
        kept.intensities.push_back(g.intensities[i]);
      }
    }
    g = kept;
  }
  EXPECT_EQ(detect_outliers(g, cfg).count(), 0u);
  EXPECT_EQ(g.ranges.size(), stats[0].count);
}

TEST(Preprocess, RecoversTruthSigmaPerTick) {
  SimulationConfig cfg;
  cfg.k_system = 1e7;
  cfg.boards = {{0.9, 10.0, 0.0, 3, 3000}, {0.05, 10.0, 0.0, 3, 3000}, {0.3, 25.0, 0.0, 3, 3000}};
  cfg.seed = 99;
  const auto sim = simulate_profiles(cfg);
  const auto stats = preprocess(sim.dataset, PreprocessConfig{});
  ASSERT_EQ(stats.size(), sim.truth.ticks.size());
  for (std::size_t k = 0; k < stats.size(); ++k) {
    const auto& truth = sim.truth.ticks[k];
    EXPECT_EQ(stats[k].tick_id, truth.tick_id);
    const double se = truth.true_sigma_mm / std::sqrt(2.0 * static_cast<double>(stats[k].count));
    EXPECT_NEAR(stats[k].std_range, truth.true_sigma_mm, 4 * se) << "tick " << k;
    EXPECT_DOUBLE_EQ(stats[k].mean_intensity, truth.true_intensity);
    EXPECT_NEAR(stats[k].mean_range, truth.distance, 1e-3);
    EXPECT_GE(stats[k].count, 30u);
  }
}

TEST(Preprocess, UnderPopulatedTicksLeaveNothing) {
  const auto ds = ladder(5, {0.1, 0.2, 0.3}, 0.0, 2);
  try {
    preprocess(ds, PreprocessConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoSurvivingTicks);
  }
}

TEST(Preprocess, InjectedOutliersAreRemoved) {
  SimulationConfig cfg;
  cfg.k_system = 1e7;
  cfg.boards = {{0.9, 10.0, 0.0, 4, 3000}, {0.1, 10.0, 0.0, 4, 3000}};
  cfg.seed = 123;
  const auto clean = preprocess(simulate_profiles(cfg).dataset, PreprocessConfig{});
  cfg.outliers = {0.01, 10.0};
  const auto dirty_sim = simulate_profiles(cfg);
  EXPECT_FALSE(dirty_sim.truth.outlier_indices.empty());
  const auto dirty = preprocess(dirty_sim.dataset, PreprocessConfig{});
  ASSERT_EQ(clean.size(), dirty.size());
  for (std::size_t k = 0; k < clean.size(); ++k) {
    const double se = clean[k].std_range / std::sqrt(2.0 * static_cast<double>(clean[k].count));
    EXPECT_NEAR(dirty[k].std_range, clean[k].std_range, 2 * se) << "tick " << k;
  }
}

TEST(Preprocess, StdReportedInMillimeters) {
  ScanDataset ds;
  std::vector<double> ranges;
  for (int p = 0; p < 40; ++p) {
    ranges.push_back(p % 2 ? 10.001 : 9.999);
    ds.observations.push_back({p, 0.0, 0.0, ranges.back(), 50.0});
  }
  const auto stats = preprocess(ds, PreprocessConfig{});
  ASSERT_EQ(stats.size(), 1u);
  EXPECT_NEAR(stats[0].std_range, 1000.0 * oracle::std_about_mean(ranges), 1e-9);
  EXPECT_NEAR(stats[0].std_range, 1.0127, 1e-4);
}

TEST(PreprocessConfig, Validation) {
  PreprocessConfig cfg;
  cfg.sigma_multiplier = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.min_tick_count = 1;
  EXPECT_THROW(cfg.validate(), Error);
}
