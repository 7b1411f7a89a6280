#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rangevar/ingest.hpp"

namespace rangevar {

enum class TickMode {
  // Observations sharing an exactly equal vertical angle form one tick.
  ExplicitColumn,
  // Vertical angles are snapped to a regular lattice of width tick_step.
  QuantizeByStep,
};

struct PreprocessConfig {
  double sigma_multiplier = 3.0;
  std::size_t min_tick_count = 30;
  TickMode tick_mode = TickMode::QuantizeByStep;
  std::optional<double> tick_step;  // radians; estimated when absent
  std::size_t max_passes = 1;

  /// Throws InvalidConfig when sigma_multiplier <= 0 or min_tick_count < 2.
  void validate() const;
};

/// All observations sharing one vertical tick, across profiles.
struct TickGroup {
  std::int64_t tick_id = 0;
  double vertical_angle_center = 0.0;
  std::vector<double> ranges;       // meters
  std::vector<double> intensities;
  std::vector<std::size_t> members;  // indices into the dataset
};

struct TickStats {
  std::int64_t tick_id = 0;
  double vertical_angle_center = 0.0;
  double mean_intensity = 0.0;
  double mean_range = 0.0;  // meters
  double std_range = 0.0;   // millimeters
  std::size_t count = 0;

  bool operator==(const TickStats&) const = default;
};

/// Tick step used by QuantizeByStep when none is configured: the median of
/// the absolute vertical-angle increments between consecutive observations
/// of the same profile. Falls back to the median positive gap between sorted
/// distinct angles when no profile holds two distinct angles. Returns
/// nullopt when every observation has the same vertical angle.
std::optional<double> estimate_tick_step(const ScanDataset& ds);

/// Groups sorted by vertical_angle_center; every observation lands in
/// exactly one group.
std::vector<TickGroup> group_by_vertical_tick(const ScanDataset& ds, const PreprocessConfig& cfg);

double mean(std::span<const double> values);
double median(std::span<const double> values);

/// Sample standard deviation about the arithmetic mean (n - 1 divisor).
double std_about_mean(std::span<const double> values);

/// Standard deviation about the median, sqrt(sum (y - median)^2 / (n - 1)).
double std_about_median(std::span<const double> values);

/// Flags values deviating from the mean or the median by more than
/// k times the respective standard deviation. Strict inequality.
std::vector<bool> flag_channel(std::span<const double> values, double k);

struct OutlierMask {
  std::vector<bool> flagged;
  std::size_t range_flags = 0;
  std::size_t intensity_flags = 0;

  std::size_t count() const;
};

/// Union over the range and intensity channels of the mean/median rule.
OutlierMask detect_outliers(const TickGroup& group, const PreprocessConfig& cfg);

struct PreprocessResult {
  std::vector<TickStats> ticks;
  std::size_t group_count = 0;
  std::size_t removed_outliers = 0;
  std::size_t dropped_ticks = 0;
  double tick_step = 0.0;  // 0 for ExplicitColumn
};

/// Group -> outlier removal (max_passes batch passes) -> count filter ->
/// per-tick statistics. Throws NoSurvivingTicks when the filter empties
/// the result.
PreprocessResult preprocess_detailed(const ScanDataset& ds, const PreprocessConfig& cfg);
std::vector<TickStats> preprocess(const ScanDataset& ds, const PreprocessConfig& cfg);

}  // namespace rangevar
