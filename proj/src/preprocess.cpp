#include "rangevar/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "rangevar/errors.hpp"

namespace rangevar {

void PreprocessConfig::validate() const {
  if (!(sigma_multiplier > 0.0) || !std::isfinite(sigma_multiplier)) {
    throw Error(ErrorCode::InvalidConfig, "sigma_multiplier must be > 0");
  }
  if (min_tick_count < 2) throw Error(ErrorCode::InvalidConfig, "min_tick_count must be >= 2");
  if (max_passes < 1) throw Error(ErrorCode::InvalidConfig, "max_passes must be >= 1");
  if (tick_step && !(*tick_step > 0.0 && std::isfinite(*tick_step))) {
    throw Error(ErrorCode::DegenerateTicks, "tick_step must be finite and > 0");
  }
}

namespace {

double median_of(std::vector<double> v) {
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

void require_two(std::span<const double> values) {
  if (values.size() < 2) {
    throw Error(ErrorCode::TooFewValues,
                "need at least 2 values, got " + std::to_string(values.size()));
  }
}

double std_about(std::span<const double> values, double center) {
  double sum = 0.0;
  for (const double y : values) sum += (y - center) * (y - center);
  return std::sqrt(sum / static_cast<double>(values.size() - 1));
}

}  // namespace

std::optional<double> estimate_tick_step(const ScanDataset& ds) {
  std::map<std::int64_t, double> last_angle;
  std::vector<double> increments;
  for (const auto& o : ds.observations) {
    const auto [it, inserted] = last_angle.try_emplace(o.profile_index, o.vertical_angle);
    if (!inserted) {
      const double d = std::abs(o.vertical_angle - it->second);
      if (d > 0.0) increments.push_back(d);
      it->second = o.vertical_angle;
    }
  }
  if (!increments.empty()) return median_of(std::move(increments));

  std::vector<double> angles;
  angles.reserve(ds.observations.size());
  for (const auto& o : ds.observations) angles.push_back(o.vertical_angle);
  std::sort(angles.begin(), angles.end());
  std::vector<double> gaps;
  for (std::size_t i = 1; i < angles.size(); ++i) {
    if (angles[i] > angles[i - 1]) gaps.push_back(angles[i] - angles[i - 1]);
  }
  if (gaps.empty()) return std::nullopt;
  return median_of(std::move(gaps));
}

std::vector<TickGroup> group_by_vertical_tick(const ScanDataset& ds, const PreprocessConfig& cfg) {
  if (ds.observations.empty()) throw Error(ErrorCode::EmptyDataset, "nothing to group");
  if (cfg.tick_step && !(*cfg.tick_step > 0.0 && std::isfinite(*cfg.tick_step))) {
    throw Error(ErrorCode::DegenerateTicks, "tick_step must be finite and > 0");
  }

  std::vector<TickGroup> groups;
  auto add = [](TickGroup& g, const PolarObservation& o, std::size_t index) {
    g.ranges.push_back(o.range);
    g.intensities.push_back(o.intensity);
    g.members.push_back(index);
  };

  if (cfg.tick_mode == TickMode::ExplicitColumn) {
    std::map<double, TickGroup> by_angle;
    for (std::size_t i = 0; i < ds.observations.size(); ++i) {
      const auto& o = ds.observations[i];
      auto& g = by_angle[o.vertical_angle];
      g.vertical_angle_center = o.vertical_angle;
      add(g, o, i);
    }
    std::int64_t id = 0;
    for (auto& [angle, g] : by_angle) {
      g.tick_id = id++;
      groups.push_back(std::move(g));
    }
    return groups;
  }

  const auto step = cfg.tick_step ? cfg.tick_step : estimate_tick_step(ds);
  const double origin =
      std::min_element(ds.observations.begin(), ds.observations.end(),
                       [](const auto& l, const auto& r) { return l.vertical_angle < r.vertical_angle; })
          ->vertical_angle;
  if (!step) {
    // Every angle identical: a single tick.
    TickGroup g;
    g.vertical_angle_center = origin;
    for (std::size_t i = 0; i < ds.observations.size(); ++i) add(g, ds.observations[i], i);
    groups.push_back(std::move(g));
    return groups;
  }
  if (!(*step > 0.0) || !std::isfinite(*step)) {
    throw Error(ErrorCode::DegenerateTicks, "estimated tick step is not positive");
  }

  std::map<std::int64_t, TickGroup> by_id;
  for (std::size_t i = 0; i < ds.observations.size(); ++i) {
    const auto& o = ds.observations[i];
    const auto id = std::llround((o.vertical_angle - origin) / *step);
    auto& g = by_id[id];
    g.tick_id = id;
    g.vertical_angle_center = origin + static_cast<double>(id) * *step;
    add(g, o, i);
  }
  groups.reserve(by_id.size());
  for (auto& [id, g] : by_id) groups.push_back(std::move(g));
  return groups;
}

double mean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::TooFewValues, "mean of an empty list");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double median(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::TooFewValues, "median of an empty list");
  return median_of(std::vector<double>(values.begin(), values.end()));
}

double std_about_mean(std::span<const double> values) {
  require_two(values);
  return std_about(values, mean(values));
}

double std_about_median(std::span<const double> values) {
  require_two(values);
  return std_about(values, median(values));
}

std::vector<bool> flag_channel(std::span<const double> values, double k) {
  require_two(values);
  const double m = mean(values);
  const double med = median(values);
  const double limit_mean = k * std_about(values, m);
  const double limit_median = k * std_about(values, med);
  std::vector<bool> flags(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    flags[i] = std::abs(values[i] - m) > limit_mean || std::abs(values[i] - med) > limit_median;
  }
  return flags;
}

std::size_t OutlierMask::count() const {
  return static_cast<std::size_t>(std::count(flagged.begin(), flagged.end(), true));
}

OutlierMask detect_outliers(const TickGroup& group, const PreprocessConfig& cfg) {
  const auto range_flags = flag_channel(group.ranges, cfg.sigma_multiplier);
  const auto intensity_flags = flag_channel(group.intensities, cfg.sigma_multiplier);
  OutlierMask mask;
  mask.flagged.resize(range_flags.size());
  for (std::size_t i = 0; i < range_flags.size(); ++i) {
    mask.flagged[i] = range_flags[i] || intensity_flags[i];
    mask.range_flags += range_flags[i];
    mask.intensity_flags += intensity_flags[i];
  }
  return mask;
}

PreprocessResult preprocess_detailed(const ScanDataset& ds, const PreprocessConfig& cfg) {
  cfg.validate();
  PreprocessResult result;
  if (cfg.tick_mode == TickMode::QuantizeByStep) {
    result.tick_step = cfg.tick_step ? *cfg.tick_step : estimate_tick_step(ds).value_or(0.0);
  }
  auto groups = group_by_vertical_tick(ds, cfg);
  result.group_count = groups.size();

  for (auto& g : groups) {
    for (std::size_t pass = 0; pass < cfg.max_passes && g.ranges.size() >= 2; ++pass) {
      const auto mask = detect_outliers(g, cfg);
      if (mask.count() == 0) break;
      TickGroup kept;
      kept.tick_id = g.tick_id;
      kept.vertical_angle_center = g.vertical_angle_center;
      for (std::size_t i = 0; i < mask.flagged.size(); ++i) {
        if (mask.flagged[i]) continue;
        kept.ranges.push_back(g.ranges[i]);
        kept.intensities.push_back(g.intensities[i]);
        kept.members.push_back(g.members[i]);
      }
      result.removed_outliers += mask.count();
      g = std::move(kept);
    }

    if (g.ranges.size() < cfg.min_tick_count) {
      ++result.dropped_ticks;
      continue;
    }
    TickStats s;
    s.tick_id = g.tick_id;
    s.vertical_angle_center = g.vertical_angle_center;
    s.mean_intensity = mean(g.intensities);
    s.mean_range = mean(g.ranges);
    s.std_range = 1000.0 * std_about_mean(g.ranges);
    s.count = g.ranges.size();
    result.ticks.push_back(s);
  }

  if (result.ticks.empty()) {
    throw Error(ErrorCode::NoSurvivingTicks,
                "all " + std::to_string(result.group_count) + " ticks have fewer than " +
                    std::to_string(cfg.min_tick_count) + " observations");
  }
  return result;
}

std::vector<TickStats> preprocess(const ScanDataset& ds, const PreprocessConfig& cfg) {
  return preprocess_detailed(ds, cfg).ticks;
}

}  // namespace rangevar
