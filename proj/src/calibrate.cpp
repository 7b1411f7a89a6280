#include "rangevar/calibrate.hpp"

#include <cmath>
#include <string>

#include "rangevar/errors.hpp"

namespace rangevar {

void CalibrationConfig::validate() const {
  if (!(r_ref > 0.0) || !std::isfinite(r_ref)) {
    throw Error(ErrorCode::InvalidConfig, "r_ref must be finite and > 0");
  }
}

double calibrate_intensity(double mean_intensity, double mean_range, const CalibrationConfig& cfg) {
  cfg.validate();
  if (!(mean_range > 0.0)) {
    throw Error(ErrorCode::NonPositiveRange, "mean range must be > 0");
  }
  if (!(mean_intensity >= 0.0)) {
    throw Error(ErrorCode::NegativeIntensity, "mean intensity must be >= 0");
  }
  return mean_intensity * cfg.r_ref / (mean_range * mean_range);
}

std::vector<CalibratedTickStats> calibrate_ticks(std::span<const TickStats> stats,
                                                 const CalibrationConfig& cfg) {
  cfg.validate();
  std::vector<CalibratedTickStats> out;
  out.reserve(stats.size());
  for (const auto& s : stats) {
    try {
      out.push_back({s, calibrate_intensity(s.mean_intensity, s.mean_range, cfg)});
    } catch (const Error& e) {
      throw Error(e.code(), "tick " + std::to_string(s.tick_id) + ": " + e.what());
    }
  }
  return out;
}

double default_reference_range(std::span<const TickStats> stats) {
  if (stats.empty()) throw Error(ErrorCode::EmptyStats, "no ticks to derive r_ref from");
  double sum = 0.0;
  for (const auto& s : stats) sum += s.mean_range;
  return sum / static_cast<double>(stats.size());
}

}  // namespace rangevar
