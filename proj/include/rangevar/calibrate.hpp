#pragma once

#include <span>
#include <vector>

#include "rangevar/preprocess.hpp"

namespace rangevar {

struct CalibrationConfig {
  double r_ref = 1.0;  // meters

  void validate() const;
};

struct CalibratedTickStats {
  TickStats stats;
  double calibrated_intensity = 0.0;

  bool operator==(const CalibratedTickStats&) const = default;
};

/// Removes the inverse-square range effect from a tick's mean scaled
/// intensity: mean_intensity * r_ref / mean_range^2.
double calibrate_intensity(double mean_intensity, double mean_range, const CalibrationConfig& cfg);

std::vector<CalibratedTickStats> calibrate_ticks(std::span<const TickStats> stats,
                                                 const CalibrationConfig& cfg);

/// Mean of the tick mean ranges; the CLI's default reference range.
double default_reference_range(std::span<const TickStats> stats);

}  // namespace rangevar
