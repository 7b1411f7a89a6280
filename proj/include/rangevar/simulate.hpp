#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rangevar/ingest.hpp"

namespace rangevar {

/// One reflectance panel scanned in profile mode. Every tick of the panel
/// sees the same reflectivity, distance and incidence angle.
struct Board {
  double reflectivity = 1.0;     // (0, 1]
  double distance = 10.0;        // meters
  double incidence_angle = 0.0;  // radians, [0, pi/2)
  std::size_t tick_count = 1;
  std::size_t profile_count = 3000;
};

enum class ScalingKind {
  None,
  // recorded = I * mean_range^2 / r_ref, inverted exactly by calibrate_intensity.
  InverseSquare,
  // Piecewise-linear map of the true intensity through a monotone table.
  CustomMonotone,
};

struct IntensityScaling {
  ScalingKind kind = ScalingKind::None;
  double r_ref = 10.0;
  std::vector<std::pair<double, double>> table;  // (true, recorded), strictly increasing
};

struct OutlierInjection {
  double fraction = 0.0;  // [0, 1)
  double magnitude_sigma = 10.0;
};

struct TruthModel {
  double a = 29853.0;
  double b = -1.02;
  double c = 0.08;
};

struct SimulationConfig {
  // Lumped instrument constant I_t * D_r^2 * n_sys * n_atm / 4.
  double k_system = 1.0;
  std::vector<Board> boards;
  TruthModel truth;
  IntensityScaling scaling;
  OutlierInjection outliers;
  std::uint64_t seed = 0;
  double vertical_start = 0.0;  // radians
  double vertical_step = 1e-3;  // radians between consecutive ticks
  double horizontal_angle = 0.0;
  std::string scanner_id = "simulated";

  /// Throws InvalidConfig.
  void validate() const;
};

struct TickTruth {
  std::int64_t tick_id = 0;
  std::size_t board = 0;
  double distance = 0.0;
  double true_intensity = 0.0;
  double true_sigma_mm = 0.0;
  double recorded_intensity = 0.0;
};

struct GroundTruth {
  std::vector<TickTruth> ticks;                  // ordered by tick_id
  std::vector<std::size_t> outlier_indices;      // observation indices, ascending
};

struct Simulation {
  ScanDataset dataset;
  GroundTruth truth;
};

/// Received intensity of the laser radar equation, k * rho * cos(theta) / r^2.
double radar_intensity(double k_system, double reflectivity, double range, double incidence_angle);

/// Piecewise-linear interpolation through a strictly increasing table,
/// extended linearly beyond both ends.
double interpolate_monotone(const std::vector<std::pair<double, double>>& table, double x);

/// Deterministic in the whole config, seed included. Observations are
/// emitted profile by profile; within a profile boards and ticks follow in
/// order, so tick t of board k sits at vertical_start + (offset_k + t) * step.
Simulation simulate_profiles(const SimulationConfig& cfg);

}  // namespace rangevar
