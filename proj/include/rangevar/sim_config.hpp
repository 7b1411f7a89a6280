#pragma once

#include <filesystem>
#include <string_view>

#include "rangevar/simulate.hpp"

namespace rangevar {

/// Parses the simulation config text format: one `key = value` per line,
/// `#` comments, repeatable `board` entries.
///
///   seed = 42
///   k_system = 2.5e7
///   truth = 29853, -1.02, 0.08          # a, b, c
///   scaling = inverse_square            # none | inverse_square | custom
///   r_ref = 10
///   scaling_table = 1:0.5, 100:20, 1e5:95   # for custom
///   outlier_fraction = 0.01
///   outlier_magnitude_sigma = 10
///   vertical_start = 0.1
///   vertical_step = 0.001
///   horizontal_angle = 0
///   scanner = simulated
///   board = 0.99, 10, 0, 4, 3000        # reflectivity, distance_m, incidence_rad, ticks, profiles
///
/// Unknown keys are rejected. Throws InvalidConfig with the line number.
SimulationConfig parse_simulation_config(std::string_view text);
SimulationConfig read_simulation_config(const std::filesystem::path& path);

}  // namespace rangevar
