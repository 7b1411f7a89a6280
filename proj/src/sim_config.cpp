#include "rangevar/sim_config.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "rangevar/errors.hpp"
#include "rangevar/io.hpp"
#include "text_util.hpp"

namespace rangevar {

SimulationConfig parse_simulation_config(std::string_view text) {
  SimulationConfig cfg;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto where = "line " + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorCode::InvalidConfig, where + ": expected key = value");
    const auto key = detail::to_lower(detail::trim(line.substr(0, eq)));
    const auto value = detail::trim(line.substr(eq + 1));

    auto real = [&](std::string_view s) {
      const auto v = detail::parse_double(s);
      if (!v || !std::isfinite(*v)) {
        throw Error(ErrorCode::InvalidConfig, where + ": '" + std::string(s) + "' is not a finite number");
      }
      return *v;
    };
    auto count = [&](std::string_view s) {
      const auto v = detail::parse_int(s);
      if (!v || *v < 0) {
        throw Error(ErrorCode::InvalidConfig, where + ": '" + std::string(s) + "' is not a non-negative integer");
      }
      return static_cast<std::size_t>(*v);
    };
    auto list = [&](std::size_t expected) {
      auto fields = detail::split(value, ',');
      if (fields.size() != expected) {
        throw Error(ErrorCode::InvalidConfig,
                    where + ": " + key + " expects " + std::to_string(expected) + " comma-separated values");
      }
      return fields;
    };

    if (key == "seed") {
      std::uint64_t u = 0;
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), u);
      if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw Error(ErrorCode::InvalidConfig, where + ": seed must be a non-negative integer");
      }
      cfg.seed = u;
    } else if (key == "k_system") {
      cfg.k_system = real(value);
    } else if (key == "truth") {
      const auto f = list(3);
      cfg.truth = {real(f[0]), real(f[1]), real(f[2])};
    } else if (key == "truth_a") {
      cfg.truth.a = real(value);
    } else if (key == "truth_b") {
      cfg.truth.b = real(value);
    } else if (key == "truth_c") {
      cfg.truth.c = real(value);
    } else if (key == "scaling") {
      const auto kind = detail::to_lower(value);
      if (kind == "none") {
        cfg.scaling.kind = ScalingKind::None;
      } else if (kind == "inverse_square") {
        cfg.scaling.kind = ScalingKind::InverseSquare;
      } else if (kind == "custom" || kind == "custom_monotone") {
        cfg.scaling.kind = ScalingKind::CustomMonotone;
      } else {
        throw Error(ErrorCode::InvalidConfig, where + ": unknown scaling '" + std::string(value) + "'");
      }
    } else if (key == "r_ref") {
      cfg.scaling.r_ref = real(value);
    } else if (key == "scaling_table") {
      cfg.scaling.table.clear();
      for (const auto entry : detail::split(value, ',')) {
        const auto pair = detail::split(entry, ':');
        if (pair.size() != 2) throw Error(ErrorCode::InvalidConfig, where + ": table entries are true:recorded");
        cfg.scaling.table.emplace_back(real(pair[0]), real(pair[1]));
      }
    } else if (key == "outlier_fraction") {
      cfg.outliers.fraction = real(value);
    } else if (key == "outlier_magnitude_sigma") {
      cfg.outliers.magnitude_sigma = real(value);
    } else if (key == "vertical_start") {
      cfg.vertical_start = real(value);
    } else if (key == "vertical_step") {
      cfg.vertical_step = real(value);
    } else if (key == "horizontal_angle") {
      cfg.horizontal_angle = real(value);
    } else if (key == "scanner") {
      cfg.scanner_id = std::string(value);
    } else if (key == "board") {
      const auto f = list(5);
      cfg.boards.push_back({real(f[0]), real(f[1]), real(f[2]), count(f[3]), count(f[4])});
    } else {
      throw Error(ErrorCode::InvalidConfig, where + ": unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

SimulationConfig read_simulation_config(const std::filesystem::path& path) {
  return parse_simulation_config(io::read_file(path));
}

}  // namespace rangevar
