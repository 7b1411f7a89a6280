#include "rangevar/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "rangevar/errors.hpp"

namespace rangevar {

double radar_intensity(double k_system, double reflectivity, double range, double incidence_angle) {
  if (!(range > 0.0)) throw Error(ErrorCode::NonPositiveRange, "range must be > 0");
  if (!(incidence_angle >= 0.0 && incidence_angle <= std::numbers::pi / 2)) {
    throw Error(ErrorCode::InvalidConfig, "incidence angle must lie in [0, pi/2]");
  }
  if (incidence_angle == std::numbers::pi / 2) return 0.0;
  return k_system * reflectivity * std::cos(incidence_angle) / (range * range);
}

double interpolate_monotone(const std::vector<std::pair<double, double>>& table, double x) {
  if (table.size() < 2) throw Error(ErrorCode::InvalidConfig, "scaling table needs >= 2 entries");
  auto it = std::upper_bound(table.begin(), table.end(), x,
                             [](double v, const auto& entry) { return v < entry.first; });
  if (it == table.begin()) ++it;
  if (it == table.end()) --it;
  const auto& [x1, y1] = *it;
  const auto& [x0, y0] = *(it - 1);
  return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

void SimulationConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (!(k_system > 0.0) || !std::isfinite(k_system)) fail("k_system must be > 0");
  if (boards.empty()) fail("at least one board is required");
  if (!(vertical_step > 0.0) || !std::isfinite(vertical_step)) fail("vertical_step must be > 0");
  if (!std::isfinite(vertical_start) || !std::isfinite(horizontal_angle)) fail("angles must be finite");
  if (!std::isfinite(truth.a) || !std::isfinite(truth.b) || !std::isfinite(truth.c)) {
    fail("truth model parameters must be finite");
  }
  for (std::size_t k = 0; k < boards.size(); ++k) {
    const auto& b = boards[k];
    const auto where = "board " + std::to_string(k) + ": ";
    if (!(b.reflectivity > 0.0 && b.reflectivity <= 1.0)) fail(where + "reflectivity must be in (0, 1]");
    if (!(b.distance > 0.0) || !std::isfinite(b.distance)) fail(where + "distance must be > 0");
    if (!(b.incidence_angle >= 0.0 && b.incidence_angle < std::numbers::pi / 2)) {
      fail(where + "incidence angle must be in [0, pi/2)");
    }
    if (b.tick_count < 1) fail(where + "tick_count must be >= 1");
    if (b.profile_count < 1) fail(where + "profile_count must be >= 1");
    const double intensity = radar_intensity(k_system, b.reflectivity, b.distance, b.incidence_angle);
    const double sigma = truth.a * std::pow(intensity, truth.b) + truth.c;
    if (!(sigma > 0.0) || !std::isfinite(sigma)) fail(where + "truth model gives sigma <= 0");
    if (outliers.fraction > 0.0 && b.distance - std::abs(outliers.magnitude_sigma) * sigma / 1000.0 <= 0.0) {
      fail(where + "injected outliers would produce non-positive ranges");
    }
  }
  if (!(outliers.fraction >= 0.0 && outliers.fraction < 1.0)) fail("outlier fraction must be in [0, 1)");
  if (!std::isfinite(outliers.magnitude_sigma)) fail("outlier magnitude must be finite");
  if (scaling.kind == ScalingKind::InverseSquare && !(scaling.r_ref > 0.0 && std::isfinite(scaling.r_ref))) {
    fail("scaling r_ref must be > 0");
  }
  if (scaling.kind == ScalingKind::CustomMonotone) {
    if (scaling.table.size() < 2) fail("scaling table needs >= 2 entries");
    for (std::size_t i = 1; i < scaling.table.size(); ++i) {
      if (!(scaling.table[i].first > scaling.table[i - 1].first) ||
          !(scaling.table[i].second > scaling.table[i - 1].second)) {
        fail("scaling table must be strictly increasing in both columns");
      }
    }
  }
}

namespace {

struct BoardDraws {
  // ranges[p * tick_count + t]
  std::vector<double> ranges;
  std::vector<bool> outlier;
  std::vector<double> recorded;  // per tick
};

BoardDraws draw_board(const SimulationConfig& cfg, std::size_t board_index, double intensity, double sigma_m) {
  const auto& board = cfg.boards[board_index];
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(board_index)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  BoardDraws d;
  const std::size_t n = board.profile_count * board.tick_count;
  d.ranges.resize(n);
  d.outlier.resize(n);
  // Three draws per point whatever the outlier fraction, so runs that differ
  // only in injection share their Gaussian noise.
  for (std::size_t i = 0; i < n; ++i) {
    const double z = gauss(rng);
    const double pick = unit(rng);
    const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
    if (pick < cfg.outliers.fraction) {
      d.ranges[i] = board.distance + sign * cfg.outliers.magnitude_sigma * sigma_m;
      d.outlier[i] = true;
    } else {
      d.ranges[i] = board.distance + z * sigma_m;
    }
  }

  d.recorded.assign(board.tick_count, intensity);
  for (std::size_t t = 0; t < board.tick_count; ++t) {
    switch (cfg.scaling.kind) {
      case ScalingKind::None:
        break;
      case ScalingKind::InverseSquare: {
        double sum = 0.0;
        for (std::size_t p = 0; p < board.profile_count; ++p) sum += d.ranges[p * board.tick_count + t];
        const double mean_range = sum / static_cast<double>(board.profile_count);
        d.recorded[t] = intensity * mean_range * mean_range / cfg.scaling.r_ref;
        break;
      }
      case ScalingKind::CustomMonotone:
        d.recorded[t] = interpolate_monotone(cfg.scaling.table, intensity);
        break;
    }
  }
  return d;
}

}  // namespace

Simulation simulate_profiles(const SimulationConfig& cfg) {
  cfg.validate();
  Simulation sim;
  auto& meta = sim.dataset.meta;
  meta.scanner_id = cfg.scanner_id;
  meta.intensity_kind = cfg.scaling.kind == ScalingKind::None ? IntensityKind::Raw : IntensityKind::Scaled;
  const bool single_distance = std::all_of(cfg.boards.begin(), cfg.boards.end(), [&](const Board& b) {
    return b.distance == cfg.boards.front().distance;
  });
  if (single_distance) meta.nominal_distance = cfg.boards.front().distance;

  std::vector<BoardDraws> draws;
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  std::size_t max_profiles = 0;
  for (std::size_t k = 0; k < cfg.boards.size(); ++k) {
    const auto& board = cfg.boards[k];
    const double intensity = radar_intensity(cfg.k_system, board.reflectivity, board.distance, board.incidence_angle);
    const double sigma_mm = cfg.truth.a * std::pow(intensity, cfg.truth.b) + cfg.truth.c;
    draws.push_back(draw_board(cfg, k, intensity, sigma_mm / 1000.0));
    offsets.push_back(offset);
    for (std::size_t t = 0; t < board.tick_count; ++t) {
      sim.truth.ticks.push_back({static_cast<std::int64_t>(offset + t), k, board.distance, intensity, sigma_mm,
                                 draws.back().recorded[t]});
    }
    offset += board.tick_count;
    max_profiles = std::max(max_profiles, board.profile_count);
  }

  auto& obs = sim.dataset.observations;
  for (std::size_t p = 0; p < max_profiles; ++p) {
    for (std::size_t k = 0; k < cfg.boards.size(); ++k) {
      const auto& board = cfg.boards[k];
      if (p >= board.profile_count) continue;
      for (std::size_t t = 0; t < board.tick_count; ++t) {
        const std::size_t i = p * board.tick_count + t;
        if (draws[k].outlier[i]) sim.truth.outlier_indices.push_back(obs.size());
        PolarObservation o;
        o.profile_index = static_cast<std::int64_t>(p);
        o.vertical_angle = cfg.vertical_start + static_cast<double>(offsets[k] + t) * cfg.vertical_step;
        o.horizontal_angle = cfg.horizontal_angle;
        o.range = draws[k].ranges[i];
        o.intensity = draws[k].recorded[t];
        obs.push_back(o);
      }
    }
  }
  return sim;
}

}  // namespace rangevar
