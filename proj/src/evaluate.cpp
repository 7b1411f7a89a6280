#include "rangevar/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rangevar/errors.hpp"

namespace rangevar {

double rmse(std::span<const double> residuals) {
  if (residuals.empty()) throw Error(ErrorCode::EmptyStats, "rmse of no residuals");
  double sum = 0.0;
  for (const double r : residuals) sum += r * r;
  return std::sqrt(sum / static_cast<double>(residuals.size()));
}

double max_abs_residual(std::span<const double> residuals) {
  if (residuals.empty()) throw Error(ErrorCode::EmptyStats, "max of no residuals");
  double m = 0.0;
  for (const double r : residuals) m = std::max(m, std::abs(r));
  return m;
}

namespace {

void summarize(EvaluationReport& report) {
  std::vector<double> res;
  res.reserve(report.residuals.size());
  for (const auto& row : report.residuals) {
    res.push_back(row.residual);
    report.extrapolated_count += row.extrapolated;
  }
  report.rmse = rmse(res);
  report.max_abs_residual = max_abs_residual(res);
}

ResidualRow residual_row(const RangeVarianceModel& m, std::int64_t tick_id, double intensity,
                         double observed) {
  if (!(intensity > 0.0)) {
    throw Error(ErrorCode::NonPositiveIntensity,
                "tick " + std::to_string(tick_id) + ": intensity must be > 0");
  }
  ResidualRow row;
  row.tick_id = tick_id;
  row.intensity = intensity;
  row.observed_std = observed;
  row.predicted_std = evaluate_model(m, intensity);
  row.residual = row.predicted_std - observed;
  row.extrapolated = !m.in_domain(intensity);
  return row;
}

}  // namespace

EvaluationReport evaluate_against_ticks(const RangeVarianceModel& m, std::span<const TickStats> stats) {
  if (stats.empty()) throw Error(ErrorCode::EmptyStats, "no ticks to evaluate");
  if (m.intensity_kind == IntensityKind::Calibrated) {
    throw Error(ErrorCode::KindMismatch, "a calibrated model needs calibrated ticks");
  }
  EvaluationReport report;
  report.residuals.reserve(stats.size());
  for (const auto& s : stats) {
    report.residuals.push_back(residual_row(m, s.tick_id, s.mean_intensity, s.std_range));
  }
  summarize(report);
  return report;
}

EvaluationReport evaluate_against_ticks(const RangeVarianceModel& m,
                                        std::span<const CalibratedTickStats> stats) {
  if (stats.empty()) throw Error(ErrorCode::EmptyStats, "no ticks to evaluate");
  const bool use_calibrated = m.intensity_kind == IntensityKind::Calibrated;
  EvaluationReport report;
  report.residuals.reserve(stats.size());
  for (const auto& s : stats) {
    const double intensity = use_calibrated ? s.calibrated_intensity : s.stats.mean_intensity;
    report.residuals.push_back(residual_row(m, s.stats.tick_id, intensity, s.stats.std_range));
  }
  summarize(report);
  return report;
}

EvaluationReport compare_models(const RangeVarianceModel& m1, const RangeVarianceModel& m2,
                                std::span<const double> grid) {
  if (grid.empty()) throw Error(ErrorCode::EmptyGrid, "comparison grid is empty");
  EvaluationReport report;
  report.residuals.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double observed = evaluate_model(m2, grid[i]);
    auto row = residual_row(m1, static_cast<std::int64_t>(i), grid[i], observed);
    row.extrapolated = !m1.in_domain(grid[i]) && !m2.in_domain(grid[i]);
    report.residuals.push_back(row);
  }
  summarize(report);
  return report;
}

std::vector<double> log_spaced_grid(double lo, double hi, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::EmptyGrid, "grid needs at least one point");
  if (!(lo > 0.0) || !(hi >= lo)) {
    throw Error(ErrorCode::NonPositiveIntensity, "log grid needs 0 < lo <= hi");
  }
  std::vector<double> grid(n);
  if (n == 1) {
    grid[0] = lo;
    return grid;
  }
  const double l0 = std::log(lo);
  const double l1 = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = std::exp(l0 + (l1 - l0) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

void AngularSigmas::validate() const {
  if (!(sigma_vertical > 0.0) || !(sigma_horizontal > 0.0) || !std::isfinite(sigma_vertical) ||
      !std::isfinite(sigma_horizontal)) {
    throw Error(ErrorCode::InvalidConfig, "angular sigmas must be finite and > 0");
  }
}

Eigen::SparseMatrix<double> VcmBlocks::assemble() const {
  const auto n = static_cast<Eigen::Index>(blocks.size());
  Eigen::SparseMatrix<double> out(3 * n, 3 * n);
  out.reserve(Eigen::VectorXi::Constant(3 * n, 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& blk = blocks[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < 3; ++k) out.insert(3 * i + k, 3 * i + k) = blk(k, k);
  }
  out.makeCompressed();
  return out;
}

VcmBlocks build_vcm(const ScanDataset& ds, const RangeVarianceModel& m, const AngularSigmas& ang,
                    const std::optional<CalibrationConfig>& calibration) {
  ang.validate();
  const bool calibrated = m.intensity_kind == IntensityKind::Calibrated;
  if (calibrated && !calibration) {
    throw Error(ErrorCode::KindMismatch, "a calibrated model needs a reference range");
  }
  const double var_v = ang.sigma_vertical * ang.sigma_vertical;
  const double var_h = ang.sigma_horizontal * ang.sigma_horizontal;
  VcmBlocks vcm;
  vcm.blocks.reserve(ds.observations.size());
  for (std::size_t i = 0; i < ds.observations.size(); ++i) {
    const auto& o = ds.observations[i];
    if (!(o.intensity > 0.0)) {
      throw Error(ErrorCode::NonPositiveIntensity,
                  "observation " + std::to_string(i) + ": intensity must be > 0");
    }
    const double intensity = calibrated ? calibrate_intensity(o.intensity, o.range, *calibration) : o.intensity;
    const double sigma_r = evaluate_model(m, intensity);
    Eigen::Matrix3d blk = Eigen::Matrix3d::Zero();
    blk.diagonal() << sigma_r * sigma_r, var_v, var_h;
    vcm.blocks.push_back(blk);
  }
  return vcm;
}

}  // namespace rangevar
