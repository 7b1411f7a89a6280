#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "rangevar/calibrate.hpp"
#include "rangevar/fit.hpp"
#include "rangevar/ingest.hpp"

namespace rangevar {

struct ResidualRow {
  std::int64_t tick_id = 0;  // grid index for model comparisons
  double intensity = 0.0;
  double observed_std = 0.0;   // mm
  double predicted_std = 0.0;  // mm
  double residual = 0.0;       // predicted - observed, mm
  bool extrapolated = false;
};

struct EvaluationReport {
  std::vector<ResidualRow> residuals;
  double rmse = 0.0;
  double max_abs_residual = 0.0;
  std::size_t extrapolated_count = 0;
};

double rmse(std::span<const double> residuals);
double max_abs_residual(std::span<const double> residuals);

/// Residuals predicted - observed per tick. Ticks outside the model's
/// intensity domain are kept and flagged as extrapolated. A Calibrated model
/// requires calibrated ticks.
EvaluationReport evaluate_against_ticks(const RangeVarianceModel& m, std::span<const TickStats> stats);
EvaluationReport evaluate_against_ticks(const RangeVarianceModel& m,
                                        std::span<const CalibratedTickStats> stats);

/// Residuals m1(I) - m2(I) over the grid. Grid points outside both domains
/// are flagged as extrapolated.
EvaluationReport compare_models(const RangeVarianceModel& m1, const RangeVarianceModel& m2,
                                std::span<const double> grid);

/// n log-spaced points from lo to hi inclusive.
std::vector<double> log_spaced_grid(double lo, double hi, std::size_t n);

struct AngularSigmas {
  double sigma_vertical = 0.0;    // rad
  double sigma_horizontal = 0.0;  // rad

  void validate() const;
};

/// Diagonal 3x3 blocks over (range, vertical angle, horizontal angle), one
/// per observation. Units mm^2, rad^2, rad^2.
struct VcmBlocks {
  std::vector<Eigen::Matrix3d> blocks;

  std::size_t size() const { return blocks.size(); }
  /// Block-diagonal 3n x 3n matrix.
  Eigen::SparseMatrix<double> assemble() const;
};

/// For a Calibrated model each point's intensity is calibrated with its own
/// range, so `calibration` must be supplied.
VcmBlocks build_vcm(const ScanDataset& ds, const RangeVarianceModel& m, const AngularSigmas& ang,
                    const std::optional<CalibrationConfig>& calibration = std::nullopt);

}  // namespace rangevar
