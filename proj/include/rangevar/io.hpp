#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rangevar/calibrate.hpp"
#include "rangevar/evaluate.hpp"
#include "rangevar/fit.hpp"
#include "rangevar/ingest.hpp"
#include "rangevar/preprocess.hpp"
#include "rangevar/simulate.hpp"

namespace rangevar::io {

// tick_id,vertical_angle_center,mean_intensity,mean_range_m,std_range_mm,count[,calibrated_intensity]
void write_tick_stats_csv(std::ostream& out, std::span<const TickStats> ticks);
void write_calibrated_ticks_csv(std::ostream& out, std::span<const CalibratedTickStats> ticks);

struct TickTable {
  std::vector<TickStats> ticks;
  std::vector<double> calibrated_intensity;  // empty unless the column is present
  IntensityKind intensity_kind = IntensityKind::Raw;

  bool calibrated() const { return !calibrated_intensity.empty(); }
  std::vector<CalibratedTickStats> as_calibrated() const;
};

/// Reads either tick export. An `#intensity_kind=` directive line is honored.
TickTable read_tick_csv(std::istream& in);
TickTable read_tick_csv_file(const std::filesystem::path& path);

// tick_id,intensity,observed_std_mm,predicted_std_mm,residual_mm,extrapolated
// followed by #rmse_mm=, #max_abs_residual_mm=, #extrapolated_count= footer lines.
void write_evaluation_csv(std::ostream& out, const EvaluationReport& report);

// index,var_range_mm2,var_vert_rad2,var_horiz_rad2
void write_vcm_csv(std::ostream& out, const VcmBlocks& vcm);

// tick_id,true_intensity,true_sigma_mm
void write_ground_truth_csv(std::ostream& out, const GroundTruth& truth);

/// intensity,sigma_mm sampled at `points` log-spaced intensities across the
/// model domain.
void write_curve_csv(std::ostream& out, const RangeVarianceModel& model, std::size_t points = 256);

std::string fit_report_json(const FitReport& report);
/// Accepts a full fit report or a bare "model" object.
RangeVarianceModel parse_model_json(std::string_view text);
RangeVarianceModel read_model_json_file(const std::filesystem::path& path);

std::string validation_report_json(const ValidationReport& report);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace rangevar::io
