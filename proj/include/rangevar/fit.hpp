#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "rangevar/calibrate.hpp"
#include "rangevar/ingest.hpp"
#include "rangevar/power_law.hpp"
#include "rangevar/preprocess.hpp"

namespace rangevar {

/// Intensity-based range standard deviation model sigma_r = a * I^b + c,
/// sigma_r in millimeters.
struct RangeVarianceModel {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double intensity_min = 0.0;
  double intensity_max = 0.0;
  IntensityKind intensity_kind = IntensityKind::Raw;

  PowerLawParams<double> params() const { return {a, b, c}; }
  bool in_domain(double intensity) const {
    return intensity >= intensity_min && intensity <= intensity_max;
  }
};

/// Unit label of `a` for a model of the given kind ("mm/INC", "mm/%", ...).
const char* a_unit(IntensityKind kind);

/// a * I^b + c in millimeters. Throws NonPositiveIntensity for I <= 0.
double evaluate_model(const RangeVarianceModel& m, double intensity);

struct FitPoint {
  double intensity = 0.0;
  double std_range = 0.0;  // millimeters
  double weight = 1.0;
};

enum class FitWeighting {
  Uniform,
  // Weight each tick by its observation count.
  Count,
  // Weight by count / sigma_model(I)^2, re-estimated until the parameters
  // settle: the sampling variance of a tick standard deviation is
  // sigma^2 / (2 (n - 1)).
  InverseVariance,
};

struct FitOptions {
  std::size_t max_iterations = 200;
  double initial_damping = 1e-3;
  double damping_factor = 10.0;
  double cost_tolerance = 1e-12;      // relative cost change
  double gradient_tolerance = 1e-10;  // max-norm of J^T r
  double step_tolerance = 1e-12;      // max-norm of the step relative to the parameters
  FitWeighting weighting = FitWeighting::Uniform;
  std::size_t max_reweights = 30;
  double reweight_tolerance = 1e-10;  // relative parameter change between reweights
};

FitWeighting fit_weighting_from_string(std::string_view text);

struct FitReport {
  RangeVarianceModel model;
  std::size_t iterations = 0;  // LM iterations, summed over reweights
  std::size_t reweights = 0;  // weighted solves under inverse-variance weighting
  double initial_cost = 0.0;
  double final_cost = 0.0;  // mm^2, sum of (weighted) squared residuals
  std::vector<double> cost_history;  // cost after each accepted step of the last solve
  bool converged = false;
  std::size_t point_count = 0;
  double variance_factor = 0.0;  // a-posteriori, final_cost / (m - 3)
  Eigen::Vector3d parameter_stddevs = Eigen::Vector3d::Zero();
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
};

/// Starting point for the adjustment. Shifts the data by c0 = min(sigma) / 2
/// and regresses ln(sigma - c0) on ln(I); the c0 = 0 candidate is also tried
/// and the one with the smaller model cost wins.
PowerLawParams<double> initial_guess(std::span<const FitPoint> points);

/// Levenberg-Marquardt least squares of sigma_r = a * I^b + c, using the
/// analytic Jacobian. FitPoint::weight multiplies the squared residual; with
/// InverseVariance weighting it is the base weight (the count) divided by the
/// squared model prediction.
FitReport fit_model(std::span<const FitPoint> points, const FitOptions& opts = {},
                    IntensityKind kind = IntensityKind::Raw);

/// Fits tick means (mean_intensity, std_range) tagged with the dataset kind.
FitReport fit_ticks(std::span<const TickStats> stats, const FitOptions& opts = {},
                    IntensityKind kind = IntensityKind::Raw);

/// Fits calibrated intensities against std_range; tagged Calibrated.
FitReport fit_general_model(std::span<const CalibratedTickStats> calibrated, const FitOptions& opts = {});

/// Sum of weighted squared residuals of a parameter vector over the points.
double model_cost(const PowerLawParams<double>& p, std::span<const FitPoint> points);

}  // namespace rangevar
