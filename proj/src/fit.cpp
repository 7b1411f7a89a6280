#include "rangevar/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "rangevar/errors.hpp"

namespace rangevar {

const char* a_unit(IntensityKind kind) {
  switch (kind) {
    case IntensityKind::Raw: return "mm/INC";
    case IntensityKind::Scaled: return "mm/%";
    case IntensityKind::Calibrated: return "mm*m/%";
  }
  return "mm/INC";
}

double evaluate_model(const RangeVarianceModel& m, double intensity) {
  if (!(intensity > 0.0)) {
    throw Error(ErrorCode::NonPositiveIntensity, "intensity must be > 0, got " + std::to_string(intensity));
  }
  return power_law(m.params(), intensity);
}

double model_cost(const PowerLawParams<double>& p, std::span<const FitPoint> points) {
  double cost = 0.0;
  for (const auto& pt : points) {
    const double r = power_law(p, pt.intensity) - pt.std_range;
    cost += pt.weight * r * r;
  }
  return cost;
}

namespace {

void check_points(std::span<const FitPoint> points) {
  if (points.size() < 3) {
    throw Error(ErrorCode::TooFewPoints, "need at least 3 points, got " + std::to_string(points.size()));
  }
  std::set<double> distinct;
  for (std::size_t j = 0; j < points.size(); ++j) {
    const auto& pt = points[j];
    if (!(pt.intensity > 0.0) || !std::isfinite(pt.intensity)) {
      throw Error(ErrorCode::NonPositiveIntensity, "point " + std::to_string(j) + ": intensity must be > 0");
    }
    if (!(pt.std_range >= 0.0) || !std::isfinite(pt.std_range)) {
      throw Error(ErrorCode::InvalidConfig, "point " + std::to_string(j) + ": std_range must be >= 0");
    }
    if (!(pt.weight > 0.0) || !std::isfinite(pt.weight)) {
      throw Error(ErrorCode::InvalidConfig, "point " + std::to_string(j) + ": weight must be > 0");
    }
    distinct.insert(pt.intensity);
  }
  if (distinct.size() < 3) {
    throw Error(ErrorCode::RankDeficient, "need at least 3 distinct intensities, got " +
                                              std::to_string(distinct.size()));
  }
}

struct Candidate {
  PowerLawParams<double> params;
  double cost;
};

// Log-log regression of (sigma - c0) on I over the points above c0.
std::optional<Candidate> log_log_candidate(std::span<const FitPoint> points, double c0) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& pt : points) {
    if (pt.std_range > c0) {
      xs.push_back(std::log(pt.intensity));
      ys.push_back(std::log(pt.std_range - c0));
    }
  }
  if (xs.size() < 3) return std::nullopt;
  const auto n = static_cast<double>(xs.size());
  const Eigen::Map<const Eigen::ArrayXd> x(xs.data(), static_cast<Eigen::Index>(xs.size()));
  const Eigen::Map<const Eigen::ArrayXd> y(ys.data(), static_cast<Eigen::Index>(ys.size()));
  const double mx = x.sum() / n;
  const double my = y.sum() / n;
  const double sxx = (x - mx).square().sum();
  const double sxy = ((x - mx) * (y - my)).sum();
  if (!(sxx > 0.0)) return std::nullopt;
  if (y.maxCoeff() == y.minCoeff()) return std::nullopt;
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  if (slope == 0.0 || !std::isfinite(slope) || !std::isfinite(intercept)) return std::nullopt;
  const PowerLawParams<double> p(std::exp(intercept), slope, c0);
  return Candidate{p, model_cost(p, points)};
}

}  // namespace

PowerLawParams<double> initial_guess(std::span<const FitPoint> points) {
  check_points(points);
  double min_std = std::numeric_limits<double>::infinity();
  for (const auto& pt : points) min_std = std::min(min_std, pt.std_range);

  std::optional<Candidate> best;
  for (const double c0 : {0.5 * min_std, 0.0}) {
    const auto cand = log_log_candidate(points, c0);
    if (cand && (!best || cand->cost < best->cost)) best = cand;
  }
  if (!best) {
    throw Error(ErrorCode::RankDeficient, "log-log regression has no spread (constant std_range?)");
  }
  return best->params;
}

namespace {

struct LmOutcome {
  PowerLawParams<double> params;
  std::size_t iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  bool converged = false;
  std::vector<double> cost_history;
};

struct Columns {
  Eigen::ArrayXd intensity;
  Eigen::VectorXd observed;
  Eigen::ArrayXd sqrt_w;

  explicit Columns(std::span<const FitPoint> points) {
    const auto m = static_cast<Eigen::Index>(points.size());
    intensity.resize(m);
    observed.resize(m);
    sqrt_w.resize(m);
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto& pt = points[static_cast<std::size_t>(j)];
      intensity(j) = pt.intensity;
      observed(j) = pt.std_range;
      sqrt_w(j) = std::sqrt(pt.weight);
    }
  }

  Eigen::VectorXd residuals(const PowerLawParams<double>& q) const {
    return (sqrt_w * (power_law(q, intensity) - observed).array()).matrix();
  }
  Eigen::MatrixX3d jacobian(const PowerLawParams<double>& q) const {
    return sqrt_w.matrix().asDiagonal() * power_law_jacobian(q, intensity);
  }
};

// Marquardt-scaled damping: (J^T J + lambda diag(J^T J)) delta = -J^T r.
LmOutcome lm_solve(const Columns& cols, PowerLawParams<double> p, const FitOptions& opts) {
  LmOutcome out;
  Eigen::VectorXd r = cols.residuals(p);
  double cost = r.squaredNorm();
  out.initial_cost = cost;
  double lambda = opts.initial_damping;

  auto small_step = [&](const Eigen::Vector3d& delta, const PowerLawParams<double>& at) {
    return (delta.array().abs() <= opts.step_tolerance * (at.array().abs() + opts.step_tolerance)).all();
  };

  std::size_t iter = 0;
  while (iter < opts.max_iterations && !out.converged) {
    if (cost == 0.0) {
      out.converged = true;
      break;
    }
    const Eigen::MatrixX3d jac = cols.jacobian(p);
    const Eigen::Vector3d grad = jac.transpose() * r;
    if (grad.lpNorm<Eigen::Infinity>() < opts.gradient_tolerance) {
      out.converged = true;
      break;
    }
    ++iter;
    const Eigen::Matrix3d normal = jac.transpose() * jac;
    Eigen::Vector3d scale = normal.diagonal();
    for (auto& s : scale) {
      if (!(s > 0.0)) s = 1.0;
    }

    bool accepted = false;
    while (!accepted) {
      Eigen::Matrix3d damped = normal;
      damped.diagonal() += lambda * scale;
      const Eigen::Vector3d delta = damped.ldlt().solve(-grad);
      const PowerLawParams<double> trial = p + delta;
      const Eigen::VectorXd r_trial = cols.residuals(trial);
      const double trial_cost = r_trial.squaredNorm();
      if (delta.allFinite() && std::isfinite(trial_cost) && trial_cost < cost) {
        const double decrease = cost - trial_cost;
        p = trial;
        r = r_trial;
        cost = trial_cost;
        out.cost_history.push_back(cost);
        lambda = std::max(lambda / opts.damping_factor, 1e-300);
        accepted = true;
        if (decrease <= opts.cost_tolerance * (cost + decrease) || small_step(delta, p)) {
          out.converged = true;
        }
      } else {
        // No decrease even for a negligible step: minimum reached to
        // working precision.
        if (delta.allFinite() && small_step(delta, p)) {
          out.converged = true;
          break;
        }
        lambda *= opts.damping_factor;
        if (!std::isfinite(lambda) || lambda > 1e300) break;
      }
    }
    if (!accepted && !out.converged) break;
  }
  out.params = p;
  out.iterations = iter;
  out.final_cost = cost;
  return out;
}

}  // namespace

FitWeighting fit_weighting_from_string(std::string_view text) {
  if (text == "uniform") return FitWeighting::Uniform;
  if (text == "count") return FitWeighting::Count;
  if (text == "inverse-variance" || text == "inverse_variance") return FitWeighting::InverseVariance;
  throw Error(ErrorCode::InvalidConfig, "unknown weighting '" + std::string(text) + "'");
}

FitReport fit_model(std::span<const FitPoint> points, const FitOptions& opts, IntensityKind kind) {
  const PowerLawParams<double> guess = initial_guess(points);
  FitReport report;
  report.point_count = points.size();

  std::vector<FitPoint> weighted(points.begin(), points.end());
  Columns cols(weighted);
  LmOutcome lm;
  std::size_t total_iterations = 0;

  if (opts.weighting == FitWeighting::InverseVariance) {
    // Weights come from the current prediction, starting at the initial
    // guess; the observed std stands in wherever the prediction is unusable.
    PowerLawParams<double> current = guess;
    for (std::size_t k = 0; k <= opts.max_reweights; ++k) {
      for (std::size_t j = 0; j < points.size(); ++j) {
        double sigma = power_law(current, points[j].intensity);
        if (!(sigma > 0.0) || !std::isfinite(sigma)) sigma = points[j].std_range;
        if (!(sigma > 0.0)) sigma = 1.0;
        weighted[j].weight = points[j].weight / (sigma * sigma);
      }
      cols = Columns(weighted);
      lm = lm_solve(cols, current, opts);
      total_iterations += lm.iterations;
      report.reweights = k + 1;
      const bool settled = ((lm.params - current).array().abs() <=
                            opts.reweight_tolerance * (current.array().abs() + opts.reweight_tolerance))
                               .all();
      current = lm.params;
      if (settled) break;
    }
    lm.initial_cost = model_cost(guess, weighted);
  } else {
    lm = lm_solve(cols, guess, opts);
    total_iterations = lm.iterations;
  }

  const PowerLawParams<double>& p = lm.params;
  report.iterations = total_iterations;
  report.initial_cost = lm.initial_cost;
  report.final_cost = lm.final_cost;
  report.converged = lm.converged;
  report.cost_history = lm.cost_history;
  report.model.a = p(0);
  report.model.b = p(1);
  report.model.c = p(2);
  report.model.intensity_kind = kind;
  report.model.intensity_min = cols.intensity.minCoeff();
  report.model.intensity_max = cols.intensity.maxCoeff();

  const auto m = static_cast<Eigen::Index>(points.size());
  const Eigen::MatrixX3d jac = cols.jacobian(p);
  const Eigen::Matrix3d normal = jac.transpose() * jac;
  const Eigen::FullPivLU<Eigen::Matrix3d> lu(normal);
  if (m > 3 && lu.isInvertible()) {
    report.variance_factor = lm.final_cost / static_cast<double>(m - 3);
    report.covariance = report.variance_factor * lu.inverse();
    report.parameter_stddevs = report.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    report.variance_factor = nan;
    report.covariance.setConstant(nan);
    report.parameter_stddevs.setConstant(nan);
  }

  if (!p.allFinite()) {
    throw Error(ErrorCode::DomainViolation, "adjustment diverged to non-finite parameters");
  }
  const double lo = power_law(p, report.model.intensity_min);
  const double hi = power_law(p, report.model.intensity_max);
  if (!(lo > 0.0) || !(hi > 0.0)) {
    std::string what = "fitted model predicts sigma <= 0 inside the intensity domain";
    if (opts.weighting != FitWeighting::InverseVariance) {
      what += "; inverse-variance weighting keeps noisy low-intensity ticks from dominating";
    }
    throw Error(ErrorCode::DomainViolation, what);
  }
  return report;
}

namespace {

double base_weight(const FitOptions& opts, std::size_t count) {
  return opts.weighting == FitWeighting::Uniform ? 1.0 : static_cast<double>(count);
}

}  // namespace

FitReport fit_ticks(std::span<const TickStats> stats, const FitOptions& opts, IntensityKind kind) {
  std::vector<FitPoint> points;
  points.reserve(stats.size());
  for (const auto& s : stats) {
    points.push_back({s.mean_intensity, s.std_range,
                      base_weight(opts, s.count)});
  }
  return fit_model(points, opts, kind);
}

FitReport fit_general_model(std::span<const CalibratedTickStats> calibrated, const FitOptions& opts) {
  std::vector<FitPoint> points;
  points.reserve(calibrated.size());
  for (const auto& s : calibrated) {
    points.push_back({s.calibrated_intensity, s.stats.std_range,
                      base_weight(opts, s.stats.count)});
  }
  return fit_model(points, opts, IntensityKind::Calibrated);
}

}  // namespace rangevar
