#include "rangevar/cli.hpp"

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "rangevar/calibrate.hpp"
#include "rangevar/errors.hpp"
#include "rangevar/evaluate.hpp"
#include "rangevar/fit.hpp"
#include "rangevar/ingest.hpp"
#include "rangevar/io.hpp"
#include "rangevar/preprocess.hpp"
#include "rangevar/sim_config.hpp"
#include "rangevar/simulate.hpp"

namespace rangevar::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kCurvePoints = 256;

struct RunConfig {
  std::string input;
  std::string simulate;
  std::string out;
  std::string model;
  std::string against;

  // ingest
  std::string angle_unit = "rad";
  std::string intensity_kind;
  bool lenient = false;

  // preprocess
  double sigma_multiplier = 3.0;
  std::size_t min_tick_count = 30;
  std::string tick_mode = "quantize";
  std::optional<double> tick_step;
  std::size_t max_passes = 1;

  // calibrate
  std::optional<double> r_ref;

  // fit
  std::size_t max_iterations = 200;
  std::string weighting = "uniform";
  bool uncalibrated = false;

  // evaluate / compare / vcm
  std::optional<double> sigma_vertical;
  std::optional<double> sigma_horizontal;
  std::optional<double> grid_min;
  std::optional<double> grid_max;
  std::size_t grid_points = kCurvePoints;
  std::optional<std::uint64_t> seed;

  ParseOptions parse_options() const {
    ParseOptions opts;
    opts.angle_unit = angle_unit_from_string(angle_unit);
    opts.lenient = lenient;
    if (!intensity_kind.empty()) opts.default_intensity_kind = intensity_kind_from_string(intensity_kind);
    return opts;
  }

  PreprocessConfig preprocess_config() const {
    PreprocessConfig cfg;
    cfg.sigma_multiplier = sigma_multiplier;
    cfg.min_tick_count = min_tick_count;
    cfg.tick_mode = tick_mode == "explicit" ? TickMode::ExplicitColumn : TickMode::QuantizeByStep;
    cfg.tick_step = tick_step;
    cfg.max_passes = max_passes;
    return cfg;
  }

  FitOptions fit_options() const {
    FitOptions opts;
    opts.max_iterations = max_iterations;
    opts.weighting = fit_weighting_from_string(weighting);
    return opts;
  }
};

class Session {
 public:
  Session(const RunConfig& cfg, std::ostream& out) : cfg_(cfg), out_(out) {}

  void simulate() {
    auto sim_cfg = read_simulation_config(cfg_.simulate);
    if (cfg_.seed) sim_cfg.seed = *cfg_.seed;
    const auto sim = simulate_profiles(sim_cfg);
    prepare_out_dir();
    write("scan.csv", serialize_dataset(sim.dataset));
    std::ostringstream truth;
    io::write_ground_truth_csv(truth, sim.truth);
    write("ground_truth.csv", truth.str());
    out_ << "simulated " << sim.dataset.observations.size() << " observations over " << sim.truth.ticks.size()
         << " ticks (seed " << sim_cfg.seed << ")\n";
  }

  void validate() {
    const auto ds = read_profile_csv(cfg_.input, cfg_.parse_options());
    const auto report = validate_dataset(ds);
    summarize_validation(ds, report);
    if (!cfg_.out.empty()) {
      prepare_out_dir();
      write("validation.json", io::validation_report_json(report));
    }
  }

  void preprocess() {
    const auto ds = read_profile_csv(cfg_.input, cfg_.parse_options());
    prepare_out_dir();
    run_preprocess(ds);
  }

  void calibrate() {
    const auto table = io::read_tick_csv_file(cfg_.input);
    if (table.intensity_kind != IntensityKind::Scaled) {
      throw Error(ErrorCode::KindMismatch, "only scaled intensities are calibrated; '" + cfg_.input + "' holds " +
                                               std::string(to_string(table.intensity_kind)) + " intensities");
    }
    prepare_out_dir();
    run_calibrate(table.ticks);
  }

  void fit() {
    const auto table = io::read_tick_csv_file(cfg_.input);
    const IntensityKind kind =
        cfg_.intensity_kind.empty() ? table.intensity_kind : intensity_kind_from_string(cfg_.intensity_kind);
    const auto report = table.calibrated() && !cfg_.uncalibrated
                            ? fit_general_model(table.as_calibrated(), cfg_.fit_options())
                            : fit_ticks(table.ticks, cfg_.fit_options(), kind);
    fs::path model_path = cfg_.out;
    fs::path curve_path;
    if (model_path.extension() == ".json") {
      if (model_path.has_parent_path()) fs::create_directories(model_path.parent_path());
      curve_path = model_path.parent_path() / (model_path.stem().string() + "_curve.csv");
    } else {
      prepare_out_dir();
      model_path = model_path / "model.json";
      curve_path = fs::path(cfg_.out) / "model_curve.csv";
    }
    write_model(report, model_path, curve_path);
  }

  void evaluate() {
    const auto model = io::read_model_json_file(cfg_.model);
    const auto table = io::read_tick_csv_file(cfg_.input);
    prepare_out_dir();
    run_evaluate(model, table);
    std::ostringstream curve;
    io::write_curve_csv(curve, model, kCurvePoints);
    write("model_curve.csv", curve.str());
  }

  void compare() {
    const auto m1 = io::read_model_json_file(cfg_.model);
    const auto m2 = io::read_model_json_file(cfg_.against);
    const double lo = cfg_.grid_min.value_or(m1.intensity_min);
    const double hi = cfg_.grid_max.value_or(m1.intensity_max);
    const auto report = compare_models(m1, m2, log_spaced_grid(lo, hi, cfg_.grid_points));
    prepare_out_dir();
    std::ostringstream csv;
    io::write_evaluation_csv(csv, report);
    write("comparison.csv", csv.str());
    out_ << "model comparison over " << report.residuals.size() << " intensities in [" << lo << ", " << hi
         << "]: rmse " << report.rmse << " mm, max |difference| " << report.max_abs_residual << " mm\n";
  }

  void vcm() {
    const auto model = io::read_model_json_file(cfg_.model);
    const auto ds = read_profile_csv(cfg_.input, cfg_.parse_options());
    prepare_out_dir();
    run_vcm(ds, model, cfg_.r_ref);
  }

  void pipeline() {
    ScanDataset ds;
    if (!cfg_.simulate.empty()) {
      auto sim_cfg = read_simulation_config(cfg_.simulate);
      if (cfg_.seed) sim_cfg.seed = *cfg_.seed;
      auto sim = simulate_profiles(sim_cfg);
      prepare_out_dir();
      write("scan.csv", serialize_dataset(sim.dataset));
      std::ostringstream truth;
      io::write_ground_truth_csv(truth, sim.truth);
      write("ground_truth.csv", truth.str());
      out_ << "simulated " << sim.dataset.observations.size() << " observations (seed " << sim_cfg.seed << ")\n";
      ds = std::move(sim.dataset);
    } else {
      ds = read_profile_csv(cfg_.input, cfg_.parse_options());
      prepare_out_dir();
    }
    summarize_validation(ds, validate_dataset(ds));

    const auto ticks = run_preprocess(ds);
    io::TickTable table;
    table.ticks = ticks;
    table.intensity_kind = ds.meta.intensity_kind;
    std::optional<double> r_ref;
    if (ds.meta.intensity_kind == IntensityKind::Scaled) {
      const auto calibrated = run_calibrate(ticks);
      r_ref = calibrated.r_ref;
      for (const auto& c : calibrated.ticks) table.calibrated_intensity.push_back(c.calibrated_intensity);
    }

    const auto report = table.calibrated() ? fit_general_model(table.as_calibrated(), cfg_.fit_options())
                                           : fit_ticks(table.ticks, cfg_.fit_options(), table.intensity_kind);
    write_model(report, fs::path(cfg_.out) / "model.json", fs::path(cfg_.out) / "model_curve.csv");
    run_evaluate(report.model, table);
    if (cfg_.sigma_vertical && cfg_.sigma_horizontal) run_vcm(ds, report.model, r_ref);
  }

 private:
  struct Calibrated {
    std::vector<CalibratedTickStats> ticks;
    double r_ref;
  };

  void prepare_out_dir() const { fs::create_directories(cfg_.out); }

  void write(const std::string& name, const std::string& content) const {
    io::write_file_atomic(fs::path(cfg_.out) / name, content);
  }

  static std::string kind_directive(IntensityKind kind) {
    return "#intensity_kind=" + std::string(to_string(kind)) + "\n";
  }

  void summarize_validation(const ScanDataset& ds, const ValidationReport& report) const {
    out_ << "dataset: " << report.observation_count << " observations, " << report.profile_count
         << " profiles, " << to_string(ds.meta.intensity_kind) << " intensities in [" << report.intensity_min
         << ", " << report.intensity_max << "]";
    if (ds.meta.skipped_rows) out_ << ", " << ds.meta.skipped_rows << " rows skipped";
    out_ << ", " << report.violations.size() << " invariant violations\n";
  }

  std::vector<TickStats> run_preprocess(const ScanDataset& ds) const {
    const auto result = preprocess_detailed(ds, cfg_.preprocess_config());
    std::ostringstream csv;
    csv << kind_directive(ds.meta.intensity_kind);
    io::write_tick_stats_csv(csv, result.ticks);
    write("ticks.csv", csv.str());
    out_ << "preprocess: " << result.group_count << " ticks, " << result.removed_outliers
         << " outliers removed, " << result.dropped_ticks << " ticks below " << cfg_.min_tick_count
         << " observations dropped, " << result.ticks.size() << " ticks kept\n";
    return result.ticks;
  }

  Calibrated run_calibrate(const std::vector<TickStats>& ticks) const {
    CalibrationConfig cal;
    if (cfg_.r_ref) {
      cal.r_ref = *cfg_.r_ref;
    } else {
      cal.r_ref = default_reference_range(ticks);
      out_ << "calibrate: no --r-ref given, using the mean tick range " << cal.r_ref << " m\n";
    }
    auto calibrated = calibrate_ticks(ticks, cal);
    std::ostringstream csv;
    csv << kind_directive(IntensityKind::Scaled);
    io::write_calibrated_ticks_csv(csv, calibrated);
    write("calibrated_ticks.csv", csv.str());
    out_ << "calibrate: " << calibrated.size() << " ticks calibrated with r_ref = " << cal.r_ref << " m\n";
    return {std::move(calibrated), cal.r_ref};
  }

  void write_model(const FitReport& report, const fs::path& model_path, const fs::path& curve_path) const {
    io::write_file_atomic(model_path, io::fit_report_json(report));
    std::ostringstream curve;
    io::write_curve_csv(curve, report.model, kCurvePoints);
    io::write_file_atomic(curve_path, curve.str());
    const auto& m = report.model;
    out_ << "fit (" << to_string(m.intensity_kind) << "): a = " << m.a << " " << a_unit(m.intensity_kind)
         << ", b = " << m.b << ", c = " << m.c << " mm over I in [" << m.intensity_min << ", "
         << m.intensity_max << "]; " << (report.converged ? "converged" : "NOT converged") << " after "
         << report.iterations << " iterations, cost " << report.final_cost << " mm^2\n";
  }

  void run_evaluate(const RangeVarianceModel& model, const io::TickTable& table) const {
    const auto report = table.calibrated() ? evaluate_against_ticks(model, table.as_calibrated())
                                           : evaluate_against_ticks(model, table.ticks);
    std::ostringstream csv;
    io::write_evaluation_csv(csv, report);
    write("evaluation.csv", csv.str());
    out_ << "evaluate: rmse " << report.rmse << " mm, max |residual| " << report.max_abs_residual << " mm, "
         << report.extrapolated_count << " of " << report.residuals.size() << " ticks extrapolated\n";
  }

  void run_vcm(const ScanDataset& ds, const RangeVarianceModel& model, std::optional<double> r_ref) const {
    const AngularSigmas ang{*cfg_.sigma_vertical, *cfg_.sigma_horizontal};
    std::optional<CalibrationConfig> cal;
    if (r_ref) cal = CalibrationConfig{*r_ref};
    const auto vcm = build_vcm(ds, model, ang, cal);
    std::ostringstream csv;
    io::write_vcm_csv(csv, vcm);
    write("vcm.csv", csv.str());
    out_ << "vcm: " << vcm.size() << " diagonal 3x3 blocks written\n";
  }

  const RunConfig& cfg_;
  std::ostream& out_;
};

void add_ingest_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--angle-unit", cfg.angle_unit, "Angle unit of the input: rad, deg or gon")
      ->check(CLI::IsMember({"rad", "deg", "gon"}));
  sub->add_option("--intensity-kind", cfg.intensity_kind,
                  "Intensity kind when the file has no #intensity_kind directive")
      ->check(CLI::IsMember({"raw", "scaled"}));
  sub->add_flag("--lenient", cfg.lenient, "Skip invalid rows instead of aborting");
}

void add_preprocess_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--sigma-multiplier", cfg.sigma_multiplier, "Outlier threshold in standard deviations")
      ->check(CLI::PositiveNumber);
  sub->add_option("--min-count", cfg.min_tick_count, "Minimum observations per tick")
      ->check(CLI::Range(std::size_t{2}, std::numeric_limits<std::size_t>::max()));
  sub->add_option("--tick-mode", cfg.tick_mode, "Tick identification: quantize or explicit")
      ->check(CLI::IsMember({"quantize", "explicit"}));
  sub->add_option("--tick-step", cfg.tick_step, "Tick width in radians (estimated when omitted)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--max-passes", cfg.max_passes, "Outlier screening passes per tick")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1000}));
}

void add_fit_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--max-iterations", cfg.max_iterations, "Levenberg-Marquardt iteration cap")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1000000}));
  sub->add_option("--weighting", cfg.weighting, "Tick weights: uniform, count or inverse-variance")
      ->check(CLI::IsMember({"uniform", "count", "inverse-variance"}));
}

void add_angular_options(CLI::App* sub, RunConfig& cfg, bool required) {
  auto* v = sub->add_option("--sigma-vertical", cfg.sigma_vertical, "Vertical angle sigma [rad]")
                ->check(CLI::PositiveNumber);
  auto* h = sub->add_option("--sigma-horizontal", cfg.sigma_horizontal, "Horizontal angle sigma [rad]")
                ->check(CLI::PositiveNumber);
  if (required) {
    v->required();
    h->required();
  } else {
    v->needs(h);
    h->needs(v);
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Intensity-based range variance models for terrestrial laser scanners", "rangevar"};
  app.set_config("--config", "", "Read options from a TOML/INI file; flags override file values");
  app.require_subcommand(1);

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic multi-profile scan");
  simulate->add_option("--sim", cfg.simulate, "Simulation config file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--seed", cfg.seed, "Override the config seed");
  simulate->add_option("--out", cfg.out, "Output directory")->required();

  auto* validate = app.add_subcommand("validate", "Parse and check a profile CSV");
  validate->add_option("--input", cfg.input, "Profile CSV")->required()->check(CLI::ExistingFile);
  validate->add_option("--out", cfg.out, "Output directory for validation.json");
  add_ingest_options(validate, cfg);

  auto* preprocess = app.add_subcommand("preprocess", "Group by tick, reject outliers, compute tick statistics");
  preprocess->add_option("--input", cfg.input, "Profile CSV")->required()->check(CLI::ExistingFile);
  preprocess->add_option("--out", cfg.out, "Output directory")->required();
  add_ingest_options(preprocess, cfg);
  add_preprocess_options(preprocess, cfg);

  auto* calibrate = app.add_subcommand("calibrate", "Calibrate scaled tick intensities");
  calibrate->add_option("--input", cfg.input, "Tick statistics CSV")->required()->check(CLI::ExistingFile);
  calibrate->add_option("--out", cfg.out, "Output directory")->required();
  calibrate->add_option("--r-ref", cfg.r_ref, "Reference range [m] (default: mean tick range)")
      ->check(CLI::PositiveNumber);

  auto* fit = app.add_subcommand("fit", "Fit sigma_r = a * I^b + c to tick statistics");
  fit->add_option("--input", cfg.input, "Tick statistics CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--out", cfg.out, "Model JSON path or output directory")->required();
  fit->add_option("--intensity-kind", cfg.intensity_kind, "Tag for the fitted model: raw or scaled")
      ->check(CLI::IsMember({"raw", "scaled"}));
  fit->add_flag("--uncalibrated", cfg.uncalibrated, "Fit mean intensities even if calibrated ones exist");
  add_fit_options(fit, cfg);

  auto* evaluate = app.add_subcommand("evaluate", "Residuals of a model against tick statistics");
  evaluate->add_option("--model", cfg.model, "Model JSON")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--input", cfg.input, "Tick statistics CSV")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--out", cfg.out, "Output directory")->required();

  auto* compare = app.add_subcommand("compare", "Difference of two models over an intensity grid");
  compare->add_option("--model", cfg.model, "First model JSON")->required()->check(CLI::ExistingFile);
  compare->add_option("--against", cfg.against, "Second model JSON")->required()->check(CLI::ExistingFile);
  compare->add_option("--grid-min", cfg.grid_min, "Lowest grid intensity")->check(CLI::PositiveNumber);
  compare->add_option("--grid-max", cfg.grid_max, "Highest grid intensity")->check(CLI::PositiveNumber);
  compare->add_option("--grid-points", cfg.grid_points, "Number of log-spaced grid points")
      ->check(CLI::Range(std::size_t{1}, std::size_t{10000000}));
  compare->add_option("--out", cfg.out, "Output directory")->required();

  auto* vcm = app.add_subcommand("vcm", "Per-point diagonal VCM blocks");
  vcm->add_option("--model", cfg.model, "Model JSON")->required()->check(CLI::ExistingFile);
  vcm->add_option("--input", cfg.input, "Profile CSV")->required()->check(CLI::ExistingFile);
  vcm->add_option("--r-ref", cfg.r_ref, "Reference range [m], required for calibrated models")
      ->check(CLI::PositiveNumber);
  vcm->add_option("--out", cfg.out, "Output directory")->required();
  add_ingest_options(vcm, cfg);
  add_angular_options(vcm, cfg, true);

  auto* pipeline = app.add_subcommand("pipeline", "Simulate or ingest, then preprocess, calibrate, fit, evaluate");
  auto* sim_opt = pipeline->add_option("--simulate", cfg.simulate, "Simulation config file")
                      ->check(CLI::ExistingFile);
  auto* input_opt = pipeline->add_option("--input", cfg.input, "Profile CSV")->check(CLI::ExistingFile);
  sim_opt->excludes(input_opt);
  pipeline->add_option("--seed", cfg.seed, "Override the simulation seed")->needs(sim_opt);
  pipeline->add_option("--r-ref", cfg.r_ref, "Reference range [m] for scaled data")->check(CLI::PositiveNumber);
  pipeline->add_option("--out", cfg.out, "Output directory")->required();
  add_ingest_options(pipeline, cfg);
  add_preprocess_options(pipeline, cfg);
  add_fit_options(pipeline, cfg);
  add_angular_options(pipeline, cfg, false);

  std::vector<const char*> argv{"rangevar"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    if (pipeline->parsed() && cfg.simulate.empty() && cfg.input.empty()) {
      throw CLI::RequiredError("pipeline needs --simulate or --input");
    }
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* failed = &app;
    for (const auto* sub : app.get_subcommands()) failed = sub;
    err << failed->help();
    return kExitUsage;
  }

  try {
    Session session(cfg, out);
    if (simulate->parsed()) session.simulate();
    if (validate->parsed()) session.validate();
    if (preprocess->parsed()) session.preprocess();
    if (calibrate->parsed()) session.calibrate();
    if (fit->parsed()) session.fit();
    if (evaluate->parsed()) session.evaluate();
    if (compare->parsed()) session.compare();
    if (vcm->parsed()) session.vcm();
    if (pipeline->parsed()) session.pipeline();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomainError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomainError;
  }
  return kExitOk;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace rangevar::cli
