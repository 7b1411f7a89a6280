#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "rangevar/errors.hpp"
#include "rangevar/io.hpp"

using namespace rangevar;
namespace fs = std::filesystem;

namespace {

std::vector<TickStats> random_ticks(unsigned seed, int n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<TickStats> ticks;
  for (int k = 0; k < n; ++k) {
    ticks.push_back({k * 3 + 1, u(rng) * 0.7, std::pow(10.0, 2.0 + 3.0 * u(rng)), 5.0 + 50.0 * u(rng),
                     0.1 + 5.0 * u(rng), static_cast<std::size_t>(30 + 3000 * u(rng))});
  }
  return ticks;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(RANGEVAR_TEST_TMP) / "io";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(TickCsv, RoundTripIsExact) {
  const auto ticks = random_ticks(1, 40);
  std::ostringstream out;
  io::write_tick_stats_csv(out, ticks);
  EXPECT_EQ(lines(out.str()).front(), "tick_id,vertical_angle_center,mean_intensity,mean_range_m,std_range_mm,count");
  std::istringstream in(out.str());
  const auto table = io::read_tick_csv(in);
  EXPECT_FALSE(table.calibrated());
  EXPECT_EQ(table.ticks, ticks);
}

TEST(TickCsv, CalibratedRoundTrip) {
  const auto ticks = random_ticks(2, 10);
  std::vector<CalibratedTickStats> cal;
  for (const auto& t : ticks) cal.push_back({t, t.mean_intensity * 10.0 / (t.mean_range * t.mean_range)});
  std::ostringstream out;
  out << "#intensity_kind=scaled\n";
  io::write_calibrated_ticks_csv(out, cal);
  std::istringstream in(out.str());
  const auto table = io::read_tick_csv(in);
  ASSERT_TRUE(table.calibrated());
  EXPECT_EQ(table.intensity_kind, IntensityKind::Scaled);
  const auto back = table.as_calibrated();
  ASSERT_EQ(back.size(), cal.size());
  for (std::size_t k = 0; k < cal.size(); ++k) {
    EXPECT_EQ(back[k].stats, cal[k].stats);
    EXPECT_EQ(back[k].calibrated_intensity, cal[k].calibrated_intensity);
  }
}

TEST(TickCsv, RejectsMalformedInput) {
  std::istringstream missing("tick_id,mean_intensity\n1,2\n");
  EXPECT_THROW(io::read_tick_csv(missing), Error);
  std::istringstream bad(
      "tick_id,vertical_angle_center,mean_intensity,mean_range_m,std_range_mm,count\n1,0,abc,10,1,30\n");
  EXPECT_THROW(io::read_tick_csv(bad), Error);
}

TEST(ModelJson, RoundTripThroughReport) {
  FitReport report;
  report.model = {29853.123456789, -1.0212345678901234, 0.0812345, 101.5, 99876.25, IntensityKind::Raw};
  report.converged = true;
  report.iterations = 17;
  report.point_count = 20;
  report.initial_cost = 3.5;
  report.final_cost = 0.25;
  report.variance_factor = 0.25 / 17.0;
  report.parameter_stddevs = Eigen::Vector3d(12.0, 0.001, std::numeric_limits<double>::quiet_NaN());
  const auto text = io::fit_report_json(report);
  const auto j = nlohmann::json::parse(text);
  EXPECT_EQ(j["model"]["a_unit"], "mm/INC");
  EXPECT_EQ(j["model"]["c_unit"], "mm");
  EXPECT_EQ(j["model"]["intensity_kind"], "raw");
  EXPECT_TRUE(j["diagnostics"]["converged"].get<bool>());
  EXPECT_EQ(j["diagnostics"]["iterations"], 17);
  EXPECT_TRUE(j["parameter_stddevs"]["c"].is_null());
  const auto m = io::parse_model_json(text);
  EXPECT_EQ(m.a, report.model.a);
  EXPECT_EQ(m.b, report.model.b);
  EXPECT_EQ(m.c, report.model.c);
  EXPECT_EQ(m.intensity_min, report.model.intensity_min);
  EXPECT_EQ(m.intensity_max, report.model.intensity_max);
  EXPECT_EQ(m.intensity_kind, IntensityKind::Raw);
}

TEST(ModelJson, CalibratedUnitsAndBareModel) {
  FitReport report;
  report.model = {1e5, -1.0, 0.1, 1.0, 100.0, IntensityKind::Calibrated};
  const auto j = nlohmann::json::parse(io::fit_report_json(report));
  EXPECT_EQ(j["model"]["a_unit"], "mm*m/%");
  const auto m = io::parse_model_json(j["model"].dump());
  EXPECT_EQ(m.intensity_kind, IntensityKind::Calibrated);
  EXPECT_EQ(m.a, 1e5);
}

TEST(ModelJson, RejectsIncompleteModels) {
  EXPECT_THROW(io::parse_model_json("{}"), Error);
  EXPECT_THROW(io::parse_model_json("not json"), Error);
  EXPECT_THROW(io::parse_model_json(R"({"a": 1, "b": -1})"), Error);
}

TEST(CurveCsv, LogSpacedAcrossDomain) {
  const RangeVarianceModel m{100.0, -1.0, 0.1, 10.0, 1e4, IntensityKind::Raw};
  std::ostringstream out;
  io::write_curve_csv(out, m, 4);
  const auto l = lines(out.str());
  ASSERT_EQ(l.size(), 5u);
  EXPECT_EQ(l[0], "intensity,sigma_mm");
  EXPECT_EQ(l[1], "10,10.1");
  EXPECT_EQ(l[4], "10000,0.11");
}

TEST(EvaluationCsv, RowsAndFooter) {
  EvaluationReport r;
  r.residuals = {{3, 100.0, 1.5, 1.25, -0.25, false}, {4, 5e5, 0.1, 0.09, -0.01, true}};
  r.rmse = 0.5;
  r.max_abs_residual = 0.25;
  r.extrapolated_count = 1;
  std::ostringstream out;
  io::write_evaluation_csv(out, r);
  const auto l = lines(out.str());
  ASSERT_EQ(l.size(), 6u);
  EXPECT_EQ(l[0], "tick_id,intensity,observed_std_mm,predicted_std_mm,residual_mm,extrapolated");
  EXPECT_EQ(l[1], "3,100,1.5,1.25,-0.25,0");
  EXPECT_EQ(l[2], "4,5e+05,0.1,0.09,-0.01,1");
  EXPECT_EQ(l[3], "#rmse_mm=0.5");
  EXPECT_EQ(l[4], "#max_abs_residual_mm=0.25");
  EXPECT_EQ(l[5], "#extrapolated_count=1");
}

TEST(VcmCsv, OneRowPerObservation) {
  VcmBlocks v;
  Eigen::Matrix3d b = Eigen::Matrix3d::Zero();
  b.diagonal() << 4.0, 1e-10, 2.5e-11;
  v.blocks = {b, b};
  std::ostringstream out;
  io::write_vcm_csv(out, v);
  const auto l = lines(out.str());
  ASSERT_EQ(l.size(), 3u);
  EXPECT_EQ(l[0], "index,var_range_mm2,var_vert_rad2,var_horiz_rad2");
  EXPECT_EQ(l[2], "1,4,1e-10,2.5e-11");
}

TEST(GroundTruthCsv, Format) {
  GroundTruth t;
  t.ticks = {{0, 0, 10.0, 1000.0, 0.2, 1000.0}};
  std::ostringstream out;
  io::write_ground_truth_csv(out, t);
  EXPECT_EQ(out.str(), "tick_id,true_intensity,true_sigma_mm\n0,1000,0.2\n");
}

TEST(Files, AtomicWriteAndRead) {
  const auto path = scratch("atomic.txt");
  io::write_file_atomic(path, "first\n");
  io::write_file_atomic(path, "second\n");
  EXPECT_EQ(io::read_file(path), "second\n");
  EXPECT_FALSE(fs::exists(path.string() + ".tmp"));
  try {
    io::read_file(scratch("does_not_exist.txt"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
  }
}

TEST(ValidationJson, CarriesViolations) {
  ValidationReport r;
  r.violations.push_back({5, "range must be > 0"});
  const auto j = nlohmann::json::parse(io::validation_report_json(r));
  EXPECT_FALSE(j["ok"].get<bool>());
  EXPECT_EQ(j["violations"][0]["index"], 5);
}
