#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "rangevar/cli.hpp"
#include "rangevar/io.hpp"

namespace fs = std::filesystem;
using rangevar::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path workdir(const std::string& name) {
  const fs::path dir = fs::path(RANGEVAR_TEST_TMP) / "cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_sim_config(const fs::path& dir, const std::string& extra = "") {
  const auto path = dir / "sim.cfg";
  std::ofstream f(path);
  f << "seed = 11\nk_system = 1e7\ntruth = 29853, -1.02, 0.08\n"
    << "board = 0.99, 10, 0, 2, 300\nboard = 0.3, 10, 0, 2, 300\nboard = 0.05, 10, 0, 2, 300\n"
    << "board = 0.01, 10, 0, 2, 300\n"
    << extra;
  return path;
}

std::string slurp(const fs::path& p) { return rangevar::io::read_file(p); }

}  // namespace

TEST(Cli, HelpExitsZero) {
  const auto r = call({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("pipeline"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(call({}).code, 2);
  EXPECT_EQ(call({"frobnicate"}).code, 2);
  const auto dir = workdir("usage");
  const auto sim = write_sim_config(dir);
  const auto r = call({"simulate", "--sim", sim.string(), "--out", dir.string(), "--bogus"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--bogus"), std::string::npos);
  EXPECT_EQ(call({"pipeline", "--out", dir.string()}).code, 2);
  EXPECT_EQ(call({"fit", "--input", (dir / "missing.csv").string(), "--out", dir.string()}).code, 2);
}

TEST(Cli, StepByStepWorkflow) {
  const auto dir = workdir("steps");
  const auto sim = write_sim_config(dir);
  ASSERT_EQ(call({"simulate", "--sim", sim.string(), "--out", dir.string()}).code, 0);
  ASSERT_TRUE(fs::exists(dir / "scan.csv"));
  ASSERT_TRUE(fs::exists(dir / "ground_truth.csv"));

  ASSERT_EQ(call({"validate", "--input", (dir / "scan.csv").string(), "--out", dir.string()}).code, 0);
  const auto validation = nlohmann::json::parse(slurp(dir / "validation.json"));
  EXPECT_TRUE(validation["ok"].get<bool>());
  EXPECT_EQ(validation["observation_count"], 8 * 300);

  ASSERT_EQ(call({"preprocess", "--input", (dir / "scan.csv").string(), "--out", dir.string()}).code, 0);
  ASSERT_TRUE(fs::exists(dir / "ticks.csv"));

  const auto model = dir / "model.json";
  const auto fit = call({"fit", "--input", (dir / "ticks.csv").string(), "--out", model.string()});
  ASSERT_EQ(fit.code, 0) << fit.err;
  ASSERT_TRUE(fs::exists(model));
  EXPECT_TRUE(fs::exists(dir / "model_curve.csv"));
  const auto j = nlohmann::json::parse(slurp(model));
  EXPECT_NEAR(j["model"]["b"].get<double>(), -1.02, 0.1);

  ASSERT_EQ(call({"evaluate", "--model", model.string(), "--input", (dir / "ticks.csv").string(), "--out",
                  dir.string()})
                .code,
            0);
  EXPECT_NE(slurp(dir / "evaluation.csv").find("#rmse_mm="), std::string::npos);

  ASSERT_EQ(call({"compare", "--model", model.string(), "--against", model.string(), "--out", dir.string()}).code,
            0);
  EXPECT_TRUE(fs::exists(dir / "comparison.csv"));

  ASSERT_EQ(call({"vcm", "--model", model.string(), "--input", (dir / "scan.csv").string(), "--sigma-vertical",
                  "1e-5", "--sigma-horizontal", "2e-5", "--out", dir.string()})
                .code,
            0);
  std::ifstream vcm(dir / "vcm.csv");
  std::size_t rows = 0;
  for (std::string l; std::getline(vcm, l);) ++rows;
  EXPECT_EQ(rows, 8u * 300u + 1u);
}

TEST(Cli, DomainErrorsExitOne) {
  const auto dir = workdir("domain");
  {
    std::ofstream f(dir / "bad.csv");
    f << "profile,vertical_angle,horizontal_angle,range,intensity\n0,0.1,0,-5,100\n";
  }
  const auto r = call({"preprocess", "--input", (dir / "bad.csv").string(), "--out", dir.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("InvalidRange"), std::string::npos);

  {
    std::ofstream f(dir / "ticks.csv");
    f << "tick_id,vertical_angle_center,mean_intensity,mean_range_m,std_range_mm,count\n"
      << "0,0,100,10,1,30\n1,0.1,200,10,0.5,30\n";
  }
  EXPECT_EQ(call({"fit", "--input", (dir / "ticks.csv").string(), "--out", (dir / "m.json").string()}).code, 1);
  EXPECT_FALSE(fs::exists(dir / "m.json"));

  // Raw tick statistics are never calibrated.
  const auto raw = call({"calibrate", "--input", (dir / "ticks.csv").string(), "--out", dir.string()});
  EXPECT_EQ(raw.code, 1);
  EXPECT_NE(raw.err.find("KindMismatch"), std::string::npos);

  const auto sim = write_sim_config(dir, "board = 2.0, 10, 0, 1, 10\n");
  EXPECT_EQ(call({"simulate", "--sim", sim.string(), "--out", dir.string()}).code, 1);
}

TEST(Cli, PipelineIsDeterministicAndSeedOverrides) {
  const auto base = workdir("determinism");
  const auto sim = write_sim_config(base, "scaling = inverse_square\nr_ref = 10\n");
  const std::vector<std::string> files{"scan.csv", "ticks.csv", "calibrated_ticks.csv", "model.json",
                                       "evaluation.csv", "model_curve.csv"};
  std::vector<std::string> first;
  for (int k = 0; k < 2; ++k) {
    const auto out = base / ("run" + std::to_string(k));
    const auto r = call({"pipeline", "--simulate", sim.string(), "--out", out.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    for (std::size_t f = 0; f < files.size(); ++f) {
      ASSERT_TRUE(fs::exists(out / files[f])) << files[f];
      if (k == 0) {
        first.push_back(slurp(out / files[f]));
      } else {
        EXPECT_EQ(slurp(out / files[f]), first[f]) << files[f];
      }
    }
  }
  const auto other = base / "seeded";
  ASSERT_EQ(call({"pipeline", "--simulate", sim.string(), "--seed", "99", "--out", other.string()}).code, 0);
  EXPECT_NE(slurp(other / "scan.csv"), first[0]);
  const auto j = nlohmann::json::parse(slurp(base / "run0" / "model.json"));
  EXPECT_EQ(j["model"]["intensity_kind"], "calibrated");
}

TEST(Cli, ConfigFileSuppliesOptions) {
  const auto dir = workdir("config");
  const auto sim = write_sim_config(dir);
  {
    std::ofstream f(dir / "run.toml");
    f << "[pipeline]\nsimulate = \"" << sim.generic_string() << "\"\nout = \"" << (dir / "out").generic_string()
      << "\"\nweighting = \"inverse-variance\"\n";
  }
  const auto r = call({"--config", (dir / "run.toml").string(), "pipeline"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "out" / "model.json"));
}
