#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "support/cli_runner.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string config(const std::string& name) { return std::string(MONOFLOW_CONFIG_DIR) + "/" + name + ".json"; }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override { dir_ = clirun::scratch_dir(::testing::UnitTest::GetInstance()->current_test_info()->name()); }
  void TearDown() override { fs::remove_all(dir_); }

  clirun::Result run(const std::string& args, const std::string& out = "out") {
    return clirun::run("--out '" + (dir_ / out).string() + "' " + args, dir_);
  }
  json report(const std::string& sub, const std::string& out = "out") {
    return json::parse(clirun::slurp(dir_ / out / (sub + ".json")));
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, WitnessReportsIndices) {
  const auto r = run("witness --A 2 --B 3 --E 1/2 --oracle");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto j = report("witness");
  EXPECT_EQ(j["l_star"], "2");
  EXPECT_EQ(j["n_star"], "3");
  EXPECT_EQ(j["landing_offset"], "0");
  EXPECT_EQ(j["case"], "CaseI");
  const auto manifest = json::parse(clirun::slurp(dir_ / "out" / "manifest.json"));
  EXPECT_EQ(manifest["subcommand"], "witness");
  EXPECT_TRUE(manifest.contains("libraries"));
  EXPECT_TRUE(manifest.contains("tolerances"));
}

TEST_F(Cli, WitnessInvalidProblemIsDomainError) {
  const auto r = run("witness --A 1 --B 1 --E 2");
  EXPECT_EQ(r.exit_code, 1);
  const auto err = json::parse(r.err);
  EXPECT_EQ(err["error"], "InvalidProblem");
}

TEST_F(Cli, CertifyMetzlerIsImmediate) {
  const auto r = run("certify --system '" + config("metzler") + "'");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(report("certify")["kind"], "CooperativeImmediate");
}

TEST_F(Cli, MissingSystemFileIsUsageError) {
  const auto r = run("simulate --system '" + (dir_ / "missing.json").string() + "'");
  EXPECT_EQ(r.exit_code, 2);
}

TEST_F(Cli, UnknownSubcommandIsUsageError) { EXPECT_EQ(run("transmogrify").exit_code, 2); }

TEST_F(Cli, OrderOfTwoPoints) {
  const auto r = run("order --cone '{\"type\":\"orthant\",\"signs\":[1,1]}' --x 0,0 --y 1,1");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(report("order")["relation"], "StrictInterior");
  const auto bad = run("order --cone '{\"type\":\"orthant\",\"signs\":[1,1]}' --x 0,0 --y 1,1,1", "bad");
  EXPECT_EQ(bad.exit_code, 1);
  EXPECT_EQ(json::parse(bad.err)["error"], "DimensionMismatch");
}

TEST_F(Cli, SimulateWritesTrajectory) {
  const auto r = run("simulate --system '" + config("sink") + "' --x0 1,1 --t-end 1 --method rk4 --step 0.1");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const std::string csv = clirun::slurp(dir_ / "out" / "trajectory.csv");
  EXPECT_FALSE(csv.empty());
  // 11 samples plus header.
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 12);
}

TEST_F(Cli, OscillationOfRotationIsOscillating) {
  const auto r = run("oscillation --system '" + config("rotation") + "' --x0 1,0 --horizon 7 --backward-horizon 0");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(report("oscillation")["trials"][0]["status"], "Oscillating");
}

TEST_F(Cli, ReportsAreByteIdenticalAcrossRuns) {
  const std::string args = "--seed 7 oscillation --system '" + config("lv_competitive") + "' --trials 3 --horizon 5 --backward-horizon 0";
  ASSERT_EQ(run(args, "a").exit_code, 0);
  ASSERT_EQ(run(args, "b").exit_code, 0);
  EXPECT_EQ(clirun::slurp(dir_ / "a" / "oscillation.json"), clirun::slurp(dir_ / "b" / "oscillation.json"));
}
