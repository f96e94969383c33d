#include "bloch2q/cli.hpp"

#include "json.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

using namespace bloch2q;
using nlohmann::json;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "bloch2q");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("bloch2q_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& content) const {
    std::ofstream(path(name)) << content;
    return path(name);
  }

  std::vector<std::vector<double>> read_csv(const std::string& file) const {
    std::ifstream in(file);
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
      std::vector<double> row;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
      rows.push_back(row);
    }
    return rows;
  }

  std::filesystem::path dir_;
};

constexpr int kPurityA = 21;
constexpr int kPurityB = 22;

TEST_F(CliTest, SimulateDampingGivesMonotonePurityA) {
  const std::string model = write("damping.json", R"({"omega_a": 1, "omega_b": 0.5,
      "coupling": {"case": "dispersive", "g": 1}, "jumps": [[[0,0],[1,0]]]})");
  const Result r = run({"simulate", "--model", model, "--horizon", "20", "--step", "1e-3", "--u0", "0,0,0",
                        "--stride", "100", "--out", path("traj.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(path("traj.csv"));
  ASSERT_EQ(rows.size(), 201u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GT(rows[i][kPurityA], rows[i - 1][kPurityA]);
  EXPECT_TRUE(std::filesystem::exists(path("traj.csv.meta.json")));
  const json summary = json::parse(r.out);
  EXPECT_FALSE(summary["aborted"].get<bool>());
}

TEST_F(CliTest, SimulateUncoupledKeepsPurityB) {
  const std::string model = write("free.json", R"({"omega_a": 1, "omega_b": 0.7, "jumps": [[[0,0],[1,0]]]})");
  const Result r = run({"simulate", "--model", model, "--horizon", "5", "--control", "random-pwc:4", "--seed", "3",
                        "--init-b", "0.1,0.2,0.3", "--out", path("free.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(path("free.csv"));
  for (const auto& row : rows) EXPECT_NEAR(row[kPurityB], rows[0][kPurityB], 1e-12);
}

TEST_F(CliTest, SimulateProtectedSigma31) {
  const Result r = run({"simulate", "--case", "sigma3-sigma1", "--g", "1", "--omega-a", "1", "--omega-b", "0.5",
                        "--damping", "0.5", "--control", "feedback:protect-sigma31", "--init-a", "0,0,-0.5",
                        "--init-b", "0.3,0,0.4", "--horizon", "20", "--stride", "50", "--out", path("p.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const auto& row : read_csv(path("p.csv"))) EXPECT_GE(row[kPurityB], 1.0 - 1e-7);
}

TEST_F(CliTest, SimulateIsDeterministic) {
  const std::vector<std::string> base = {"simulate", "--case", "resonant", "--damping", "0.2", "--horizon", "2",
                                         "--control", "random-pwc", "--seed", "11"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out", path("a.csv")});
  b.insert(b.end(), {"--out", path("b.csv")});
  ASSERT_EQ(run(a).code, 0);
  ASSERT_EQ(run(b).code, 0);
  std::ifstream fa(path("a.csv")), fb(path("b.csv"));
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());
}

TEST_F(CliTest, SimulateJsonAndOutDirEnv) {
  setenv(kOutDirEnv, dir_.c_str(), 1);
  const Result r = run({"simulate", "--case", "dispersive", "--horizon", "0.1", "--format", "json"});
  unsetenv(kOutDirEnv);
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(std::ifstream(path("trajectory.json")));
  EXPECT_EQ(doc["records"].size(), 101u);
  EXPECT_EQ(doc["metadata"]["seed"].get<int>(), 1);
}

TEST_F(CliTest, ConfigFileSuppliesDefaults) {
  const std::string cfg = write("cfg.json", R"({"case": "dispersive", "horizon": 0.05, "out": ")" + path("c.csv") + R"("})");
  const Result r = run({"simulate", "--config", cfg, "--step", "0.01"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_csv(path("c.csv")).size(), 6u);
}

TEST_F(CliTest, AnalyzeWDispersive) {
  const Result r = run({"analyze-w", "--case", "dispersive", "--out", path("w.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_LE(doc["max_residual"].get<double>(), 1e-11);
  EXPECT_TRUE(doc["structure"]["ok"].get<bool>());
}

TEST_F(CliTest, AnalyzeWResonantReportsSolutionClasses) {
  const Result r = run({"analyze-w", "--case", "resonant", "--damping", "0.1", "--grid-step", "0.125", "--out",
                        path("w.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_TRUE(doc["obstruction"]["sweep"].contains("solution_classes"));
  EXPECT_LE(doc["obstruction"]["sweep"]["worst_vA_deficit"].get<double>(), 1e-6);
}

TEST_F(CliTest, AnalyzeWSigma31) {
  const Result r = run({"analyze-w", "--case", "sigma3-sigma1", "--damping", "1", "--samples", "20", "--out",
                        path("w.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LE(json::parse(r.out)["max_residual"].get<double>(), 1e-12);
}

TEST_F(CliTest, PurificationScan) {
  const Result r = run({"purification-scan", "--case", "resonant", "--damping", "0.1", "--laws", "3", "--horizons",
                        "5,10", "--out", path("scan.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(std::ifstream(path("scan.json")));
  EXPECT_EQ(doc["entries"].size(), 8u);
  EXPECT_TRUE(doc["all_positive"].get<bool>());
  EXPECT_EQ(doc["kind"], "numerical evidence");
}

TEST_F(CliTest, PurificationScanNearlyPureStart) {
  // Full purity (1/2 + 2 a^2)(1/2 + 2 b^2) = 1 - 1e-3 with b = a.
  const double a = std::sqrt((std::sqrt(1.0 - 1e-3) - 0.5) / 2.0);
  const std::string v = "0,0," + std::to_string(a);
  const Result r = run({"purification-scan", "--case", "resonant", "--damping", "0.1", "--laws", "2", "--horizons",
                        "5", "--init-a", v, "--init-b", v, "--out", path("scan.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(json::parse(r.out)["all_positive"].get<bool>());
}

TEST_F(CliTest, PurificationScanRejectsBoundaryStart) {
  const Result r = run({"purification-scan", "--case", "resonant", "--init-a", "0,0,0.5", "--init-b", "0.5,0,0",
                        "--out", path("scan.json")});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("boundary"), std::string::npos);
}

TEST_F(CliTest, ErrorTaxonomy) {
  const Result unknown = run({"analyze-w", "--case", "swap"});
  EXPECT_EQ(unknown.code, kExitConfig);
  EXPECT_EQ(json::parse(unknown.err)["error"]["kind"], "config");
  EXPECT_EQ(run({"simulate"}).code, kExitConfig);
  EXPECT_EQ(run({"simulate", "--model", path("missing.json")}).code, kExitConfig);
  EXPECT_EQ(run({"frobnicate"}).code, kExitConfig);
  EXPECT_EQ(run({"simulate", "--case", "dispersive", "--control", "bang-bang"}).code, kExitConfig);
  EXPECT_EQ(run({"simulate", "--case", "dispersive", "--step", "-1"}).code, kExitConfig);
  EXPECT_EQ(run({"simulate", "--case", "dispersive", "--control", "feedback:protect-sigma31"}).code, kExitConfig);
  // A step far outside the RK4 stability region blows the state up: numerical failure.
  const Result blown = run({"simulate", "--case", "dispersive", "--damping", "10", "--horizon", "5", "--step",
                            "0.1", "--out", path("blown.csv")});
  EXPECT_EQ(blown.code, kExitNumerical);
  EXPECT_EQ(json::parse(blown.err)["error"]["kind"], "numerical");
  EXPECT_EQ(run({"--help"}).code, kExitOk);
}

TEST_F(CliTest, IncompatibleProtectionIsReported) {
  const Result r = run({"simulate", "--case", "sigma3-sigma1", "--damping", "1", "--control",
                        "feedback:protect-sigma31", "--init-a", "0,0,0.5", "--init-b", "0,0,0.5", "--horizon", "0.1",
                        "--out", path("x.csv")});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("v0_3/2"), std::string::npos);
}

}  // namespace
