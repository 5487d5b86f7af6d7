// Runs the chaplygin-kit executable end to end and checks the exit-code
// contract, the CSV/JSON outputs and the emitted plot script.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "csv.hpp"
#include "oracles.hpp"

#ifndef CHAPLYGIN_KIT
#error "CHAPLYGIN_KIT must name the executable under test"
#endif

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class Kit : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("chaplygin_cli_run_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& name, const json& doc) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << doc.dump(2);
    return p;
  }

  int run(const std::string& cmd, const fs::path& config, const std::string& extra = "") {
    const std::string line = std::string("\"") + CHAPLYGIN_KIT + "\" " + cmd + " --config \"" +
                             config.string() + "\" " + extra + " > \"" + (dir_ / "stdout.txt").string() +
                             "\" 2> \"" + (dir_ / "stderr.txt").string() + "\"";
    const int status = std::system(line.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

json particle(double a) {
  json doc = json::parse(R"({
    "system": {"name": "particle", "params": {}},
    "initial_state": {"s": [0, 0.5], "p": [1, 0.3]},
    "integrator": {"method": "rk45", "tol": 1e-10, "t_end": 10},
    "diagnostics": {"grid": {"lo": -1, "hi": 1, "points": 11}, "samples": 20},
    "output": {"trajectory": "traj.csv", "report": "report.json"}
  })");
  doc["system"]["params"]["a"] = a;
  return doc;
}

TEST_F(Kit, SimulateParticle) {
  ASSERT_EQ(run("simulate", write_config("c.json", particle(0.0))), 0) << slurp(dir_ / "stderr.txt");
  const auto t = chaplygin::cli::read_csv(dir_ / "traj.csv");
  EXPECT_EQ(t.columns, (std::vector<std::string>{"t", "s1", "s2", "p1", "p2", "H", "liouville_residual"}));
  ASSERT_GT(t.rows.size(), 10u);
  const double H0 = t.rows.front()[5];
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (i > 0) EXPECT_GT(t.rows[i][0], t.rows[i - 1][0]);
    EXPECT_LE(std::abs(t.rows[i][5] - H0), 1e-8);
    EXPECT_LE(std::abs(t.rows[i][6]), 1e-5);
  }
  EXPECT_DOUBLE_EQ(t.rows.back()[0], 10.0);
  EXPECT_FALSE(t.comments.empty());
}

TEST_F(Kit, SimulateIsDeterministic) {
  const auto cfg = write_config("c.json", particle(0.3));
  ASSERT_EQ(run("simulate", cfg), 0);
  const std::string first = slurp(dir_ / "traj.csv");
  ASSERT_EQ(run("simulate", cfg, "--threads 3"), 0);
  EXPECT_EQ(first, slurp(dir_ / "traj.csv"));
  EXPECT_EQ(first.find('\r'), std::string::npos);
}

TEST_F(Kit, SimulateDiskKeepsMomenta) {
  json doc = particle(0.0);
  doc["system"] = {{"name", "disk"}, {"params", {{"m", 2.0}, {"I", 0.5}, {"J", 0.7}, {"R", 1.0}}}};
  ASSERT_EQ(run("simulate", write_config("c.json", doc)), 0);
  const auto t = chaplygin::cli::read_csv(dir_ / "traj.csv");
  for (const auto& row : t.rows) {
    EXPECT_NEAR(row[3], 1.0, 1e-10);
    EXPECT_NEAR(row[4], 0.3, 1e-10);
  }
}

TEST_F(Kit, MalformedConfigWritesNothing) {
  json doc = particle(0.0);
  doc["initial_state"]["p"] = {1, 2, 3};
  EXPECT_EQ(run("simulate", write_config("c.json", doc)), 2);
  EXPECT_FALSE(fs::exists(dir_ / "traj.csv"));
  EXPECT_NE(slurp(dir_ / "stderr.txt").find("/initial_state/p"), std::string::npos);

  std::ofstream(dir_ / "broken.json") << "{\"system\": ";
  EXPECT_EQ(run("simulate", dir_ / "broken.json"), 2);
  EXPECT_EQ(run("simulate", dir_ / "missing.json"), 2);
  EXPECT_EQ(run("simulate", write_config("c2.json", particle(0.0)), "--threads abc"), 2);
}

TEST_F(Kit, DomainExitWritesPartialOutput) {
  json doc = json::parse(R"({
    "system": {"name": "veselova", "params": {"n": 3, "A": [1, 2, 3], "delta": 0.3}},
    "initial_state": {"s": [0, 0], "p": [3, 0]},
    "integrator": {"t_end": 10},
    "output": {"trajectory": "traj.csv"}
  })");
  EXPECT_EQ(run("simulate", write_config("c.json", doc)), 3);
  const auto t = chaplygin::cli::read_csv(dir_ / "traj.csv");
  EXPECT_FALSE(t.rows.empty());
  bool flagged = false;
  for (const auto& c : t.comments) flagged |= c.find("domain exit") != std::string::npos;
  EXPECT_TRUE(flagged);
}

TEST_F(Kit, InitialStateOutsideChartIsPrecondition) {
  json doc = json::parse(R"({
    "system": {"name": "veselova", "params": {"A": [1, 2, 3], "delta": 0.3}},
    "initial_state": {"s": [0.99, 0], "p": [0, 0]},
    "output": {"trajectory": "traj.csv"}
  })");
  EXPECT_EQ(run("simulate", write_config("c.json", doc)), 4);
}

TEST_F(Kit, DiagnoseParticleVerdicts) {
  for (double a : {0.0, 0.5}) {
    ASSERT_EQ(run("diagnose", write_config("c.json", particle(a))), 0) << slurp(dir_ / "stderr.txt");
    const json rep = json::parse(slurp(dir_ / "report.json"));
    for (const char* key : {"theta_exact", "sigma_table", "phi_simple", "phi_table", "pattern_residual_max",
                            "liouville_residual_stats", "conformal_residual_max"})
      EXPECT_TRUE(rep.contains(key)) << key;
    EXPECT_EQ(rep["theta_exact"].get<bool>(), a == 0.0);
    EXPECT_EQ(rep["phi_simple"].get<bool>(), a == 0.0);
    EXPECT_LE(rep["liouville_residual_stats"]["max_abs"].get<double>(), 1e-5);
    if (a == 0.0) {
      EXPECT_EQ(rep["sigma_table"]["rows"].size(), 121u);
    } else {
      EXPECT_TRUE(rep["sigma_table"].is_null());
      EXPECT_TRUE(rep["phi_table"].is_null());
    }
  }
}

TEST_F(Kit, DiagnoseVeselovaPhiTable) {
  json doc = json::parse(R"({
    "system": {"name": "veselova", "params": {"n": 3, "A": [1, 2, 3]}},
    "diagnostics": {"grid": {"lo": -0.6, "hi": 0.6, "points": 9}, "samples": 20},
    "output": {"report": "report.json"}
  })");
  ASSERT_EQ(run("diagnose", write_config("c.json", doc)), 0) << slurp(dir_ / "stderr.txt");
  const json rep = json::parse(slurp(dir_ / "report.json"));
  ASSERT_TRUE(rep["phi_simple"].get<bool>());
  const Eigen::Vector3d A(1, 2, 3);
  double offset = 0.0, worst = 0.0;
  bool first = true;
  for (const auto& row : rep["phi_table"]["rows"]) {
    const Eigen::VectorXd s = Eigen::Vector2d(row[0].get<double>(), row[1].get<double>());
    const double diff = row[2].get<double>() - oracle::veselova_phi(A, oracle::gamma(s));
    if (first) offset = diff;
    first = false;
    worst = std::max(worst, std::abs(diff - offset));
  }
  EXPECT_LE(worst, 1e-4);
}

TEST_F(Kit, DiagnoseGridOutsideChart) {
  json doc = json::parse(R"({
    "system": {"name": "veselova", "params": {"A": [1, 2, 3]}},
    "diagnostics": {"grid": {"lo": -0.9, "hi": 0.9, "points": 5}},
    "output": {"report": "report.json"}
  })");
  EXPECT_EQ(run("diagnose", write_config("c.json", doc)), 4);
}

TEST_F(Kit, HamiltoniseParticle) {
  json doc = particle(0.0);
  doc["hamiltonise"] = {{"phi", {{"source", "builtin"}}}, {"t_end", 10}, {"sample_stride", 10}};
  ASSERT_EQ(run("hamiltonise", write_config("c.json", doc)), 0) << slurp(dir_ / "stderr.txt");
  const auto t = chaplygin::cli::read_csv(dir_ / "traj.csv");
  EXPECT_EQ(t.columns.back(), "tau");
  const json rep = json::parse(slurp(dir_ / "report.json"));
  EXPECT_LE(rep["state_deviation_at_t_end"].get<double>(), 1e-5);
  EXPECT_LE(rep["energy_drift"]["max_abs"].get<double>(), 1e-6);
  EXPECT_TRUE(rep.contains("max_state_deviation"));
}

TEST_F(Kit, HamiltoniseExpressionPhi) {
  json doc = particle(0.0);
  doc["hamiltonise"] = {{"phi", {{"source", "expression"}, {"expression", "-0.5*ln(1+y^2)"}}},
                        {"t_end", 5},
                        {"sample_stride", 10}};
  ASSERT_EQ(run("hamiltonise", write_config("c.json", doc)), 0) << slurp(dir_ / "stderr.txt");
  const json rep = json::parse(slurp(dir_ / "report.json"));
  EXPECT_LE(rep["state_deviation_at_t_end"].get<double>(), 1e-5);
}

TEST_F(Kit, HamiltoniseRefusesNonPhiSimple) {
  json doc = particle(0.5);
  doc["hamiltonise"] = {{"phi", {{"source", "auto"}}}};
  EXPECT_EQ(run("hamiltonise", write_config("c.json", doc)), 4);
  EXPECT_NE(slurp(dir_ / "stderr.txt").find("pattern"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "traj.csv"));
  doc["hamiltonise"] = {{"phi", {{"source", "builtin"}}}};
  EXPECT_EQ(run("hamiltonise", write_config("c.json", doc)), 4);
}

TEST_F(Kit, HamiltoniseZeroPhiOnDiskMatchesSimulate) {
  json doc = particle(0.0);
  doc["system"] = {{"name", "disk"}, {"params", json::object()}};
  doc["hamiltonise"] = {{"phi", {{"source", "expression"}, {"expression", "0"}}}, {"t_end", 5}};
  ASSERT_EQ(run("hamiltonise", write_config("c.json", doc)), 0) << slurp(dir_ / "stderr.txt");
  const json rep = json::parse(slurp(dir_ / "report.json"));
  EXPECT_LE(rep["max_state_deviation"].get<double>(), 1e-10);
}

TEST_F(Kit, EmitPlot) {
  const auto cfg = write_config("c.json", particle(0.0));
  ASSERT_EQ(run("simulate", cfg), 0);
  ASSERT_EQ(run("emit-plot", cfg), 0) << slurp(dir_ / "stderr.txt");
  const std::string script = slurp(dir_ / "traj.csv.gp");
  EXPECT_NE(script.find("'traj.csv'"), std::string::npos);
  EXPECT_NE(script.find("liouville_residual"), std::string::npos);
  EXPECT_EQ(script.find(dir_.string()), std::string::npos);
}

TEST_F(Kit, EmitPlotRejectsBadTrajectories) {
  json doc = particle(0.0);
  doc["output"] = {{"trajectory", "bad.csv"}};
  const auto cfg = write_config("c.json", doc);
  std::ofstream(dir_ / "bad.csv") << "t,s1,s2\n0,1,2\n";
  EXPECT_EQ(run("emit-plot", cfg), 2);
  std::ofstream(dir_ / "bad.csv") << "t,s1,s2,p1,p2,H,liouville_residual\n";
  EXPECT_EQ(run("emit-plot", cfg), 2);
  fs::remove(dir_ / "bad.csv");
  EXPECT_EQ(run("emit-plot", cfg), 2);
}

TEST_F(Kit, UnknownSubcommand) {
  EXPECT_EQ(run("frobnicate", write_config("c.json", particle(0.0))), 2);
}

}  // namespace
