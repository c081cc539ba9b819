#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "predtrig/cli.hpp"

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = predtrig::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST(Cli, PeriodTable) {
  const auto r = run({"period", "--preset", "example1", "--cost-grid", "0.25,0.6,3"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "C,M\n0.25,3\n0.59999999999999998,7\n3,-1\n");
}

TEST(Cli, SimulateWritesOneRowPerStep) {
  const auto r = run({"simulate", "--preset", "example2", "--trigger", "pt", "--horizon", "2",
                      "--cost", "0.3", "--steps", "25"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(r.out), 26u);
  EXPECT_EQ(r.out.rfind("k,x[0],y[0],xhatF[0],xhat[0],gamma,Emean,Evar,E,cost\n", 0), 0u);
}

TEST(Cli, SweepRowCount) {
  const auto r = run({"sweep", "--preset", "example1", "--trigger", "et,pt,st", "--horizon", "2",
                      "--cost-grid", "0.01,0.02,0.05,0.1,0.15,0.2,0.3,0.5,0.8,1.2,1.8,2.5",
                      "--runs", "4", "--steps", "30"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(r.out), 37u);
}

TEST(Cli, ConfigFileAndOutputFile) {
  const auto dir = std::filesystem::temp_directory_path() / "predtrig_cli_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "s.cfg") << "model.preset = example1\n[trigger]\nkind = st\ncost = 0.6\n"
                                  "[sim]\nsteps = 40\n";
  const auto r = run({"simulate", "--config", (dir / "s.cfg").string(), "--out",
                      (dir / "trace.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(dir / "trace.csv");
  std::stringstream buf;
  buf << in.rdbuf();
  EXPECT_EQ(count_lines(buf.str()), 41u);
  std::filesystem::remove_all(dir);
}

TEST(Cli, ExitCodes) {
  auto r = run({"period", "--preset", "example9", "--cost", "1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error: config:", 0), 0u);
  EXPECT_EQ(count_lines(r.err), 1u);

  EXPECT_EQ(run({"simulate", "--preset", "example1", "--trigger", "pt", "--cost", "1"}).code, 2);
  EXPECT_EQ(run({"simulate", "--preset", "example1", "--trigger", "et"}).code, 2);
  EXPECT_EQ(run({"simulate", "--trigger", "et", "--cost", "1"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"sweep", "--preset", "example1", "--trigger", "et", "--cost-grid", "0.1,-1"}).code,
            2);

  r = run({"simulate", "--preset", "example1", "--trigger", "et", "--cost", "1", "--steps", "5",
           "--out", "/nonexistent-dir/x.csv"});
  EXPECT_EQ(r.code, 4);
  EXPECT_EQ(r.err.rfind("error: io:", 0), 0u);

  // Unstable, unobservable plant: the Riccati iteration diverges.
  const auto dir = std::filesystem::temp_directory_path() / "predtrig_cli_numeric";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "bad.cfg") << "[model]\nnx = 1\nny = 1\nA = 2\nH = 0\nQ = 0.1\nR = 0.1\n"
                                    "[prior]\nx0_mean = 0\nx0_cov = 1\n";
  r = run({"period", "--config", (dir / "bad.cfg").string(), "--cost", "1"});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.err.rfind("error: numeric:", 0), 0u);
  std::filesystem::remove_all(dir);

  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, ValidateOutcomes) {
  auto r = run({"validate", "--preset", "example1", "--runs", "2000"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("PASS et_equals_pt_m0"), std::string::npos);

  r = run({"validate", "--preset", "example1", "--runs", "2000", "--fault-variance-scale", "1.5"});
  EXPECT_EQ(r.code, 5);
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
  EXPECT_EQ(r.err.rfind("error: validation:", 0), 0u);

  r = run({"validate", "--preset", "example1", "--runs", "100"});
  EXPECT_EQ(r.code, 6);
  EXPECT_EQ(r.err.rfind("error: inconclusive:", 0), 0u);
}

TEST(Cli, WorkersDoNotChangeOutput) {
  std::vector<std::string> base{"sweep", "--preset", "example2", "--trigger", "et,st",
                                "--cost-grid", "0.2,0.9", "--runs", "40", "--steps", "60"};
  auto with = [&](const std::string& w) {
    auto args = base;
    args.insert(args.end(), {"--workers", w});
    return run(args).out;
  };
  const std::string one = with("1");
  EXPECT_EQ(with("3"), one);
  EXPECT_EQ(with("8"), one);
  EXPECT_EQ(run({"sweep", "--preset", "example2", "--trigger", "et", "--cost", "0.2",
                 "--workers", "0"})
                .code,
            2);
}
