// End-to-end checks of the command-line tool's exit codes and outputs.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(DECAYLAB_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("decaylab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) const {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path small_config(const std::string& name = "small.ini") const {
    return write(name,
                 "[law]\nfamily = power\np = 3\n"
                 "[coefficients]\ndamping_profile = indicator\ndamping_support = 0.2 0.6\n"
                 "damping_floor = 1\nalpha_profile = indicator\nalpha_support = 0.4 0.9\n"
                 "alpha_floor = 0.2\n"
                 "[grid]\nn = 49\n[time]\nt_final = 200\n"
                 "[initial]\nu0 = sine 0.2 1\nv0 = sine 0.2 1\n");
  }

  std::string read(const fs::path& p) const {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("simulate"), 2);
  EXPECT_EQ(run("calc --p notanumber"), 2);
}

TEST_F(Cli, HelpExitsZero) { EXPECT_EQ(run("--help"), 0); }

TEST_F(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(run("simulate --config " + (dir_ / "missing.ini").string()), 2);
  const auto bad = write("bad.ini", "[law]\nfamily = cubic\n");
  EXPECT_EQ(run("simulate --config " + bad.string() + " --out " + dir_.string()), 2);
  EXPECT_EQ(run("calc --family power --p 0.5"), 2);
}

TEST_F(Cli, SimulateThenFit) {
  const auto out = dir_ / "run";
  ASSERT_EQ(run("simulate --config " + small_config().string() + " --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "trace.csv"));
  EXPECT_TRUE(fs::exists(out / "report.txt"));
  EXPECT_NE(read(out / "report.kv").find("passed=true"), std::string::npos);

  const auto trace = (out / "trace.csv").string();
  EXPECT_EQ(run("fit --trace " + trace + " --out " + dir_.string()), 0);
  EXPECT_NE(read(dir_ / "fit.kv").find("slope="), std::string::npos);
  // A decaying trace cannot have a positive slope: failed assertion.
  EXPECT_EQ(run("fit --trace " + trace + " --slope-min 0 --out " + dir_.string()), 1);
  EXPECT_EQ(run("fit --trace " + trace + " --mode sideways"), 2);
  EXPECT_EQ(run("fit --trace " + (dir_ / "nope.csv").string()), 2);

  // Whether the bound holds depends on the data; only a usage error is wrong here.
  const int code = run("compare --trace " + trace + " --family power --p 3 --kind lower"
                       " --calibrate-at 20 --T0 0 --out " + dir_.string());
  EXPECT_TRUE(code == 0 || code == 1);
  EXPECT_NE(read(dir_ / "compare.kv").find("margin_min="), std::string::npos);
}

TEST_F(Cli, TraceOnlyWritesTrace) {
  const auto out = dir_ / "nested" / "deeper";
  ASSERT_EQ(run("simulate --trace-only --config " + small_config().string() + " --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "trace.csv"));
  EXPECT_FALSE(fs::exists(out / "report.kv"));
}

TEST_F(Cli, CalcAndCompareOde) {
  ASSERT_EQ(run("calc --family power --p 3 --limits --out " + dir_.string()), 0);
  EXPECT_NE(read(dir_ / "calc.tsv").find("lambda"), std::string::npos);
  ASSERT_EQ(run("compare --family power --p 3 --horizon 10 --points 11 --out " + dir_.string()), 0);
  EXPECT_EQ(read(dir_ / "comparison.csv").rfind("t,z,K_inverse,lower_envelope", 0), 0u);
}

TEST_F(Cli, SuitePasses) {
  EXPECT_EQ(run("suite --out " + dir_.string()), 0);
  EXPECT_NE(read(dir_ / "suite.txt").find("suite passed"), std::string::npos);
}

TEST_F(Cli, SweepReportsWorstExitCode) {
  const auto configs = dir_ / "configs";
  fs::create_directories(configs);
  fs::copy_file(small_config(), configs / "a.ini");
  ASSERT_EQ(run("sweep --config " + configs.string() + " --out " + (dir_ / "s1").string()), 0);
  EXPECT_TRUE(fs::exists(dir_ / "s1" / "a" / "report.kv"));
  std::ofstream(configs / "b.ini") << "[grid]\ncfl = 3\n";
  EXPECT_EQ(run("sweep --config " + configs.string() + " --jobs 2 --out " + (dir_ / "s2").string()), 2);
  EXPECT_NE(read(dir_ / "s2" / "sweep.tsv").find("a\t0"), std::string::npos);
}
