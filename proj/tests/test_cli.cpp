// End-to-end runs of the isoreal binary.
#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const std::string name = ::testing::UnitTest::GetInstance()->current_test_info()->name();
    dir_ = fs::temp_directory_path() / ("isoreal-cli-" + name);
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result run(const std::string& args) const {
    const fs::path log = dir_ / "stdout.txt";
    const std::string cmd = "cd '" + dir_.string() + "' && '" ISOREAL_CLI "' " + args + " > '" + log.string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read(log);
    fs::remove(log);
    return r;
  }

  static std::string read(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, ClassifyCosSaddle) {
  const auto r = run("classify --potential cos-saddle -o out");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("saddle at (0, 0), lap u = 0"), std::string::npos) << r.out;
  const auto j = read(dir_ / "out" / "critical.json");
  EXPECT_NE(j.find("\"class\": \"saddle\""), std::string::npos);
  EXPECT_NE(j.find("\"count\": 1"), std::string::npos);
}

TEST_F(Cli, ClassifyCubicIsDegenerate) {
  const auto r = run("classify --potential cubic-degenerate -o out");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("1 critical point(s)"), std::string::npos);
  EXPECT_NE(r.out.find("degenerate at"), std::string::npos);
}

TEST_F(Cli, MissingGridFileIsUsageError) {
  const auto r = run("classify --potential grid:missing.csv -o out");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("missing.csv"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("classify --resolution 4").code, 2);
  EXPECT_EQ(run("classify --spacing abc").code, 2);
  EXPECT_EQ(run("probe").code, 2);
  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(Cli, Refusals) {
  EXPECT_EQ(run("portrait -p saddle-3d -o out").code, 2);
  EXPECT_EQ(run("portrait -p cos-saddle --ring-seeds 0 -o out").code, 2);
  const auto r = run("rectify -p cos-saddle -o out");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("rectify refused"), std::string::npos);
  EXPECT_EQ(run("probe saddle -p wavy-ramp -o out").code, 2);
  EXPECT_EQ(run("probe torus -p cos-saddle -o out").code, 2);
}

TEST_F(Cli, ProbeVerdicts) {
  auto r = run("probe saddle -p cos-saddle -o a");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(read(dir_ / "a" / "probe-saddle.json").find("\"verdict\": \"bounded\""), std::string::npos);
  r = run("probe saddle -p counterexample-iii -o b");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(read(dir_ / "b" / "probe-saddle.json").find("\"verdict\": \"diverging\""), std::string::npos);
  r = run("probe torus -p separable:x1-cos -o c");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(read(dir_ / "c" / "probe-torus.json").find("\"realizable\": false"), std::string::npos);
}

TEST_F(Cli, SynthesizeLinearHasZeroResidual) {
  const auto r = run("synthesize -p linear-xy --check-div -n 17 -o out");
  EXPECT_EQ(r.code, 0) << r.out;
  const auto j = read(dir_ / "out" / "sigma.json");
  EXPECT_NE(j.find("\"max_abs\": 0.0"), std::string::npos) << j;
  const auto csv = read(dir_ / "out" / "sigma.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "x,y,tau,w,sigma,status");
}

TEST_F(Cli, PortraitCounts) {
  const auto r = run("portrait -p cos-saddle -o out");
  EXPECT_EQ(r.code, 0) << r.out;
  const auto svg = read(dir_ / "out" / "portrait.svg");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(read(dir_ / "out" / "portrait.json").find("\"manifolds\": 2"), std::string::npos);
}

TEST_F(Cli, WritesOnlyUnderOutDir) {
  run("rectify -p linear-x --lo=-1,-1 --hi 1,1 -n 17 -o out/nested");
  for (const auto& e : fs::directory_iterator(dir_)) EXPECT_EQ(e.path().filename(), "out");
  EXPECT_TRUE(fs::exists(dir_ / "out" / "nested" / "map.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "nested" / "rectify.json"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "nested" / "config.json"));
}

TEST_F(Cli, ConfigFileRoundTripAndOverride) {
  auto r = run("synthesize -p cubic-degenerate --lo 0.1,0.1 --hi 1,1 -n 9 --print-config");
  ASSERT_EQ(r.code, 0);
  std::ofstream(dir_ / "cfg.json") << r.out;
  const auto again = run("--config cfg.json --print-config");
  EXPECT_EQ(again.out, r.out);
  const auto over = run("--config cfg.json --resolution 11 --print-config");
  EXPECT_NE(over.out.find("\"resolution\": 11"), std::string::npos);
  EXPECT_NE(over.out.find("\"potential\": \"cubic-degenerate\""), std::string::npos);
  std::ofstream(dir_ / "bad.json") << "{\"bogus\": 1}";
  EXPECT_EQ(run("classify --config bad.json").code, 2);
}

TEST_F(Cli, OutputsAreDeterministicAcrossWorkers) {
  const std::string base = "synthesize -p cos-saddle --lo=-2,-2 --hi 2,2 -n 21 --check-div --seed 5";
  ASSERT_EQ(run(base + " -j 1 -o a").code, 0);
  ASSERT_EQ(run(base + " -j 3 -o b").code, 0);
  EXPECT_EQ(read(dir_ / "a" / "sigma.csv"), read(dir_ / "b" / "sigma.csv"));
  EXPECT_EQ(read(dir_ / "a" / "sigma.json"), read(dir_ / "b" / "sigma.json"));
  const std::string rect = "rectify -p wavy-ramp --lo=-1,-1 --hi 1,1 -n 33 --seed 9";
  ASSERT_EQ(run(rect + " -o c").code, 0);
  ASSERT_EQ(run(rect + " -o d").code, 0);
  EXPECT_EQ(read(dir_ / "c" / "map.csv"), read(dir_ / "d" / "map.csv"));
  EXPECT_EQ(read(dir_ / "c" / "rectify.json"), read(dir_ / "d" / "rectify.json"));
}
