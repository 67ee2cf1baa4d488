#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const char* kTorsion = R"(
[domain]
kind = "interval"
params = [1.0]

[problem]
p = 2.5
s = 0.5
load = 1.0

[grid]
h = 0.0078125

[solver]
tol = 1e-10
)";

class Cli : public ::testing::Test {
 protected:
  fs::path dir;

  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir = fs::temp_directory_path() / (std::string("fracreg_cli_") + info->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  fs::path write_config(const std::string& name, const std::string& text) const {
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p;
  }

  int run(const std::string& cmd, const fs::path& cfg, const fs::path& out, const std::string& extra = "") const {
    const std::string line = std::string(FRACREG_CLI_PATH) + " " + cmd + " --config " + cfg.string() + " --out " +
                             out.string() + " " + extra + " > " + (dir / "log.txt").string() + " 2>&1";
    const int st = std::system(line.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_F(Cli, TorsionWritesOutputs) {
  const auto cfg = write_config("t.toml", kTorsion);
  ASSERT_EQ(run("torsion", cfg, dir / "a"), 0) << slurp(dir / "log.txt");
  for (const char* f : {"solution.csv", "residuals.csv", "summary.json"}) EXPECT_TRUE(fs::exists(dir / "a" / f)) << f;
  const auto j = nlohmann::json::parse(slurp(dir / "a" / "summary.json"));
  const std::string hash = j["config_hash"];
  EXPECT_FALSE(hash.empty());
  EXPECT_FALSE(std::string(j["version"]).empty());
  const std::string csv = slurp(dir / "a" / "solution.csv");
  EXPECT_NE(csv.find(hash), std::string::npos);
  EXPECT_EQ(csv.front(), '#');
}

TEST_F(Cli, BitIdenticalReruns) {
  const auto cfg = write_config("t.toml", kTorsion);
  ASSERT_EQ(run("torsion", cfg, dir / "a"), 0);
  ASSERT_EQ(run("torsion", cfg, dir / "b"), 0);
  for (const char* f : {"solution.csv", "residuals.csv", "summary.json"})
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
}

TEST_F(Cli, DiagnoseWritesReport) {
  const auto cfg = write_config("t.toml", kTorsion);
  ASSERT_EQ(run("diagnose", cfg, dir / "a"), 0) << slurp(dir / "log.txt");
  for (const char* f : {"diagnostics.json", "oscillation.svg", "oscillation.csv"})
    EXPECT_TRUE(fs::exists(dir / "a" / f)) << f;
  const auto j = nlohmann::json::parse(slurp(dir / "a" / "diagnostics.json"));
  EXPECT_TRUE(j.contains("checks"));
  EXPECT_TRUE(j.contains("anchors"));
  EXPECT_NE(slurp(dir / "a" / "oscillation.svg").find("<svg"), std::string::npos);
}

TEST_F(Cli, SeedAndRefineChangeTheHash) {
  const auto cfg = write_config("t.toml", kTorsion);
  ASSERT_EQ(run("torsion", cfg, dir / "a"), 0);
  ASSERT_EQ(run("torsion", cfg, dir / "b", "--refine 1"), 0);
  ASSERT_EQ(run("torsion", cfg, dir / "c", "--seed 12"), 0);
  auto hash = [&](const char* d) {
    return std::string(nlohmann::json::parse(slurp(dir / d / "summary.json"))["config_hash"]);
  };
  EXPECT_NE(hash("a"), hash("b"));
  EXPECT_NE(hash("a"), hash("c"));
}

TEST_F(Cli, ConfigErrors) {
  EXPECT_EQ(run("torsion", write_config("bad.toml", "[domain\nkind ="), dir / "a"), 3);
  EXPECT_EQ(run("torsion", write_config("unk.toml", std::string(kTorsion) + "\n[extra]\nfoo = 1\n"), dir / "a"), 3);
  const std::string bad_params = R"(
[domain]
kind = "ellipse"
dim = 2
params = [1.0]
)";
  EXPECT_EQ(run("torsion", write_config("p.toml", bad_params), dir / "a"), 3);
  const std::string bad_p = R"(
[problem]
p = 1.5
)";
  EXPECT_EQ(run("torsion", write_config("pp.toml", bad_p), dir / "a"), 3);
  EXPECT_EQ(run("torsion", dir / "missing.toml", dir / "a"), 3);
  EXPECT_EQ(run("frobnicate", write_config("t.toml", kTorsion), dir / "a"), 3);
}

TEST_F(Cli, Nonconvergence) {
  const std::string text = std::string(kTorsion) + "max_iter = 1\n";
  EXPECT_EQ(run("torsion", write_config("t.toml", text), dir / "a"), 2);
}

TEST_F(Cli, VerifyFailsUnderImpossibleTolerance) {
  const std::string ok = "[verify]\ncriteria = [11]\n";
  EXPECT_EQ(run("verify", write_config("ok.toml", ok), dir / "a"), 0) << slurp(dir / "log.txt");
  EXPECT_TRUE(fs::exists(dir / "a" / "verify.json"));
  const std::string strict = "[verify]\ncriteria = [2]\ntolerance_scale = 1e-30\n";
  EXPECT_EQ(run("verify", write_config("v.toml", strict), dir / "b"), 1);
}
