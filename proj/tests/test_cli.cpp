#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("chaosqfi_cli_" + name);
  fs::remove_all(p);
  return p;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(CHAOSQFI_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

nlohmann::json manifest(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "manifest.json")); }

}  // namespace

TEST(Cli, BadArguments) {
  EXPECT_EQ(cli(""), 2);
  EXPECT_EQ(cli("no-such-command"), 2);
  EXPECT_EQ(cli("levels --model nope --out " + scratch("bad1").string()), 2);
  EXPECT_EQ(cli("levels --n abc --out " + scratch("bad2").string()), 2);
  EXPECT_EQ(cli("qfi-evolve --model coe --n 4 --steps 0 --out " + scratch("bad3").string()), 2);
  EXPECT_EQ(cli("qfi-evolve --model coe --n 4 --param bogus=1 --out " + scratch("bad4").string()), 2);
  EXPECT_EQ(cli("levels --model cse --n 40 --out " + scratch("bad5").string()), 2);
  EXPECT_EQ(cli("levels --config /nonexistent.json --out " + scratch("bad6").string()), 2);
}

TEST(Cli, HelpAndVersionSucceed) {
  EXPECT_EQ(cli("--help"), 0);
  EXPECT_EQ(cli("--version"), 0);
  EXPECT_EQ(cli("wigner --help"), 0);
}

TEST(Cli, CapacityExceeded) {
  const auto dir = scratch("cap");
  EXPECT_EQ(cli("qfi-evolve --model ising --n 20 --out " + dir.string()), 3);
  EXPECT_EQ(cli("wigner --model coe --n 300 --out " + scratch("cap2").string()), 3);
}

TEST(Cli, ManifestWrittenAndRerunIsBitIdentical) {
  const auto a = scratch("rerun_a"), b = scratch("rerun_b");
  ASSERT_EQ(cli("random-qfi --model cue --n 10 --samples 500 --seed 7 --threads 2 --out " + a.string()), 0);
  const auto m = manifest(a);
  EXPECT_EQ(m["command"], "random-qfi");
  EXPECT_EQ(m["status"], "ok");
  EXPECT_EQ(m["settings"]["k"], 11);
  EXPECT_EQ(m["settings"]["seed"], 7);
  ASSERT_EQ(cli("random-qfi --config " + (a / "manifest.json").string() + " --threads 1 --out " + b.string()), 0);
  for (const auto& f : m["outputs"]) {
    const std::string name = fs::path(f.get<std::string>()).filename().string();
    if (name.ends_with(".csv")) EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
  }
}

TEST(Cli, EvolveRerunFromManifest) {
  const auto a = scratch("evolve_a"), b = scratch("evolve_b");
  ASSERT_EQ(cli("qfi-evolve --model coe --n 8 --t-start 20 --steps 60 --out " + a.string()), 0);
  EXPECT_TRUE(fs::exists(a / "qfi_trace.csv"));
  EXPECT_TRUE(fs::exists(a / "qfi_trace.svg"));
  ASSERT_EQ(cli("qfi-evolve --config " + (a / "manifest.json").string() + " --out " + b.string()), 0);
  EXPECT_EQ(slurp(a / "qfi_trace.csv"), slurp(b / "qfi_trace.csv"));
  EXPECT_EQ(slurp(a / "qfi_summary.csv"), slurp(b / "qfi_summary.csv"));
}

TEST(Cli, Precedence) {
  const auto cfg_dir = scratch("prec_cfg");
  fs::create_directories(cfg_dir);
  const auto cfg = cfg_dir / "config.json";
  std::ofstream(cfg) << R"({"model": "cue", "n": 6, "seed": 3, "params": {"lambda": 4.0}})";
  const auto a = scratch("prec_a");
  ASSERT_EQ(cli("krylov-dim --config " + cfg.string() + " --n 5 --param p=1.2 --out " + a.string()), 0);
  const auto m = manifest(a);
  EXPECT_EQ(m["settings"]["model"], "cue");   // config over default
  EXPECT_EQ(m["settings"]["n"], 5);           // CLI over config
  EXPECT_EQ(m["settings"]["seed"], 3);
  EXPECT_EQ(m["settings"]["params"]["lambda"], 4.0);
  EXPECT_EQ(m["settings"]["params"]["p"], 1.2);
  EXPECT_TRUE(m["settings"]["params"].contains("lambda_prime"));  // default kept
}

TEST(Cli, UnknownConfigKeyRejected) {
  const auto dir = scratch("unknown_cfg");
  fs::create_directories(dir);
  std::ofstream(dir / "c.json") << R"({"wibble": 1})";
  EXPECT_EQ(cli("levels --config " + (dir / "c.json").string() + " --out " + (dir / "o").string()), 2);
}

TEST(Cli, ManifestOfOtherCommandRejected) {
  const auto a = scratch("other_a");
  ASSERT_EQ(cli("krylov-dim --model coe --n 6 --out " + a.string()), 0);
  EXPECT_EQ(cli("levels --config " + (a / "manifest.json").string() + " --out " + scratch("other_b").string()), 2);
}

TEST(Cli, LevelsOutputs) {
  const auto a = scratch("levels");
  ASSERT_EQ(cli("levels --model coe --n 400 --out " + a.string()), 0);
  for (const char* f : {"levels_histogram.csv", "levels_spacings.csv", "levels_ks.csv", "levels_histogram.svg"})
    EXPECT_TRUE(fs::exists(a / f)) << f;
  EXPECT_EQ(slurp(a / "levels_histogram.csv").rfind("bin_left,bin_right,density,surmise_value", 0), 0u);
}

TEST(Cli, WignerOutputs) {
  const auto a = scratch("wigner");
  ASSERT_EQ(cli("wigner --model coe --n 10 --times 0,3 --n-theta 64 --n-phi 64 --out " + a.string()), 0);
  EXPECT_TRUE(fs::exists(a / "wigner_widths.csv"));
  EXPECT_EQ(manifest(a)["status"], "ok");
}
