#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "mfgan/cli/experiment.hpp"
#include "test_util.hpp"

namespace mfgan::cli {
namespace {

using mfgan::testing::ScratchDir;
using mfgan::testing::slurp;

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run(std::vector<std::string> args, const ScratchDir& dir) {
  args.insert(args.begin(), {"--output-dir", dir.path().string()});
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_experiment(args, out, err);
  return {code, out.str(), err.str()};
}

// Manifest text without the output-dir line, which names the run directory.
std::string manifest_body(const std::filesystem::path& dir) {
  std::istringstream in(slurp(dir / "manifest.ini"));
  std::string body;
  for (std::string l; std::getline(in, l);) {
    if (l.rfind("output-dir=", 0) != 0) body += l + "\n";
  }
  return body;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> v;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

TEST(Cli, GanDemoEqualMasses) {
  ScratchDir dir("cli_gan");
  const RunResult r = run({"gan-demo", "--pr", "0.25,0.75", "--pg", "0.25,0.75"}, dir);
  ASSERT_EQ(r.code, kSuccess) << r.err;
  const auto rows = lines(slurp(dir.path() / "gan_identity.csv"));
  ASSERT_EQ(rows.size(), 2u);
  std::istringstream in(rows[1]);
  std::vector<double> f;
  for (std::string cell; std::getline(in, cell, ',');) f.push_back(std::stod(cell));
  ASSERT_EQ(f.size(), 5u);
  EXPECT_NEAR(f[1], -std::log(4.0), 1e-15);
  EXPECT_EQ(f[2], 0.0);
  EXPECT_LE(f[4], 1e-15);
  EXPECT_EQ(lines(slurp(dir.path() / "gan_demo.csv")).size(), 3u);
  EXPECT_NE(slurp(dir.path() / "manifest.ini").find("gan-demo.pr="), std::string::npos);
}

TEST(Cli, ZeroOuterIterations) {
  ScratchDir dir("cli_zero");
  const RunResult r = run({"mfg-train", "--outer", "0", "--hidden", "4"}, dir);
  ASSERT_EQ(r.code, kSuccess) << r.err;
  EXPECT_EQ(lines(slurp(dir.path() / "mfg_train.csv")).size(), 1u);
  const std::string manifest = slurp(dir.path() / "manifest.ini");
  EXPECT_NE(manifest.find("outer=0"), std::string::npos) << manifest;
  EXPECT_NE(manifest.find("seed"), std::string::npos);
}

TEST(Cli, ConfigErrors) {
  ScratchDir dir("cli_bad");
  EXPECT_EQ(run({"mfg-train", "--no-such-flag", "1"}, dir).code, kConfigError);
  EXPECT_EQ(run({"mfg-train", "--dim", "two"}, dir).code, kConfigError);
  EXPECT_EQ(run({"mfg-train", "--mode", "neither", "--outer", "0"}, dir).code, kConfigError);
  EXPECT_EQ(run({"sde-compare", "--toy", "cubic"}, dir).code, kConfigError);
  EXPECT_EQ(run({"gan-demo", "--pr", "0.5,0.5", "--pg", "1"}, dir).code, kConfigError);
  EXPECT_EQ(run({}, dir).code, kConfigError);
  const RunResult bad = run({"schedule-demo", "--delta", "1.5"}, dir);
  EXPECT_EQ(bad.code, kConfigError);
  EXPECT_NE(bad.err.find("decay"), std::string::npos) << bad.err;
}

TEST(Cli, ConfigFile) {
  ScratchDir dir("cli_ini");
  const auto ini = dir.path() / "run.ini";
  {
    std::ofstream f(ini);
    f << "[gan-demo]\npr = 0.5,0.5\npg = 0.5,0.5\n";
  }
  EXPECT_EQ(run({"--config", ini.string(), "gan-demo"}, dir).code, kSuccess);
  {
    std::ofstream f(ini);
    f << "[gan-demo]\nbogus = 1\n";
  }
  EXPECT_EQ(run({"--config", ini.string(), "gan-demo"}, dir).code, kConfigError);
}

TEST(Cli, ManifestReplaysTheRun) {
  ScratchDir a("cli_manifest_a");
  ScratchDir b("cli_manifest_b");
  ASSERT_EQ(run({"--seed", "3", "sde-compare", "--replicas", "30", "--etas", "0.1", "--modes", "sml"}, a).code,
            kSuccess);
  const RunResult r = run({"--config", (a.path() / "manifest.ini").string(), "sde-compare"}, b);
  ASSERT_EQ(r.code, kSuccess) << r.err;
  EXPECT_EQ(slurp(a.path() / "weak_error.csv"), slurp(b.path() / "weak_error.csv"));
}

TEST(Cli, DivergenceExitsWithNumericalAbort) {
  ScratchDir dir("cli_nan");
  const RunResult r = run({"fdr-probe", "--dt", "10", "--steps", "4000", "--etas", "0.01"}, dir);
  EXPECT_EQ(r.code, kNumericalAbort);
  EXPECT_NE(r.err.find("numerical abort"), std::string::npos) << r.err;
}

TEST(Cli, RerunsAreByteIdentical) {
  const std::vector<std::vector<std::string>> recipes = {
      {"--seed", "7", "mfg-train", "--outer", "5", "--hidden", "6", "--batch-d", "8", "--batch-g", "8",
       "--eval-points", "16", "--normalization-points", "32"},
      {"--seed", "7", "sde-compare", "--toy", "linear", "--replicas", "20", "--etas", "0.1,0.05", "--substeps",
       "5"},
      {"--seed", "7", "fdr-probe", "--steps", "4000", "--etas", "0.02"},
      {"--seed", "7", "schedule-demo", "--stream", "sml", "--steps", "200"},
  };
  const std::vector<std::string> files = {"mfg_train.csv", "weak_error.csv", "fdr.csv", "schedule.csv"};
  for (std::size_t k = 0; k < recipes.size(); ++k) {
    ScratchDir a("cli_rerun_a");
    ScratchDir b("cli_rerun_b");
    ASSERT_EQ(run(recipes[k], a).code, kSuccess) << files[k];
    ASSERT_EQ(run(recipes[k], b).code, kSuccess) << files[k];
    const std::string first = slurp(a.path() / files[k]);
    EXPECT_GT(lines(first).size(), 1u) << files[k];
    EXPECT_EQ(first, slurp(b.path() / files[k])) << files[k];
    EXPECT_EQ(manifest_body(a.path()), manifest_body(b.path()));
  }
}

}  // namespace
}  // namespace mfgan::cli
