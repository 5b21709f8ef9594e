#include "mobilevel/cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace mobilevel;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(MOBILEVEL_SOURCE_DIR) / "configs";

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / "mobilevel-cli-test" / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

cli::RunResult run_config(const std::string& command, const std::string& config, const fs::path& out,
                          nlohmann::json overrides = nlohmann::json::object()) {
  return cli::run(cli::make_config(command, (kConfigs / config).string(), overrides, out.string()));
}

}  // namespace

TEST(Cli, OutputDirPrecedence) {
  nlohmann::json cfg{{"output_dir", "from-config"}};
  unsetenv("MOBILEVEL_OUTPUT_DIR");
  EXPECT_EQ(cli::resolve_output_dir(cfg, "solve", "", "/base"), fs::path("/base/from-config"));
  EXPECT_EQ(cli::resolve_output_dir(nlohmann::json::object(), "solve", "", "/base"), fs::path("mobilevel-out/solve"));
  setenv("MOBILEVEL_OUTPUT_DIR", "/env-dir", 1);
  EXPECT_EQ(cli::resolve_output_dir(cfg, "solve", "", "/base"), fs::path("/env-dir"));
  EXPECT_EQ(cli::resolve_output_dir(cfg, "solve", "/flag", "/base"), fs::path("/flag"));
  unsetenv("MOBILEVEL_OUTPUT_DIR");
}

TEST(Cli, RejectsBadConfigs) {
  EXPECT_THROW(cli::make_config("nonsense", "", {}, "/tmp/x"), InvalidInput);
  EXPECT_THROW(cli::make_config("solve", (kConfigs / "frontier-sine-ramp.json").string(), {}, "/tmp/x"), InvalidInput);
  EXPECT_THROW(cli::make_config("solve", "/nonexistent/config.json", {}, "/tmp/x"), InvalidInput);
  auto rc = cli::make_config("frontier", "", {{"problem", "no-such-problem"}}, scratch("bad").string());
  EXPECT_THROW(cli::run(rc), InvalidInput);
  auto rc2 = cli::make_config("coderivative-check", "", {{"problem", "wedge-polytope"}}, scratch("bad2").string());
  EXPECT_THROW(cli::run(rc2), InvalidInput);
  auto rc3 = cli::make_config("frontier", "", {{"problem", "sine-ramp"}, {"xs", {{0, 1}}}}, scratch("bad3").string());
  EXPECT_THROW(cli::run(rc3), InvalidInput);
}

TEST(Cli, NullOverridesKeepTheConfig) {
  auto rc = cli::make_config("solve", (kConfigs / "solve-convex-pair.json").string(), nullptr, "/tmp/x");
  EXPECT_EQ(rc.data.at("problem"), "convex-pair");
  EXPECT_THROW(cli::make_config("solve", "", nlohmann::json::array(), "/tmp/x"), InvalidInput);
}

TEST(Cli, AtomicWriteLeavesNoTemporary) {
  auto dir = scratch("atomic");
  cli::write_atomic(dir / "a.txt", "one");
  cli::write_atomic(dir / "a.txt", "two");
  EXPECT_EQ(slurp(dir / "a.txt"), "two");
  EXPECT_FALSE(fs::exists(dir / "a.txt.tmp"));
}

TEST(Cli, WedgeRefutedAsExpected) {
  auto out = scratch("wedge");
  auto r = run_config("coderivative-check", "coderivative-wedge.json", out);
  EXPECT_EQ(r.status, cli::kOk);
  EXPECT_EQ(r.summary, "refuted as expected");
  auto rep = nlohmann::json::parse(slurp(out / "report.json"));
  EXPECT_EQ(rep["checks"][0]["status"], "refuted as expected");
  // Demanding that the estimate holds turns the refutation into a failed check.
  auto r2 = run_config("coderivative-check", "coderivative-wedge.json", scratch("wedge2"), {{"expect", "holds"}});
  EXPECT_EQ(r2.status, cli::kCheckFailed);
}

TEST(Cli, BilinearEstimates) {
  auto r = run_config("coderivative-check", "coderivative-bilinear.json", scratch("bilinear"));
  EXPECT_EQ(r.status, cli::kOk);
  ASSERT_EQ(r.report["checks"].size(), 2u);
  EXPECT_FALSE(r.report["checks"][0]["holds"].get<bool>());
  EXPECT_EQ(r.report["checks"][0]["status"], "fails outside the strict dual cone");
  EXPECT_TRUE(r.report["checks"][1]["equality"].get<bool>());
}

TEST(Cli, RandomStrictWeightsAreDeterministic) {
  nlohmann::json o{{"problem", "bilinear-segment"}, {"estimate", "solution_chain"}, {"random_strict_weights", 5}, {"seed", 3}};
  auto a = cli::run(cli::make_config("coderivative-check", "", o, scratch("rw-a").string()));
  auto b = cli::run(cli::make_config("coderivative-check", "", o, scratch("rw-b").string()));
  EXPECT_EQ(a.report.dump(), b.report.dump());
  ASSERT_EQ(a.report["checks"].size(), 5u);
  for (const auto& c : a.report["checks"]) EXPECT_TRUE(c.at("z_star_in_strict_dual").get<bool>());
}

TEST(Cli, NormalConeMatchesGolden) {
  auto r = run_config("normal-cone", "normal-cone-wedge.json", scratch("cones"), {{"oracle_samples", 2000}});
  EXPECT_EQ(r.status, cli::kOk);
  EXPECT_TRUE(r.report["cones"]["sigma"]["golden_match"].get<bool>());
  EXPECT_TRUE(r.report["cones"]["phi"]["golden_match"].get<bool>());
  EXPECT_EQ(r.report["cones"]["phi"]["oracle"]["outside"], 0);
}

TEST(Cli, NormalConeGoldenMismatchFails) {
  auto out = scratch("mismatch");
  auto golden = cli::read_json_file(kConfigs / "golden" / "wedge-polytope.json");
  golden["cones"]["sigma"] = golden["cones"]["phi"];
  cli::write_atomic(out / "golden.json", golden.dump());
  auto r = run_config("normal-cone", "normal-cone-wedge.json", out / "run",
                      {{"golden", (out / "golden.json").string()}, {"oracle_samples", 0}});
  EXPECT_EQ(r.status, cli::kCheckFailed);
}

TEST(Cli, FrontierAndDiagnose) {
  auto out = scratch("frontier");
  auto f = run_config("frontier", "frontier-sine-ramp.json", out);
  EXPECT_EQ(f.status, cli::kOk);
  EXPECT_TRUE(fs::exists(out / "frontier.csv"));
  auto d = run_config("diagnose-closedness", "diagnose-sine-ramp.json", scratch("diagnose"));
  EXPECT_EQ(d.status, cli::kOk);
  EXPECT_EQ(d.report["missing_limit_points"], 1);
}

TEST(Cli, ScalarizeCompareConvex) {
  auto r = run_config("scalarize-compare", "scalarize-bilinear.json", scratch("scal"));
  EXPECT_EQ(r.status, cli::kOk);
  for (const auto& c : r.report["comparisons"]) EXPECT_TRUE(c["within_one_step"].get<bool>());
}

TEST(Cli, InlineProblemFile) {
  auto r = run_config("solve", "solve-quadratic-tradeoff.json", scratch("inline"));
  EXPECT_EQ(r.status, cli::kOk);
  for (const auto& c : r.report["comparison"]["concepts"]) {
    ASSERT_EQ(c["efficient"].size(), 1u);
    EXPECT_NEAR(c["efficient"][0]["x"][0].get<double>(), 0.5, 1e-12);
    EXPECT_NEAR(c["efficient"][0]["y"][0].get<double>(), 0.4, 1e-12);
  }
  // Inline specs carry no local models.
  auto rc = cli::make_config("normal-cone", "", {{"problem", {{"file", (kConfigs / "problems" / "quadratic-tradeoff.json").string()}}}},
                             scratch("inline-nc").string());
  EXPECT_THROW(cli::run(rc), InvalidInput);
}

TEST(Cli, SolveReportsAreByteIdentical) {
  auto a = scratch("solve-a"), b = scratch("solve-b");
  run_config("solve", "solve-convex-pair.json", a);
  run_config("solve", "solve-convex-pair.json", b);
  for (const char* f : {"report.json", "pairs-weff.csv"}) {
    ASSERT_TRUE(fs::exists(a / f));
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}
