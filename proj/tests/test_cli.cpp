#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "gcreg/cli.hpp"
#include "gcreg/metrics.hpp"
#include "golden.hpp"

using namespace gcreg;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "gcreg");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path out_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "gcreg_cli_test" / name;
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST(Cli, MissingTemplateIsUsageError) {
  const CliRun r = run({"--model", "gc", "--out", out_dir("missing").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--template"), std::string::npos);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
}

TEST(Cli, BadArguments) {
  EXPECT_EQ(run({"--model", "xyz", "--fixture", "gaussian_shift", "--out", out_dir("bad1").string()}).code, 2);
  EXPECT_EQ(run({"--model", "gc", "--fixture", "nope", "--out", out_dir("bad2").string()}).code, 2);
  EXPECT_EQ(run({"--model", "gc", "--fixture", "gaussian_shift", "--size", "16", "--out", out_dir("bad3").string()}).code, 2);
  EXPECT_EQ(run({"--model", "gc", "--fixture", "gaussian_shift", "--omega", "2.5", "--out", out_dir("bad4").string()}).code, 2);
  EXPECT_EQ(run({"--model", "gc", "--bogus"}).code, 2);
  EXPECT_EQ(run({"--model", "gc", "--template", "/nonexistent.pgm", "--reference", "/nonexistent.pgm", "--out",
                 out_dir("bad5").string()}).code,
            2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, GcFixtureRunWithExplicitSettings) {
  const fs::path dir = out_dir("gc");
  const CliRun r = run({"--model", "gc", "--fixture", "gaussian_shift", "--size", "64", "--gamma", "0.0001", "--tol",
                     "0.001", "--max-iter", "30", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"deformed.pgm", "diff_before.pgm", "diff_after.pgm", "grid.pgm", "report.json"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  const nlohmann::json j = nlohmann::json::parse(golden::slurp(dir / "report.json"));
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["model"], "gc");
  EXPECT_EQ(j["gamma"].get<double>(), 1e-4);
  EXPECT_EQ(j["config"]["tol"].get<double>(), 1e-3);
  EXPECT_EQ(j["config"]["max_iter"].get<int>(), 30);
  EXPECT_EQ(j["config"]["omega"].get<double>(), 0.9725);
  EXPECT_LE(j["epsilon"].get<double>(), 0.1);
  EXPECT_NE(r.out.find("\"gamma\":0.0001"), std::string::npos);

  // Single source of truth: the report carries the metrics module's numbers.
  const Fixture fx = make_fixture(FixtureKind::gaussian_shift, 64);
  const RegistrationResult direct = register_gc(fx.template_image, fx.reference, {});
  const QualityReport q = quality(fx.template_image, fx.reference, direct.u);
  EXPECT_EQ(j["epsilon"].get<double>(), q.epsilon);
  EXPECT_EQ(j["min_jac"].get<double>(), q.min_jac);
  EXPECT_EQ(j["iterations"].get<int>(), direct.iterations);
}

TEST(Cli, CsvReportAndImageInputs) {
  const fs::path src = out_dir("src");
  fs::create_directories(src);
  const Fixture fx = make_fixture(FixtureKind::square_rotate, 40);
  save_pgm(src / "t.pgm", fx.template_image);
  save_pgm(src / "r.pgm", fx.reference);
  const fs::path dir = out_dir("csv");
  const CliRun r = run({"--model", "demon", "--template", (src / "t.pgm").string(), "--reference",
                     (src / "r.pgm").string(), "--report", "csv", "--max-iter", "20", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = golden::slurp(dir / "report.csv");
  EXPECT_EQ(csv.rfind("model,gamma,r,time_s,epsilon,min_jac,iterations", 0), 0u);
  EXPECT_NE(csv.find("\ndemon,,,"), std::string::npos);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const fs::path dir = out_dir("cfg");
  fs::create_directories(dir);
  std::ofstream(dir / "run.json") << R"({"model": "gc", "fixture": "smooth_warp", "size": 40, "max_iter": 3, "r": 0.05})";
  const CliRun r = run({"--config", (dir / "run.json").string(), "--max-iter", "2", "--out", (dir / "o").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const nlohmann::json j = nlohmann::json::parse(golden::slurp(dir / "o" / "report.json"));
  EXPECT_EQ(j["config"]["max_iter"].get<int>(), 2);
  EXPECT_EQ(j["r"].get<double>(), 0.05);
  EXPECT_EQ(j["config"]["input"]["fixture"], "smooth_warp");
}

TEST(Cli, SolverAbortExitCode) {
  const fs::path dir = out_dir("abort");
  const CliRun r = run({"--model", "gc", "--fixture", "gaussian_shift", "--r", "1e-7", "--out", dir.string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("SingularBlock"), std::string::npos);
}

TEST(Golden, FixtureReportsAndRenders) {
  for (const golden::Case& c : golden::cases()) {
    const fs::path dir = out_dir("golden_" + c.name);
    ASSERT_EQ(golden::run_case(c, dir), 0) << c.name;
    const golden::Comparison cmp = golden::check_case(c, dir);
    EXPECT_TRUE(cmp.ok) << cmp.detail;
  }
  const golden::Comparison fold = golden::check_fold_render();
  EXPECT_TRUE(fold.ok) << fold.detail;
}

TEST(Golden, RepeatedRunsBitIdentical) {
  const golden::Case& c = golden::cases().front();
  const fs::path a = out_dir("rep_a"), b = out_dir("rep_b");
  ASSERT_EQ(golden::run_case(c, a), 0);
  ASSERT_EQ(golden::run_case(c, b), 0);
  EXPECT_EQ(golden::stable_report(a / "report.json"), golden::stable_report(b / "report.json"));
  for (const char* f : {"deformed.pgm", "diff_after.pgm", "grid.pgm"}) EXPECT_EQ(golden::slurp(a / f), golden::slurp(b / f)) << f;
}
