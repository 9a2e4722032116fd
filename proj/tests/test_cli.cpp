#include "berglab/cli.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace berglab;
namespace fs = std::filesystem;

namespace {

ParseResult parse(std::vector<std::string> args) {
    args.insert(args.begin(), "berg_lab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return parse_config(static_cast<int>(argv.size()), argv.data());
}

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("berglab_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string read(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

bool all_numbers_finite(const Json& j) {
    if (j.is_number_float()) return std::isfinite(j.get<double>());
    if (j.is_structured())
        for (const auto& v : j)
            if (!all_numbers_finite(v)) return false;
    return true;
}

} // namespace

TEST(ParseConfig, MissingFileNamesThePath) {
    const auto r = parse({"berg", "--config", "/nonexistent/berg.toml"});
    EXPECT_FALSE(r.config);
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_NE(r.message.find("/nonexistent/berg.toml"), std::string::npos);
}

TEST(ParseConfig, LambdaBelowOneIsRejected) {
    const auto r = parse({"berg", "--lambda0", "0.5"});
    EXPECT_FALSE(r.config);
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_NE(r.message.find("lambda0 > 1"), std::string::npos);
    EXPECT_NE(r.message.find("0.5"), std::string::npos);
}

TEST(ParseConfig, FieldNamedInRangeErrors) {
    auto r = parse({"perturb", "--eps-grid", "0.02", "0.3"});
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_NE(r.message.find("eps_grid[1]"), std::string::npos);
    r = parse({"converge", "--case", "bogus"});
    EXPECT_EQ(r.exit_code, 2);
    r = parse({"berg", "--r1", "abc"});
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_NE(r.message.find("r1"), std::string::npos);
    r = parse({});
    EXPECT_EQ(r.exit_code, 2);
}

TEST(ParseConfig, MinimalFileFillsDefaultsAndFlagsOverride) {
    const fs::path dir = scratch_dir("config");
    {
        std::ofstream os(dir / "run.toml");
        os << "r1 = 1.5\nr2 = 0.75\nn_base = 3\n";
    }
    auto r = parse({"berg", "--config", (dir / "run.toml").string()});
    ASSERT_TRUE(r.config) << r.message;
    EXPECT_EQ(r.config->command, Command::Berg);
    EXPECT_DOUBLE_EQ(r.config->r1, 1.5);
    EXPECT_DOUBLE_EQ(r.config->r2, 0.75);
    EXPECT_DOUBLE_EQ(r.config->lambda0, 2.0);
    EXPECT_DOUBLE_EQ(r.config->a, 1.0);
    EXPECT_DOUBLE_EQ(r.config->b, 1.0);
    EXPECT_EQ(r.config->mesh.n_base, 3);
    EXPECT_EQ(r.config->mesh.levels, 1);

    r = parse({"berg", "--config", (dir / "run.toml").string(), "--r1", "2"});
    ASSERT_TRUE(r.config);
    EXPECT_DOUBLE_EQ(r.config->r1, 2.0);
    EXPECT_DOUBLE_EQ(r.config->r2, 0.75);
}

TEST(ParseConfig, HelpExitsZero) {
    const auto r = parse({"--help"});
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_NE(r.message.find("--lambda0"), std::string::npos);
}

TEST(RunConfig, HashIgnoresOutputLocation) {
    RunConfig a, b;
    b.output_dir = "elsewhere";
    b.assert_mode = true;
    EXPECT_EQ(a.hash(), b.hash());
    b.r2 = 2;
    EXPECT_NE(a.hash(), b.hash());
    EXPECT_EQ(a.hash().size(), 16u);
}

TEST(Run, BergOnSquareFrameHolds) {
    const fs::path dir = scratch_dir("berg");
    RunConfig c;
    c.command = Command::Berg;
    c.mesh.levels = 0;
    c.output_dir = dir.string();
    const RunOutcome out = run(c);
    ASSERT_EQ(out.exit_code, 0);
    ASSERT_TRUE(fs::exists(out.report_path));
    const Json rep = Json::parse(read(out.report_path));
    EXPECT_EQ(rep["schema_version"], kReportSchemaVersion);
    EXPECT_EQ(rep["command"], "berg");
    EXPECT_TRUE(rep["results"]["holds"].get<bool>());
    EXPECT_TRUE(all_numbers_finite(rep));
    // Round trip through the parser is lossless.
    EXPECT_EQ(dump_report(Json::parse(dump_report(rep))), read(out.report_path));
    const fs::path run_dir = fs::path(out.report_path).parent_path();
    EXPECT_EQ(run_dir.filename().string(), "berg-" + c.hash());
    for (const char* f : {"berg_profile.csv", "berg_profile.svg", "trace_gamma1.csv", "trace_gamma4.csv"})
        EXPECT_TRUE(fs::exists(run_dir / f)) << f;

    // Identical config, identical bytes.
    const std::string first = read(out.report_path);
    const RunOutcome again = run(c);
    EXPECT_EQ(read(again.report_path), first);
}

TEST(Run, EnvironmentOverridesOutputDir) {
    const fs::path dir = scratch_dir("env");
    RunConfig c;
    c.command = Command::Solve;
    c.mesh.levels = 0;
    c.output_dir = (dir / "ignored").string();
    setenv("BERG_LAB_OUT", (dir / "chosen").string().c_str(), 1);
    const RunOutcome out = run(c);
    unsetenv("BERG_LAB_OUT");
    ASSERT_EQ(out.exit_code, 0);
    EXPECT_EQ(fs::path(out.report_path).parent_path().parent_path(), dir / "chosen");
    EXPECT_FALSE(fs::exists(dir / "ignored"));
}

TEST(Run, SolverFailureLeavesNoArtifacts) {
    const fs::path dir = scratch_dir("fail");
    RunConfig c;
    c.command = Command::Solve;
    c.mesh.levels = 0;
    c.max_iter = 2;
    c.output_dir = dir.string();
    const RunOutcome out = run(c);
    EXPECT_EQ(out.exit_code, 1);
    EXPECT_TRUE(out.report_path.empty());
    EXPECT_TRUE(fs::is_empty(dir));
}

TEST(Run, AssertModeExitCodes) {
    const fs::path dir = scratch_dir("assert");
    RunConfig c;
    c.command = Command::Dual;
    c.r2 = 2;
    c.mesh.levels = 0;
    c.output_dir = dir.string();
    c.assert_mode = true;
    RunOutcome out = run(c);
    EXPECT_EQ(out.exit_code, out.report["all_assertions_passed"].get<bool>() ? 0 : 3);
    EXPECT_EQ(out.report["results"]["structure"]["level_set"]["classification"], "A3");

    // The scaled widening makes the pairing positive, so this assertion set cannot pass.
    c.command = Command::Perturb;
    c.r2 = 1;
    c.eps_grid = {0.04, 0.08, 0.12};
    out = run(c);
    EXPECT_EQ(out.exit_code, 3);
    c.assert_mode = false;
    EXPECT_EQ(run(c).exit_code, 0);
}

TEST(Report, JsonHelpers) {
    EXPECT_TRUE(finite_or_null(NAN).is_null());
    EXPECT_EQ(finite_or_null(1.5).get<double>(), 1.5);
    EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(hex16(255), "00000000000000ff");
    std::ostringstream svg;
    write_line_plot_svg({{"s", {0, 1, 2}, {1, 0, 2}}}, "t", "x", "y", svg);
    EXPECT_NE(svg.str().find("<polyline"), std::string::npos);
}
