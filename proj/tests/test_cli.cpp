#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "gapest/config.hpp"
#include "gapest/pipeline.hpp"
#include "gapest/report.hpp"

using namespace gapest;
namespace fs = std::filesystem;

namespace {

const std::string kConfigDir = GAPEST_CONFIG_DIR;
const std::string kExe = GAPEST_EXE;

const char* kMinimal = R"([problem]
variant = halfline
a = "1"
V = "-r"
)";

struct Run {
    int status;
    std::string out;
};

Run run_cli(const std::string& args) {
    const std::string cmd = "'" + kExe + "' " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {-1, {}};
    std::string out;
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
    const int raw = pclose(pipe);
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("gapest_test_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_file(const fs::path& path, const std::string& text) {
    std::ofstream(path) << text;
    return path;
}

const BoundResult* find_bound(const Report& r, const std::string& method) {
    for (const auto& b : r.bounds)
        if (b.method == method) return &b;
    return nullptr;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

}  // namespace

TEST(Config, MinimalDefaults) {
    const auto cfg = parse_config(kMinimal);
    EXPECT_EQ(cfg.variant, Variant::HalfLine);
    EXPECT_EQ(cfg.problem.r_max, 60.0);
    EXPECT_EQ(cfg.quadrature.rel_tol, 1e-9);
    EXPECT_TRUE(cfg.methods.empty());
    EXPECT_EQ(cfg.test_family.kind, TestFamily::Kind::Exponential);
    EXPECT_EQ(cfg.oracle.n, 4000);
    EXPECT_EQ(cfg.format, "text");
}

TEST(Config, ParseErrorCarriesLine) {
    try {
        parse_config("[problem]\nvariant = halfline\na = \"1\"\nV = \"exp(\"\n");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 4);
        EXPECT_EQ(e.field(), "V");
    }
}

TEST(Config, UnknownKeysAndSectionsRejected) {
    EXPECT_THROW(parse_config(std::string(kMinimal) + "colour = \"red\"\n"), ConfigError);
    EXPECT_THROW(parse_config(std::string(kMinimal) + "[extras]\n"), ConfigError);
    EXPECT_THROW(parse_config(std::string(kMinimal) + "[bounds]\nmethods = thm99\n"), ConfigError);
}

TEST(Config, DigestIgnoresCommentsWhitespaceAndOutput) {
    const auto base = parse_config(kMinimal).digest();
    EXPECT_EQ(base.size(), 16u);
    EXPECT_EQ(parse_config(std::string("# note\n") + kMinimal + "\n\n").digest(), base);
    EXPECT_EQ(parse_config("[problem]\n  variant=halfline\na   =  \"1\"\nV = \"-r\"   # drift\n").digest(), base);
    EXPECT_EQ(parse_config(std::string(kMinimal) + "[output]\nformat = csv\n").digest(), base);
    EXPECT_NE(parse_config("[problem]\nvariant = halfline\na = \"1\"\nV = \"-2*r\"\n").digest(), base);
    EXPECT_NE(parse_config(std::string(kMinimal) + "[oracle]\nn = 5000\n").digest(), base);
}

TEST(Pipeline, MethodSelectionLimitsTheRun) {
    const auto cfg = parse_config(std::string(kMinimal) + "[bounds]\nmethods = thm12, eq17\n");
    const auto rep = run_pipeline(cfg, Mode::Bounds);
    ASSERT_EQ(rep.bounds.size(), 2u);
    EXPECT_NE(find_bound(rep, "thm12"), nullptr);
    EXPECT_NE(find_bound(rep, "eq17"), nullptr);
    EXPECT_TRUE(rep.criteria.empty());
    EXPECT_FALSE(rep.oracle.computed);
}

TEST(Pipeline, ConstantDrift) {
    const auto rep = run_pipeline(load_config(kConfigDir + "/c_drift.conf"));
    const auto* thm12 = find_bound(rep, "thm12");
    const auto* eq17 = find_bound(rep, "eq17");
    ASSERT_NE(thm12, nullptr);
    ASSERT_NE(eq17, nullptr);
    EXPECT_NEAR(thm12->value, 1.0, 1e-5);
    EXPECT_NEAR(eq17->value, 1.0, 5e-3);
    ASSERT_TRUE(rep.oracle.computed);
    EXPECT_NEAR(rep.oracle.lambda1, 1.0, 0.03);
    EXPECT_EQ(rep.verdict.outcome, Outcome::GapExists);
    EXPECT_FALSE(rep.checks.empty());
    EXPECT_TRUE(rep.all_checks_passed());
}

TEST(Pipeline, GrowingDiffusion) {
    const auto rep = run_pipeline(load_config(kConfigDir + "/growing_diffusion.conf"), Mode::Bounds);
    const auto* thm31 = find_bound(rep, "thm31");
    const auto* thm32 = find_bound(rep, "thm32");
    ASSERT_NE(thm31, nullptr);
    ASSERT_NE(thm32, nullptr);
    EXPECT_GT(thm31->value, 0.0);
    EXPECT_TRUE(std::isinf(thm32->value));
    EXPECT_EQ(rep.verdict.outcome, Outcome::GapExists);
}

TEST(Pipeline, DegenerateDiffusionDefaultSearch) {
    const auto rep = run_pipeline(load_config(kConfigDir + "/degenerate_diffusion.conf"), Mode::Bounds);
    const auto* thm31 = find_bound(rep, "thm31");
    ASSERT_NE(thm31, nullptr);
    EXPECT_GT(thm31->value, 0.0);
    EXPECT_EQ(rep.verdict.outcome, Outcome::GapExists);
}

TEST(Pipeline, DegenerateDiffusionWithFixedTestFunction) {
    // exp[C] f / α grows like exp(3r² - r) with this f, so the inner tail diverges.
    const auto rep = run_pipeline(load_config(kConfigDir + "/degenerate_diffusion_user_f.conf"), Mode::Bounds);
    const auto* thm31 = find_bound(rep, "thm31");
    ASSERT_NE(thm31, nullptr);
    EXPECT_EQ(thm31->value, 0.0);
    EXPECT_NE(thm31->diagnostics.reason.find("divergent"), std::string::npos);
    EXPECT_NE(rep.verdict.outcome, Outcome::NoGap);
}

TEST(Report, CsvRows) {
    const auto rep = run_pipeline(load_config(kConfigDir + "/c_drift.conf"), Mode::Bounds);
    const auto lines = lines_of(emit_csv(rep));
    ASSERT_FALSE(lines.empty());
    EXPECT_EQ(lines[0], "method,direction,value,citation,error_estimate,flags");
    bool thm12 = false, eq17 = false;
    for (const auto& l : lines) {
        if (l.rfind("thm12,lower,", 0) == 0) {
            thm12 = true;
            EXPECT_NEAR(std::stod(l.substr(12)), 1.0, 1e-5);
        }
        if (l.rfind("eq17,upper,", 0) == 0) {
            eq17 = true;
            EXPECT_NEAR(std::stod(l.substr(11)), 1.0, 5e-3);
        }
    }
    EXPECT_TRUE(thm12);
    EXPECT_TRUE(eq17);
}

TEST(Report, PlotDataColumns) {
    const auto rep = run_pipeline(load_config(kConfigDir + "/c_drift.conf"), Mode::Bounds);
    const auto lines = lines_of(emit_plotdata(rep));
    ASSERT_EQ(lines.size(), 513u);
    EXPECT_EQ(lines[0][0], '#');
    double prev = -1.0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        std::istringstream row(lines[i]);
        double r, gamma, C, ratio;
        ASSERT_TRUE(row >> r >> gamma >> C >> ratio) << lines[i];
        EXPECT_GT(r, prev);
        EXPECT_NEAR(gamma, -2.0, 1e-12);
        EXPECT_NEAR(C, -2.0 * r, 1e-9 * (1 + r));
        prev = r;
    }
}

TEST(Report, TextStartsWithVerdict) {
    const auto rep = run_pipeline(load_config(kConfigDir + "/c_drift.conf"), Mode::Bounds);
    EXPECT_EQ(emit_text(rep).rfind("Verdict: gap_exists", 0), 0u);
}

TEST(Report, CsvIsDeterministic) {
    const auto cfg = load_config(kConfigDir + "/c_drift.conf");
    EXPECT_EQ(emit_csv(run_pipeline(cfg)), emit_csv(run_pipeline(cfg)));
}

TEST(Cli, EstimateSucceeds) {
    const auto r = run_cli("estimate '" + kConfigDir + "/c_drift.conf'");
    EXPECT_EQ(r.status, 0);
    EXPECT_EQ(r.out.rfind("Verdict:", 0), 0u);
}

TEST(Cli, CsvByteIdenticalAcrossProcesses) {
    const auto a = run_cli("estimate '" + kConfigDir + "/c_drift.conf' --format csv");
    const auto b = run_cli("estimate '" + kConfigDir + "/c_drift.conf' --format csv");
    EXPECT_EQ(a.status, 0);
    EXPECT_FALSE(a.out.empty());
    EXPECT_EQ(a.out, b.out);
}

TEST(Cli, OutDirectory) {
    const auto dir = scratch_dir("out");
    const auto r = run_cli("bounds '" + kConfigDir + "/c_drift.conf' --format csv --out '" + dir.string() + "'");
    EXPECT_EQ(r.status, 0);
    const fs::path file = dir / report_file_name("csv");
    ASSERT_TRUE(fs::exists(file));
    std::ifstream in(file);
    std::string first;
    std::getline(in, first);
    EXPECT_EQ(first, "method,direction,value,citation,error_estimate,flags");
}

TEST(Cli, ConfigErrorExitsWithOne) {
    const auto dir = scratch_dir("bad");
    const auto path = write_file(dir / "bad.conf", "[problem]\nvariant = halfline\na = \"1\"\nV = \"exp(\"\n");
    EXPECT_EQ(run_cli("estimate '" + path.string() + "'").status, 1);
    EXPECT_EQ(run_cli("estimate '" + (dir / "missing.conf").string() + "'").status, 1);
}

TEST(Cli, ModelErrorExitsWithOne) {
    const auto dir = scratch_dir("model");
    const auto path = write_file(dir / "m.conf", "[problem]\nvariant = halfline\na = \"r-1\"\nV = \"-r\"\n");
    EXPECT_EQ(run_cli("bounds '" + path.string() + "'").status, 1);
}

TEST(Cli, FlagValidation) {
    const std::string cfg = "'" + kConfigDir + "/c_drift.conf'";
    EXPECT_EQ(run_cli("bounds " + cfg + " --tol -1").status, 1);
    EXPECT_EQ(run_cli("bounds " + cfg + " --format xml").status, 1);
    EXPECT_EQ(run_cli("frobnicate " + cfg).status, 1);
    EXPECT_EQ(run_cli("--help").status, 0);
}

TEST(Cli, ToleranceFlagOverridesConfig) {
    const std::string cfg = "'" + kConfigDir + "/c_drift.conf'";
    const auto a = run_cli("bounds " + cfg + " --format csv --tol 1e-6");
    EXPECT_EQ(a.status, 0);
    EXPECT_NE(a.out.find("thm12,lower,"), std::string::npos);
}

TEST(Cli, CheckModeReportsOrdering) {
    const auto r = run_cli("check '" + kConfigDir + "/c_drift.conf'");
    EXPECT_EQ(r.status, 0);
    EXPECT_NE(r.out.find("Ordering checks:"), std::string::npos);
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}
