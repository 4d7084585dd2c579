#include "ulam/errors.hpp"
#include "ulam/experiment.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ulam;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = ULAMLAB_CONFIG_DIR;

nlohmann::json minimal()
{
    return nlohmann::json::parse(R"({
        "version": 1,
        "space": {"dimension": 1, "kind": "beta_homogeneous", "beta": 1.0},
        "phi": {"kind": "power", "theta": 1.0, "r": 3.0}
    })");
}

fs::path fresh_dir(const std::string& name)
{
    const fs::path d = fs::temp_directory_path() / ("ulamlab_test_" + name);
    fs::remove_all(d);
    return d;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(ULAMLAB_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> csv_column(const std::string& csv, std::size_t col)
{
    std::vector<std::string> out;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string cell;
        for (std::size_t i = 0; i <= col; ++i) std::getline(ls, cell, ',');
        out.push_back(cell);
    }
    return out;
}

}  // namespace

TEST(ParseConfig, MinimalDefaults)
{
    const ExperimentConfig c = parse_config(minimal(), ".");
    EXPECT_EQ(c.version, 1);
    EXPECT_TRUE(c.methods.empty());
    EXPECT_EQ(c.beta(), 1.0);
    EXPECT_EQ(c.target(), c.space);
}

TEST(ParseConfig, UnknownKeysAreErrors)
{
    auto j = minimal();
    j["colour"] = "blue";
    EXPECT_THROW(parse_config(j, "."), ConfigError);
    auto k = minimal();
    k["samples"] = {{"depth", 2}};
    EXPECT_THROW(parse_config(k, "."), ConfigError);
}

TEST(ParseConfig, VersionIsRequired)
{
    auto j = minimal();
    j["version"] = 2;
    EXPECT_THROW(parse_config(j, "."), ConfigError);
    j.erase("version");
    EXPECT_THROW(parse_config(j, "."), ConfigError);
}

TEST(ParseConfig, RandomSamplesNeedASeed)
{
    auto j = minimal();
    j["samples"] = {{"random_count", 5}};
    EXPECT_THROW(parse_config(j, "."), ConfigError);
    j["samples"]["seed"] = 12;
    EXPECT_EQ(*parse_config(j, ".").samples.seed, 12u);
}

TEST(ParseConfig, DistinctTargetNeedsTheExperimentalFlag)
{
    auto j = minimal();
    j["target_space"] = {{"dimension", 1}, {"kind", "beta_homogeneous"}, {"beta", 0.5}};
    EXPECT_THROW(parse_config(j, "."), ConfigError);
    j["experimental_distinct_beta"] = true;
    EXPECT_EQ(parse_config(j, ".").beta(), 0.5);
}

TEST(ParseConfig, FixedPointMethodsNeedL)
{
    auto j = minimal();
    j["method"] = "fixpoint_halving";
    EXPECT_THROW(parse_config(j, "."), ConfigError);
    j["fixpoint"] = {{"L", 0.5}};
    EXPECT_EQ(parse_config(j, ".").methods.size(), 1u);
    j["method"] = "all";
    EXPECT_EQ(parse_config(j, ".").methods.size(), 4u);
    j["method"] = "direct_22";
    EXPECT_THROW(parse_config(j, "."), ConfigError);
}

TEST(ParseConfig, InvalidNestedValuesBecomeConfigErrors)
{
    auto j = minimal();
    j["phi"]["r"] = -1.0;
    EXPECT_THROW(parse_config(j, "."), ConfigError);
    auto k = minimal();
    k["mapping"] = {{"core", {{"kind", "separable"}, {"a", "oops"}}}};
    EXPECT_THROW(parse_config(k, "."), ConfigError);
    auto m = minimal();
    m["space"]["beta"] = 2.0;
    EXPECT_THROW(parse_config(m, "."), ConfigError);
}

TEST(RunScenario, CubicFixtureExitsCleanlyWithPositiveSlack)
{
    const ExperimentConfig cfg = load_config(kConfigs / "r3_beta1.json");
    const fs::path out = fresh_dir("r3");
    const RunResult res = run_scenario(cfg, out);
    EXPECT_EQ(res.exit_code, 0);
    const std::string bound = slurp(out / "bound.csv");
    const auto slack = csv_column(bound, 5);
    ASSERT_FALSE(slack.empty());
    for (const auto& s : slack) EXPECT_GE(std::stod(s), 0.0);
    for (const char* f : {"report.json", "series.csv", "extract.csv", "fixpoint.json", "fixpoint_J.csv",
                          "fixpoint_J_prime.csv"})
        EXPECT_TRUE(fs::exists(out / f)) << f;
}

TEST(RunScenario, ZeroMappingIsAllTrivial)
{
    const RunResult res = run_scenario(load_config(kConfigs / "zero_mapping.json"), fresh_dir("zero"));
    EXPECT_EQ(res.exit_code, 0);
    EXPECT_TRUE(res.report.all_pass());
}

TEST(RunScenario, CorollaryAuditIsFlagged)
{
    const RunResult res = run_scenario(load_config(kConfigs / "fixpoint_corollary_audit.json"), fresh_dir("c32"));
    EXPECT_EQ(res.exit_code, 1);
    EXPECT_GT(res.report.count(Status::flagged), 0u);
    EXPECT_EQ(res.report.count(Status::fail), 0u);
}

TEST(RunScenario, ExitCodeIsMaximumSeverity)
{
    auto j = minimal();
    j["phi"]["r"] = 1.5;
    j["method"] = "direct_halving";
    j["mapping"] = {{"core", {{"kind", "zero"}}}};
    const RunResult res = run_scenario(parse_config(j, "."), fresh_dir("refused"));
    EXPECT_EQ(res.exit_code, res.report.exit_code());
    EXPECT_EQ(res.exit_code, 2);  // the halving quadratic series diverges at r = 1.5
}

TEST(RunScenario, ReportJsonIsSorted)
{
    const fs::path out = fresh_dir("sorted");
    run_scenario(load_config(kConfigs / "zero_mapping.json"), out);
    const auto j = nlohmann::json::parse(slurp(out / "report.json"));
    std::vector<std::string> ids;
    for (const auto& e : j.at("entries")) ids.push_back(e.at("check_id"));
    EXPECT_TRUE(std::is_sorted(ids.begin(), ids.end()));
}

TEST(Sweep, CriticalExponentPattern)
{
    const ExperimentConfig cfg = load_config(kConfigs / "r05_beta1.json");
    const auto rows = sweep_exponent(cfg, {0.5, 0.9, 1.1, 1.5, 2.5, 3.0});
    ASSERT_EQ(rows.size(), 6u);
    const bool expected[6][4] = {
        {false, false, true, true}, {false, false, true, true}, {true, false, false, true},
        {true, false, false, true}, {true, true, false, false}, {true, true, false, false},
    };
    for (std::size_t i = 0; i < 6; ++i)
        for (int s = 0; s < 4; ++s) EXPECT_EQ(rows[i].series_converged[s], expected[i][s]) << i << "," << s;
}

TEST(Sweep, CriticalRowAtRTwo)
{
    const ExperimentConfig cfg = load_config(kConfigs / "r05_beta1.json");
    const auto rows = sweep_exponent(cfg, {2.0});
    EXPECT_FALSE(rows[0].series_converged[1]);
    EXPECT_FALSE(rows[0].series_converged[3]);
    EXPECT_FALSE(rows[0].smallest_L_halving.has_value());
}

TEST(Sweep, EmptyGridGivesHeaderOnly)
{
    const ExperimentConfig cfg = load_config(kConfigs / "r05_beta1.json");
    const std::string csv = sweep_csv(sweep_exponent(cfg, {}));
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1);
}

TEST(Determinism, RepeatedRunsAreByteIdentical)
{
    for (const char* name : {"r3_beta1.json", "zero_mapping.json", "fixpoint_corollary_audit.json"}) {
        const ExperimentConfig cfg = load_config(kConfigs / name);
        const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
        const RunResult ra = run_scenario(cfg, a);
        run_scenario(cfg, b);
        for (const auto& f : ra.files) EXPECT_EQ(slurp(f), slurp(b / f.filename())) << name << " " << f;
    }
}

TEST(Cli, ExitCodes)
{
    const fs::path out = fresh_dir("cli");
    EXPECT_EQ(run_cli("run --config " + (kConfigs / "zero_mapping.json").string() + " --out " + out.string()), 0);
    EXPECT_EQ(run_cli("audit --config " + (kConfigs / "fixpoint_corollary_audit.json").string() + " --out " + out.string()),
              1);
    EXPECT_EQ(run_cli("run --config /nonexistent.json --out " + out.string()), 3);
    EXPECT_EQ(run_cli("frobnicate"), 3);
    const fs::path bad = out / "bad.json";
    fs::create_directories(out);
    std::ofstream(bad) << R"({"version": 1, "unknown": true})";
    EXPECT_EQ(run_cli("run --config " + bad.string() + " --out " + out.string()), 3);
}

TEST(Cli, SubcommandsWriteTheirOwnOutputs)
{
    const fs::path out = fresh_dir("cli_series");
    const std::string cfg = (kConfigs / "r3_beta1.json").string();
    EXPECT_EQ(run_cli("series --config " + cfg + " --out " + out.string()), 0);
    EXPECT_TRUE(fs::exists(out / "series.csv"));
    EXPECT_FALSE(fs::exists(out / "extract.csv"));
    EXPECT_EQ(run_cli("sweep --config " + cfg + " --out " + out.string()), 0);
    const std::string sweep = slurp(out / "sweep.csv");
    EXPECT_EQ(std::count(sweep.begin(), sweep.end(), '\n'), 7);
}

TEST(Cli, OutputDirectoryFromEnvironment)
{
    const fs::path out = fresh_dir("cli_env");
    const std::string cmd = "ULAMLAB_OUT_DIR=" + out.string() + " " + ULAMLAB_CLI + " axioms --config " +
                            (kConfigs / "zero_mapping.json").string() + " > /dev/null 2>&1";
    EXPECT_EQ(std::system(cmd.c_str()), 0);
    EXPECT_TRUE(fs::exists(out / "report.json"));
}

TEST(Cli, SeedOverride)
{
    const fs::path dir = fresh_dir("cli_seed");
    fs::create_directories(dir);
    auto j = minimal();
    j["samples"] = {{"random_count", 4}, {"seed", 1}};
    j["method"] = "direct_halving";
    std::ofstream(dir / "cfg.json") << j.dump();
    const std::string base = "run --config " + (dir / "cfg.json").string() + " --out ";
    EXPECT_EQ(run_cli(base + (dir / "a").string() + " --seed 5"), 0);
    EXPECT_EQ(run_cli(base + (dir / "b").string() + " --seed 5"), 0);
    EXPECT_EQ(slurp(dir / "a" / "report.json"), slurp(dir / "b" / "report.json"));
}
