#include "conebvp/cli.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace conebvp;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kDir = CONEBVP_FIXTURES;

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "cone_bvp");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream os, es;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), os, es);
    return {code, os.str(), es.str()};
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("cone_bvp_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string out(const std::string& sub = "") const { return (dir_ / sub).string(); }

    static json read_json(const std::string& path) { return json::parse(io::read_file(path)); }

    fs::path dir_;
};

std::vector<std::vector<double>> read_csv(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

TEST_F(Cli, ValidatePasses) {
    const auto r = run({"validate", kDir + "/constant.json"});
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(json::parse(r.out)["passed"].get<bool>());
}

TEST_F(Cli, ValidateDecreasingQ) {
    const auto r = run({"validate", kDir + "/q_decreasing.json", "--out", out("v.json")});
    EXPECT_EQ(r.code, 1);
    const auto doc = read_json(out("v.json"));
    bool witness = false;
    for (const auto& h : doc["hypotheses"]) {
        if (h["name"] == "H2" && !h["passed"].get<bool>()) witness = h.contains("t") && h.contains("t2");
    }
    EXPECT_TRUE(witness);
}

TEST_F(Cli, ValidateMalformed) {
    EXPECT_EQ(run({"validate", kDir + "/malformed.json"}).code, 2);
    EXPECT_EQ(run({"validate", kDir + "/missing.json"}).code, 2);
}

TEST_F(Cli, UsageErrors) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({"solve", kDir + "/constant.json", "--method", "bogus", "--out", out()}).code, 2);
}

TEST_F(Cli, SolveConstantForcing) {
    const auto r = run({"solve", kDir + "/constant.json", "--out", out()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = read_csv(out("solution.csv"));
    ASSERT_EQ(rows.size(), 513u);
    double err = 0.0;
    for (const auto& row : rows) err = std::max(err, std::abs(row[1] - 4 * row[0] * (1 - row[0])));
    EXPECT_LE(err, 1e-6);
    const auto report = read_json(out("report.json"));
    EXPECT_EQ(report["schema_version"], 1);
    EXPECT_TRUE(report["converged"].get<bool>());
    EXPECT_NEAR(report["sigma"][0].get<double>(), 0.5, 1e-8);
    EXPECT_TRUE(report["cone"]["member"].get<bool>());
    const auto manifest = read_json(out("manifest.json"));
    EXPECT_EQ(manifest["command"], "solve");
    EXPECT_EQ(manifest["outputs"].size(), 3u);
    EXPECT_EQ(manifest["config"]["grid"], 512);
}

TEST_F(Cli, SolveSandwich) {
    const auto r = run({"solve", kDir + "/constant.json", "--alpha", "0.5", "--beta", "2", "--out", out()});
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(read_json(out("report.json"))["sandwich"]["passed"].get<bool>());
}

TEST_F(Cli, SolveImpossibleTolerance) {
    const auto r = run({"solve", kDir + "/plaplace3.json", "--tol", "1e-30", "--grid", "64", "--out", out()});
    EXPECT_EQ(r.code, 1);
    const auto report = read_json(out("report.json"));
    EXPECT_FALSE(report["converged"].get<bool>());
    EXPECT_FALSE(report["message"].get<std::string>().empty());
}

TEST_F(Cli, IntervalsSuperlinear) {
    const auto r = run({"intervals", kDir + "/superlinear.json", "--out", out()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = read_json(out("intervals.json"));
    EXPECT_EQ(doc["interval_s"]["lower"], 0.0);
    EXPECT_EQ(doc["interval_s"]["upper"], "inf");
    EXPECT_TRUE(doc["corollary_i"].get<bool>());
    EXPECT_TRUE(doc["h1"].get<bool>());
    EXPECT_EQ(doc["components"][0]["g0"]["source"], "estimated");
}

TEST_F(Cli, IntervalsDeclared) {
    const auto r = run({"intervals", kDir + "/superlinear.json", "--g0", "0.5", "--ginf", "inf", "--out", out()});
    ASSERT_EQ(r.code, 0);
    const auto doc = read_json(out("intervals.json"));
    EXPECT_EQ(doc["interval_s"]["lower"], 0.0);
    EXPECT_NEAR(doc["interval_s"]["upper"].get<double>(), 2.0, 1e-12);
    EXPECT_EQ(doc["components"][0]["g0"]["source"], "declared");
}

TEST_F(Cli, IntervalsLinearFails) {
    const auto r = run({"intervals", kDir + "/linear3u.json", "--out", out()});
    EXPECT_EQ(r.code, 1);
    const auto doc = read_json(out("intervals.json"));
    EXPECT_FALSE(doc["interval_s"]["nonempty"].get<bool>());
    EXPECT_FALSE(doc["interval_t"]["nonempty"].get<bool>());
}

TEST_F(Cli, SweepThreePoints) {
    const auto r = run({"sweep", kDir + "/superlinear.json", "--lambda-min", "0.1", "--lambda-max", "10", "--points",
                        "3", "--grid", "128", "--out", out()});
    ASSERT_EQ(r.code, 0);
    const auto rows = read_csv(out("sweep.csv"));
    ASSERT_EQ(rows.size(), 3u);
    for (const auto& row : rows) {
        EXPECT_EQ(row[1], 1.0);
        EXPECT_GT(row[2], 0.0);
    }
}

TEST_F(Cli, SweepSinglePointMatchesSolve) {
    ASSERT_EQ(run({"sweep", kDir + "/superlinear.json", "--lambda-min", "1", "--lambda-max", "1", "--points", "1",
                   "--grid", "128", "--out", out("sweep")})
                  .code,
              0);
    ASSERT_EQ(run({"solve", kDir + "/superlinear.json", "--grid", "128", "--out", out("solve")}).code, 0);
    const auto rows = read_csv(out("sweep/sweep.csv"));
    ASSERT_EQ(rows.size(), 1u);
    const auto report = read_json(out("solve/report.json"));
    EXPECT_EQ(rows[0][2], report["norm"].get<double>());
    EXPECT_EQ(rows[0][5], report["sigma"][0].get<double>());
}

TEST_F(Cli, SweepCapInManifest) {
    ASSERT_EQ(run({"sweep", kDir + "/superlinear.json", "--lambda-min", "1", "--lambda-max", "inf", "--points", "2",
                   "--grid", "64", "--cap", "100", "--out", out()})
                  .code,
              0);
    const auto m = read_json(out("manifest.json"));
    EXPECT_TRUE(m["config"]["truncated_high"].get<bool>());
    EXPECT_EQ(m["config"]["cap"], 100.0);
    const auto rows = read_csv(out("sweep.csv"));
    EXPECT_EQ(rows.back()[0], 100.0);
}

TEST_F(Cli, RadialTransform) {
    const auto r = run({"radial", kDir + "/annulus.json", "--out", out()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = read_json(out("problem.json"));
    EXPECT_EQ(doc["weight_q"], "(t+1)^1");
    EXPECT_EQ(doc["weight_p"], "1");
    EXPECT_EQ(doc["h"][0], "(t+1)");
    // chainable into solve
    EXPECT_EQ(run({"solve", out("problem.json"), "--grid", "128", "--out", out("s")}).code, 0);
}

TEST_F(Cli, RadialBadRadii) {
    EXPECT_EQ(run({"radial", kDir + "/annulus_bad.json", "--out", out()}).code, 2);
}

TEST_F(Cli, SeedPrecedence) {
    ::setenv("CONE_BVP_SEED", "7", 1);
    EXPECT_EQ(cli::resolve_seed(std::nullopt), 7u);
    EXPECT_EQ(cli::resolve_seed(std::uint64_t{9}), 9u);
    ::unsetenv("CONE_BVP_SEED");
    EXPECT_EQ(cli::resolve_seed(std::nullopt), 42u);
}

TEST_F(Cli, SweepIsDeterministic) {
    const std::vector<std::string> base{"sweep", kDir + "/coupled.json", "--lambda-min", "0.1", "--lambda-max", "2",
                                        "--points", "3", "--grid", "64"};
    auto a = base, b = base;
    a.insert(a.end(), {"--out", out("a")});
    b.insert(b.end(), {"--out", out("b")});
    ASSERT_EQ(run(a).code, 0);
    ASSERT_EQ(run(b).code, 0);
    EXPECT_EQ(io::read_file(out("a/sweep.csv")), io::read_file(out("b/sweep.csv")));
}
