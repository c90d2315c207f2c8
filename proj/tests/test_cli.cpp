#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    args.insert(args.begin(), "bayesfault");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = bayesfault::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("bayesfault_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, SimulateIsByteIdenticalAcrossRuns) {
    ASSERT_EQ(run({"simulate", "--seed", "5", "--rows", "50", "--out", path("a.csv")}).code, 0);
    ASSERT_EQ(run({"simulate", "--seed", "5", "--rows", "50", "--out", path("b.csv")}).code, 0);
    EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
    ASSERT_EQ(run({"simulate", "--seed", "6", "--rows", "50", "--out", path("c.csv")}).code, 0);
    EXPECT_NE(slurp(path("a.csv")), slurp(path("c.csv")));
}

TEST_F(CliTest, FitThenClassifyNoiselessDataIsAllNormal) {
    ASSERT_EQ(run({"simulate", "--seed", "1", "--rows", "200", "--noise", "0", "--out", path("d.csv"), "--matrix-out",
                   path("true.csv")})
                  .code,
              0);
    ASSERT_EQ(run({"fit", "--data", path("d.csv"), "--out", path("fit.csv")}).code, 0);
    const auto r = run({"classify", "--matrix", path("fit.csv"), "--data", path("d.csv"), "--window", "10", "--out", "-"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream lines(r.out);
    std::string line;
    std::getline(lines, line);
    EXPECT_EQ(line, "window,first_timestamp,last_timestamp,log_ratio,decision");
    std::size_t windows = 0;
    while (std::getline(lines, line)) {
        ++windows;
        EXPECT_TRUE(line.ends_with(",normal")) << line;
    }
    EXPECT_EQ(windows, 19u);
}

TEST_F(CliTest, DimensionMismatchIsAUsageError) {
    ASSERT_EQ(run({"simulate", "--rows", "50", "--k", "2", "--out", path("d.csv")}).code, 0);
    ASSERT_EQ(run({"simulate", "--rows", "50", "--k", "3", "--out", path("d3.csv"), "--matrix-out", path("m3.csv")}).code,
              0);
    const auto r = run({"classify", "--matrix", path("m3.csv"), "--data", path("d.csv"), "--out", "-"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("matrix is 1x9"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("k=3"), std::string::npos);
    EXPECT_NE(r.err.find("k=2"), std::string::npos);
}

TEST_F(CliTest, BadInputsGiveExitTwo) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"simulate", "--bogus", "1"}).code, 2);
    EXPECT_EQ(run({"fit", "--out", "-"}).code, 2);
    EXPECT_EQ(run({"fit", "--data", path("missing.csv"), "--out", "-"}).code, 2);
    {
        std::ofstream bad(path("bad.csv"));
        bad << "timestamp,x0,u0\n0,1,2\n1,oops,3\n";
    }
    const auto r = run({"fit", "--data", path("bad.csv"), "--out", "-"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("oops"), std::string::npos) << r.err;
    EXPECT_EQ(run({"mc-f1", "--samples", "3", "--out", "-"}).code, 2);
}

TEST_F(CliTest, ConfigSitsBetweenFlagsAndDefaults) {
    {
        std::ofstream cfg(path("run.cfg"));
        cfg << "# test config\ntrials = 3\nsamples = 50\nlags = 1,5\n";
    }
    const auto from_config = run({"mc-f1", "--config", path("run.cfg"), "--out", "-"});
    ASSERT_EQ(from_config.code, 0) << from_config.err;
    EXPECT_NE(from_config.out.find("# trials=3\n"), std::string::npos);
    EXPECT_NE(from_config.out.find("# config.trials=3\n"), std::string::npos);

    const auto overridden = run({"mc-f1", "--config", path("run.cfg"), "--trials", "2", "--out", "-"});
    ASSERT_EQ(overridden.code, 0);
    EXPECT_NE(overridden.out.find("# trials=2\n"), std::string::npos);
    EXPECT_NE(overridden.out.find("# samples=50\n"), std::string::npos);

    {
        std::ofstream cfg(path("typo.cfg"));
        cfg << "trails = 3\n";
    }
    const auto typo = run({"mc-f1", "--config", path("typo.cfg"), "--out", "-"});
    EXPECT_EQ(typo.code, 2);
    EXPECT_NE(typo.err.find("trails"), std::string::npos);
}

TEST_F(CliTest, InstalledBinaryMatchesInProcessRun) {
    const std::string bin = BAYESFAULT_CLI_PATH;
    const std::string cmd = bin + " simulate --seed 9 --rows 30 --out " + path("bin.csv");
    ASSERT_EQ(std::system(cmd.c_str()), 0);
    ASSERT_EQ(run({"simulate", "--seed", "9", "--rows", "30", "--out", path("lib.csv")}).code, 0);
    EXPECT_EQ(slurp(path("bin.csv")), slurp(path("lib.csv")));
    const int status = std::system((bin + " classify --out - 2>/dev/null").c_str());
    EXPECT_EQ(WEXITSTATUS(status), 2);
}
