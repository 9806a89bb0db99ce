#include "sldp/cli.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace sldp;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun run(std::vector<std::string> args) {
    args.insert(args.begin(), "sldp");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("sldp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string out(const std::string& sub = "out") const { return (dir_ / sub).string(); }
    fs::path dir_;
};

}  // namespace

TEST_F(Cli, ValidateRegistryProblem) {
    const CliRun r = run({"--problem", "brownian-1d", "--out", out(), "validate"});
    EXPECT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(slurp(fs::path(out()) / "validate.json"));
    ASSERT_FALSE(j["checks"].empty());
    for (const char* key : {"assumption", "verdict", "witness", "value"}) EXPECT_TRUE(j["checks"][0].contains(key));
}

TEST_F(Cli, EllipticityFailureExitsOne) {
    const fs::path file = dir_ / "bad.ini";
    std::ofstream(file) << "[problem]\ndim = 2\n[drift]\nlimit = 0; 0\n[diffusion]\nfield = 3; 0; 0; 1\n";
    const CliRun r = run({"--problem", file.string(), "--out", out(), "validate"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("A1' ellipticity    fail"), std::string::npos) << r.out;
}

TEST_F(Cli, MalformedFileExitsTwo) {
    const fs::path file = dir_ / "broken.ini";
    std::ofstream(file) << "[problem]\ndim = 1\n[drift]\nlimit = sin(\n[diffusion]\nfield = 1\n";
    const CliRun r = run({"--problem", file.string(), "--out", out(), "validate"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("syntax"), std::string::npos) << r.err;
    EXPECT_EQ(run({"--problem", "brownian-1d", "frobnicate"}).code, 2);
    EXPECT_EQ(run({"validate"}).code, 2);
}

TEST_F(Cli, ZvonkinCertificateAndCap) {
    CliRun r = run({"--problem", "brownian-1d", "--out", out(), "zvonkin"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("norms=(0,0,0)"), std::string::npos) << r.out;
    EXPECT_TRUE(fs::exists(fs::path(out()) / "map.csv"));

    r = run({"--problem", "dini-tanhlog-1d", "--out", out("cap"), "zvonkin", "--lambda-start", "0.01",
             "--cap-factor", "8", "--resolution", "201"});
    EXPECT_EQ(r.code, 3);
    const auto ladder = nlohmann::json::parse(slurp(fs::path(out("cap")) / "ladder.json"));
    EXPECT_EQ(ladder.size(), 4u);
}

TEST_F(Cli, SimulateWritesPathsAndSummary) {
    const CliRun r = run({"--problem", "brownian-1d", "--out", out(), "simulate", "--eps", "1", "--n-paths", "10"});
    EXPECT_EQ(r.code, 0) << r.err;
    int csv = 0;
    for (const auto& e : fs::directory_iterator(out())) csv += e.path().extension() == ".csv";
    EXPECT_EQ(csv, 10);
    EXPECT_EQ(slurp(fs::path(out()) / "path_0.csv").substr(0, 5), "t,x1\n");
    const auto j = nlohmann::json::parse(slurp(fs::path(out()) / "summary.json"));
    EXPECT_EQ(j["n_paths"], 10);
    EXPECT_EQ(j["escapes"], 0);
    for (const char* key : {"eps", "dt", "wall_time"}) EXPECT_TRUE(j.contains(key));
}

TEST_F(Cli, RateFreeEndpoint) {
    const CliRun r = run({"--problem", "free-endpoint", "--out", out(), "rate", "--target", "1", "0", "--restarts", "2"});
    EXPECT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(slurp(fs::path(out()) / "rate.json"));
    EXPECT_NEAR(j["value"].get<double>(), 0.5, 5e-3);
    EXPECT_EQ(j["minimizer_csv_path"], "minimizer.csv");
    EXPECT_EQ(slurp(fs::path(out()) / "minimizer.csv").substr(0, 24), "interval,hdot_1,hdot_2\n0");
}

TEST_F(Cli, LdpGaussianLadder) {
    const CliRun r = run({"--problem", "brownian-1d", "--out", out(), "ldp", "--n-paths", "20000", "--eps-ladder", "0.5",
                       "0.35", "0.25", "0.175", "--steps", "20"});
    EXPECT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(slurp(fs::path(out()) / "ldp.json"));
    EXPECT_NEAR(j["slope"].get<double>(), -0.5, 0.15);
    EXPECT_NEAR(j["rate_value"].get<double>(), 0.5, 5e-3);
    EXPECT_EQ(j["bound_checks"].size(), 2u);
    EXPECT_EQ(slurp(fs::path(out()) / "ladder.csv").substr(0, 34), "eps,n_paths,hits,p_hat,ci_lo,ci_hi");
}

TEST_F(Cli, ManifestRerunIsByteIdentical) {
    const CliRun first = run({"--problem", "dini-tanhlog-1d", "--out", out("a"), "--seed", "99", "simulate", "--n-paths",
                           "3", "--eps", "0.3"});
    ASSERT_EQ(first.code, 0) << first.err;
    const CliRun again = run({"--config", (fs::path(out("a")) / "manifest.toml").string(), "--out", out("b")});
    ASSERT_EQ(again.code, 0) << again.err;
    for (const char* f : {"path_0.csv", "path_1.csv", "path_2.csv"}) {
        EXPECT_EQ(slurp(fs::path(out("a")) / f), slurp(fs::path(out("b")) / f)) << f;
    }
}

TEST_F(Cli, WorkerCountDoesNotChangeOutput) {
    const std::vector<std::string> common{"ldp", "--n-paths", "5000", "--eps-ladder", "0.5", "0.35", "0.25",
                                          "--steps", "20", "--no-rate"};
    auto args = [&](const std::string& o, const std::string& w) {
        std::vector<std::string> a{"--problem", "dini-tanhlog-1d", "--out", o, "--workers", w};
        a.insert(a.end(), common.begin(), common.end());
        return a;
    };
    ASSERT_EQ(run(args(out("w1"), "1")).code, 0);
    ASSERT_EQ(run(args(out("w3"), "3")).code, 0);
    EXPECT_EQ(slurp(fs::path(out("w1")) / "ladder.csv"), slurp(fs::path(out("w3")) / "ladder.csv"));
    EXPECT_EQ(slurp(fs::path(out("w1")) / "ldp.json"), slurp(fs::path(out("w3")) / "ldp.json"));
}
