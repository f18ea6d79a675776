#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <hybcs/cli.hpp>

using namespace hybcs;
namespace fs = std::filesystem;

namespace {

fs::path dir() {
    auto p = fs::temp_directory_path() / ("hybcs_cli_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
}

std::string write_config(const std::string& name, const std::string& body) {
    auto p = dir() / name;
    std::ofstream(p) << body;
    return p.string();
}

int run_binary(const std::string& args, std::string* output = nullptr) {
    const auto log = (dir() / "stdout.txt").string();
    const std::string cmd = std::string(HYBCS_CLI_PATH) + " " + args + " > " + log + " 2>&1";
    const int st = std::system(cmd.c_str());
    if (output) {
        std::ifstream in(log);
        std::stringstream ss;
        ss << in.rdbuf();
        *output = ss.str();
    }
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

const char* kSmall = R"({
    "band": {"n_modes": 256},
    "interaction": {"u_over_w": 1.0},
    "dissipation": {"gamma_over_u": 0.08, "alpha": 1.0},
    "time": {"t_max_w": 30, "samples": 60},
    "output": {"track_energies": [-0.2, 0.2]}
})";

}  // namespace

TEST(CliRun, WritesCsvAndSidecar) {
    auto cfg = write_config("small.json", kSmall);
    const auto csv = (dir() / "out" / "small.csv").string();
    std::ostringstream out, err;
    ASSERT_EQ(cli::cmd_run({cfg, csv, 1}, out, err), cli::kOk) << err.str();
    auto t = read_series_csv(csv);
    EXPECT_EQ(t.names, series_header(2));
    EXPECT_EQ(t.column("t_w").size(), 60u);
    std::ifstream js(sidecar_path(csv));
    auto j = json::parse(js);
    EXPECT_EQ(j["version"], kVersion);
    EXPECT_TRUE(j.contains("grid_checksum"));
    EXPECT_TRUE(j["integrator"].contains("steps"));
}

TEST(CliRun, SidecarRoundTripIsBitIdentical) {
    auto cfg = write_config("rt.json", kSmall);
    const auto a = (dir() / "rt_a.csv").string(), b = (dir() / "rt_b.csv").string();
    std::ostringstream out, err;
    ASSERT_EQ(cli::cmd_run({cfg, a, 1}, out, err), cli::kOk);
    ASSERT_EQ(cli::cmd_run({sidecar_path(a), b, 1}, out, err), cli::kOk);
    std::ifstream fa(a), fb(b);
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    EXPECT_EQ(sa.str(), sb.str());
}

TEST(CliRun, BalancedDriveKeepsDensity) {
    auto cfg = write_config("bal.json", R"({"band": {"n_modes": 256},
        "dissipation": {"gamma_over_u": 0.08, "p_over_u": 0.08, "alpha": 1.0},
        "time": {"t_max_w": 100, "samples": 80}})");
    const auto csv = (dir() / "bal.csv").string();
    std::ostringstream out, err;
    ASSERT_EQ(cli::cmd_run({cfg, csv, 1}, out, err), cli::kOk);
    const auto table = read_series_csv(csv);
    for (double n : table.column("n")) EXPECT_NEAR(n, 1.0, 1e-10);
}

TEST(CliRun, ConfigErrorsExitTwo) {
    std::ostringstream out, err;
    auto bad = write_config("bad.json", R"({"band": {"n_modes": 255}})");
    EXPECT_EQ(cli::cmd_run({bad, std::nullopt, 1}, out, err), cli::kConfigError);
    EXPECT_NE(err.str().find("band.n_modes"), std::string::npos);
    auto guard = write_config("guard.json", R"({"band": {"n_modes": 64}, "time": {"t_max_w": 1000}})");
    EXPECT_EQ(cli::cmd_run({guard, std::nullopt, 1}, out, err), cli::kConfigError);
    auto weak = write_config("weak.json", R"({"band": {"n_modes": 2}, "interaction": {"u_over_w": 0.1},
                                              "time": {"t_max_w": 1}})");
    EXPECT_EQ(cli::cmd_run({weak, std::nullopt, 1}, out, err), cli::kConfigError);
    EXPECT_EQ(cli::cmd_run({(dir() / "absent.json").string(), std::nullopt, 1}, out, err), cli::kConfigError);
}

TEST(CliRun, IntegrationFailureExitsThree) {
    // tolerances far below double precision force the step size under its floor
    auto cfg = write_config("stiff.json", R"({"band": {"n_modes": 64},
        "dissipation": {"gamma_over_u": 5.0}, "time": {"t_max_w": 10, "samples": 5},
        "integrator": {"rtol": 1e-30, "atol": 1e-40}})");
    std::ostringstream out, err;
    EXPECT_EQ(cli::cmd_run({cfg, (dir() / "stiff.csv").string(), 1}, out, err), cli::kIntegrationError);
    EXPECT_NE(err.str().find("t_w"), std::string::npos);
}

TEST(CliScan, AlphaScanSlowsDecay) {
    auto cfg = write_config("scan.json", R"({"band": {"n_modes": 512},
        "dissipation": {"gamma_over_u": 0.08}, "time": {"t_max_w": 60, "samples": 601, "spacing": "linear"}})");
    const auto out_dir = (dir() / "scan").string();
    std::ostringstream out, err;
    cli::ScanOptions o{cfg, "alpha", {1.0, 0.5, 0.1, 0.01, 0.0}, out_dir, 2, 1};
    ASSERT_EQ(cli::cmd_scan(o, out, err), cli::kOk) << err.str();
    for (int i = 0; i < 5; ++i) EXPECT_TRUE(fs::exists(fs::path(out_dir) / ("run_" + std::to_string(i) + ".csv")));
    std::ifstream in(fs::path(out_dir) / "summary.csv");
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line.rfind("index,alpha,status,n_final", 0), 0u);
    double prev = 0;
    int rows = 0;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cells.push_back(c);
        ASSERT_EQ(cells[2], "ok");
        const double t_half = std::stod(cells[6]);
        EXPECT_GT(t_half, prev);
        prev = t_half;
        ++rows;
    }
    EXPECT_EQ(rows, 5);
}

TEST(CliScan, UsageErrors) {
    auto cfg = write_config("scan2.json", kSmall);
    std::ostringstream out, err;
    EXPECT_EQ(cli::cmd_scan({cfg, "alpha", {}, (dir() / "s2").string(), 1, 1}, out, err), cli::kConfigError);
    EXPECT_EQ(cli::cmd_scan({cfg, "beta", {0.5}, (dir() / "s2").string(), 1, 1}, out, err), cli::kConfigError);
    EXPECT_THROW(cli::parse_list("0.1,abc"), ConfigError);
    EXPECT_EQ(cli::parse_list("1,0.5,,2e-3"), (std::vector<double>{1, 0.5, 2e-3}));
}

TEST(CliScan, FailedRunIsRecordedAndScanContinues) {
    auto cfg = write_config("scan3.json", kSmall);
    const auto out_dir = (dir() / "s3").string();
    std::ostringstream out, err;
    EXPECT_EQ(cli::cmd_scan({cfg, "alpha", {0.5, 1.5}, out_dir, 1, 1}, out, err), cli::kIntegrationError);
    EXPECT_TRUE(fs::exists(fs::path(out_dir) / "run_0.csv"));
    std::ifstream in(fs::path(out_dir) / "summary.csv");
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_NE(ss.str().find("failed"), std::string::npos);
}

TEST(CliFit, SyntheticPowerLaw) {
    const auto csv = (dir() / "synthetic.csv").string();
    {
        std::ofstream f(csv);
        f << "t_w,n,re_delta,im_delta,abs_delta,zeta_mean\n";
        for (double t : log_samples(1, 1000, 60))
            f << format_double(t) << "," << format_double(3 / (t * t)) << ",0,0,1,1\n";
    }
    std::ostringstream out, err;
    const auto js = (dir() / "fit.json").string();
    ASSERT_EQ(cli::cmd_fit({csv, "n", 10, 100, js}, out, err), cli::kOk) << err.str();
    std::ifstream in(js);
    auto j = json::parse(in);
    EXPECT_NEAR(j["exponent"].get<double>(), -2.0, 1e-9);
    EXPECT_LT(j["window_doubling_drift"].get<double>(), 1e-9);
    EXPECT_EQ(cli::cmd_fit({csv, "missing", 10, 100, std::nullopt}, out, err), cli::kConfigError);
    EXPECT_EQ(cli::cmd_fit({csv, "n", 10, 11, std::nullopt}, out, err), cli::kConfigError);
}

TEST(CliOracle, DefaultPassesAndFaultIsNamed) {
    std::ostringstream out, err;
    EXPECT_EQ(cli::cmd_oracle({20, 2, "", 2}, out, err), cli::kOk) << out.str();
    std::ostringstream o2;
    EXPECT_EQ(cli::cmd_oracle({3, 2, "hybrid_loss", 1}, o2, err), cli::kOracleFailure);
    EXPECT_NE(o2.str().find("FAIL eom_equivalence"), std::string::npos);
    EXPECT_NE(o2.str().find("hybrid_loss"), std::string::npos);
    EXPECT_EQ(cli::cmd_oracle({3, 4, "", 1}, out, err), cli::kConfigError);
    EXPECT_EQ(cli::cmd_oracle({3, 2, "bogus", 1}, out, err), cli::kConfigError);
}

TEST(Binary, ExitCodes) {
    std::string text;
    EXPECT_EQ(run_binary("oracle --seeds 3", &text), 0) << text;
    EXPECT_NE(text.find("PASS eom_equivalence"), std::string::npos);
    EXPECT_EQ(run_binary("oracle --seeds 2 --inject-fault unitary", &text), 4);
    EXPECT_NE(text.find("unitary"), std::string::npos);
    EXPECT_EQ(run_binary("oracle --sites 4"), 2);
    EXPECT_EQ(run_binary("scan --config x.json --axis alpha --values ''"), 2);
    EXPECT_EQ(run_binary("run"), 2);
    EXPECT_EQ(run_binary("frobnicate"), 2);
    EXPECT_EQ(run_binary("--version", &text), 0);
    EXPECT_NE(text.find(kVersion), std::string::npos);
}

TEST(Binary, RunAndFit) {
    auto cfg = write_config("bin.json", kSmall);
    const auto csv = (dir() / "bin.csv").string();
    std::string text;
    ASSERT_EQ(run_binary("run --config " + cfg + " --output " + csv + " --threads 2", &text), 0) << text;
    EXPECT_EQ(run_binary("fit --input " + csv + " --column n --window 3,30", &text), 0) << text;
    EXPECT_NE(text.find("\"exponent\""), std::string::npos);
    EXPECT_EQ(run_binary("fit --input " + csv + " --column n --window 3", &text), 2);
}

TEST(Binary, WorkerEnvironmentVariable) {
    auto cfg = write_config("env.json", kSmall);
    const auto out_dir = (dir() / "env").string();
    const std::string cmd = "HYBCS_WORKERS=2 " + std::string(HYBCS_CLI_PATH) + " scan --config " + cfg +
                            " --axis gamma --values 0.04,0.08 --out-dir " + out_dir + " > /dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    ASSERT_TRUE(WIFEXITED(st));
    EXPECT_EQ(WEXITSTATUS(st), 0);
    EXPECT_TRUE(fs::exists(fs::path(out_dir) / "summary.csv"));
}
