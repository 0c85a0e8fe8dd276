#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out, err;
};

fs::path scratch() {
    static fs::path d = [] {
        fs::path p = fs::temp_directory_path() / ("optograv_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return d;
}

Run run(const std::string& args, const std::string& env = "") {
    const fs::path err = scratch() / "stderr.txt";
    const std::string cmd = env + " " + OPTOGRAV_CLI_PATH + " " + args + " 2>" + err.string();
    Run r;
    FILE* f = ::popen(cmd.c_str(), "r");
    if (!f) return r;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) r.out.append(buf, n);
    const int st = ::pclose(f);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    std::ifstream e(err);
    r.err.assign(std::istreambuf_iterator<char>(e), {});
    return r;
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> v;
    std::stringstream ss(s);
    for (std::string l; std::getline(ss, l);) v.push_back(l);
    return v;
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> v;
    std::stringstream ss(s);
    for (std::string t; std::getline(ss, t, ',');) v.push_back(t);
    if (!s.empty() && s.back() == ',') v.emplace_back();
    return v;
}

// CSV into column -> values, numeric fields only when asked
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::string at(std::size_t r, const std::string& col) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == col) return rows[r][i];
        ADD_FAILURE() << "no column " << col;
        return "";
    }
    double num(std::size_t r, const std::string& col) const { return std::stod(at(r, col)); }
};

Table table(const std::string& out) {
    Table t;
    auto ls = lines(out);
    if (ls.empty()) return t;
    t.header = split(ls[0]);
    for (std::size_t i = 1; i < ls.size(); ++i) t.rows.push_back(split(ls[i]));
    return t;
}

}  // namespace

TEST(Steady, DefaultsGiveOneRow) {
    auto r = run("steady");
    ASSERT_EQ(r.code, 0) << r.err;
    auto t = table(r.out);
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_EQ(t.header.front(), "schema_version");
    EXPECT_EQ(t.at(0, "schema_version"), "1");
    EXPECT_EQ(t.at(0, "stable"), "true");
    EXPECT_EQ(t.rows[0].size(), t.header.size());
}

TEST(Steady, BeyondCriticalIsAValidRecord) {
    auto r = run("steady --regime nonreciprocal_two_photon --eta 2 --G 1 --chi 5");
    ASSERT_EQ(r.code, 0) << r.err;
    auto t = table(r.out);
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_EQ(t.at(0, "stable"), "false");
    EXPECT_EQ(t.at(0, "adag_a"), "");
    EXPECT_EQ(t.at(0, "delta_g"), "");
    EXPECT_GT(t.num(0, "ev0_re"), 0.0);
}

TEST(Steady, EtaSweepMonotoneUncertainty) {
    auto r = run("steady --G 1 --sweep eta:1:1000:5:log");
    ASSERT_EQ(r.code, 0) << r.err;
    auto t = table(r.out);
    ASSERT_EQ(t.rows.size(), 5u);
    for (std::size_t i = 1; i < 5; ++i) EXPECT_LE(t.num(i, "delta_g"), t.num(i - 1, "delta_g"));
    EXPECT_DOUBLE_EQ(t.num(4, "eta"), 1000.0);
}

TEST(Steady, TwoAxesOuterFirst) {
    auto r = run("steady --G 1 --sweep eta:1:2:2 --sweep kappa:0.1:0.2:3:lin");
    ASSERT_EQ(r.code, 0) << r.err;
    auto t = table(r.out);
    ASSERT_EQ(t.rows.size(), 6u);
    EXPECT_DOUBLE_EQ(t.num(0, "eta"), 1.0);
    EXPECT_DOUBLE_EQ(t.num(2, "eta"), 1.0);
    EXPECT_DOUBLE_EQ(t.num(3, "eta"), 2.0);
    EXPECT_DOUBLE_EQ(t.num(1, "kappa"), 0.15);
}

TEST(Uncertainty, RatioPreset) {
    auto r = run("uncertainty --preset ratio --kappa 0.001");
    ASSERT_EQ(r.code, 0) << r.err;
    auto t = table(r.out);
    EXPECT_NEAR(t.num(0, "R"), 0.5, 0.02);
    EXPECT_NEAR(t.num(0, "R_closed_form"), 0.5, 1e-3);
    // the default point is outside the low-population regime
    auto d = table(run("uncertainty --preset ratio").out);
    EXPECT_NEAR(d.num(0, "R"), 0.6397, 1e-3);
    EXPECT_EQ(d.at(0, "R_closed_form"), "");
}

TEST(Uncertainty, TwoPhotonScalingPreset) {
    auto r = run("uncertainty --preset two_photon_scaling");
    ASSERT_EQ(r.code, 0) << r.err;
    auto t = table(r.out);
    EXPECT_NEAR(t.num(0, "delta_g_slope"), 0.5, 0.05);
    EXPECT_EQ(t.at(0, "points"), "4");
}

TEST(Uncertainty, ZeroGravityIsSolverFailure) {
    auto r = run("uncertainty --eta 2");
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("degenerate estimand"), std::string::npos);
    EXPECT_TRUE(r.out.empty());
}

TEST(Fig2, DefaultGrid) {
    auto r = run("fig2");
    ASSERT_EQ(r.code, 0) << r.err;
    auto t = table(r.out);
    ASSERT_EQ(t.rows.size(), 2500u);
    int above = 0;
    for (std::size_t i = 0; i < t.rows.size(); ++i) above += t.num(i, "R_w") > 1.0;
    EXPECT_GT(above, 1250);
    EXPECT_DOUBLE_EQ(t.num(0, "kappa"), 0.01);
    EXPECT_DOUBLE_EQ(t.num(0, "gamma_a"), 0.1);
}

TEST(Fig2, SmallKappaPoint) {
    auto r = run("fig2 --n-kappa 1 --n-gamma-a 1 --kappa-min 0.01 --kappa-max 0.01 --gamma-a-min 1 --gamma-a-max 1");
    ASSERT_EQ(r.code, 0) << r.err;
    auto t = table(r.out);
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_NEAR(t.num(0, "R_w") / (2 * std::sqrt(401.0)), 1.0, 0.1);
    EXPECT_EQ(t.at(0, "R_w_amplitude"), "");
}

TEST(Qfi, BothCouplingsWithOracle) {
    auto r = run("qfi --kappa 0.05 --oracle --dims 3,3");
    ASSERT_EQ(r.code, 0) << r.err;
    auto t = table(r.out);
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.at(0, "coupling"), "nonreciprocal");
    EXPECT_EQ(t.at(0, "closed_form_flagged"), "false");
    EXPECT_EQ(t.at(1, "closed_form_flagged"), "true");
    EXPECT_GT(t.num(0, "oracle_qfi"), 0.0);
}

TEST(Validate, WeakDrivePasses) {
    auto r = run("validate --sweep eta:0.02:0.1:2");
    ASSERT_EQ(r.code, 0) << r.err;
    auto t = table(r.out);
    EXPECT_EQ(t.rows.size(), 20u);
    for (std::size_t i = 0; i < t.rows.size(); ++i) EXPECT_EQ(t.at(i, "pass"), "true") << t.at(i, "observable");
}

TEST(Validate, BreachIsNonzero) {
    auto r = run("validate --regime nonreciprocal_single --eta 2 --dims 4,4");
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("tolerance breached"), std::string::npos);
    auto t = table(r.out);
    EXPECT_EQ(t.rows.size(), 5u);
}

TEST(Config, FileWithFlagOverride) {
    const fs::path cfg = scratch() / "run.cfg";
    {
        std::ofstream f(cfg);
        f << "# low population point\nkappa = 0.001\neta = 3\nG = 1\nregime = reciprocal_single\n";
    }
    auto r = run("uncertainty --config " + cfg.string() + " --eta 2");
    ASSERT_EQ(r.code, 0) << r.err;
    auto t = table(r.out);
    EXPECT_EQ(t.at(0, "regime"), "reciprocal_single");
    EXPECT_DOUBLE_EQ(t.num(0, "eta"), 2.0);
    EXPECT_DOUBLE_EQ(t.num(0, "kappa"), 0.001);
    EXPECT_DOUBLE_EQ(t.num(0, "lambda"), 0.0);
}

TEST(Config, Errors) {
    EXPECT_EQ(run("steady --bogus 1").code, 2);
    EXPECT_EQ(run("steady --sweep nope:1:2:3").code, 2);
    EXPECT_EQ(run("steady --sweep eta:1:2:0").code, 2);
    EXPECT_EQ(run("steady --regime sideways").code, 2);
    EXPECT_EQ(run("steady --g 1 --G 1").code, 2);
    EXPECT_EQ(run("steady --kappa -1").code, 2);
    EXPECT_EQ(run("steady --out /nonexistent/dir/x.csv").code, 2);
    EXPECT_EQ(run("steady --format xml").code, 2);
    EXPECT_EQ(run("").code, 2);
    const fs::path cfg = scratch() / "bad.cfg";
    {
        std::ofstream f(cfg);
        f << "not_a_key = 3\n";
    }
    EXPECT_EQ(run("steady --config " + cfg.string()).code, 2);
}

TEST(Output, JsonLines) {
    auto r = run("steady --G 1 --eta 2 --format jsonl --sweep chi:0:0.5:3:lin --regime nonreciprocal_two_photon");
    ASSERT_EQ(r.code, 0) << r.err;
    auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 3u);
    for (const auto& l : ls) {
        EXPECT_EQ(l.rfind("{\"schema_version\":1,", 0), 0u);
        EXPECT_EQ(l.back(), '}');
    }
}

TEST(Output, FileAndDeterminism) {
    const fs::path a = scratch() / "a.csv", b = scratch() / "b.csv";
    ASSERT_EQ(run("steady --G 1 --sweep eta:1:100:7:log --jobs 1 --out " + a.string()).code, 0);
    ASSERT_EQ(run("steady --G 1 --sweep eta:1:100:7:log --jobs 3 --out " + b.string()).code, 0);
    auto slurp = [](const fs::path& p) {
        std::ifstream f(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(f), {});
    };
    const std::string sa = slurp(a);
    EXPECT_EQ(lines(sa).size(), 8u);
    EXPECT_EQ(sa, slurp(b));
    EXPECT_EQ(sa.find('\r'), std::string::npos);
}

TEST(Output, RoundTripDigits) {
    auto t = table(run("steady --G 1 --eta 2").out);
    const std::string s = t.at(0, "alpha_im");
    EXPECT_EQ(std::to_string(std::stod(s)).size() > 0, true);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", std::stod(s));
    EXPECT_EQ(s, buf);
}

TEST(Logging, EnvironmentLevel) {
    auto quiet = run("validate --eta 0.05");
    auto loud = run("validate --eta 0.05", "OPTOGRAV_LOG=info");
    EXPECT_EQ(quiet.out, loud.out);
    EXPECT_EQ(quiet.err.find("[info]"), std::string::npos);
    EXPECT_NE(loud.err.find("[info]"), std::string::npos);
}
