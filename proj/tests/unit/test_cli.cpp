#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Result {
    int status = -1;
    std::string out;
};

Result scf_cli(const std::string& args)
{
    const std::string cmd = std::string(SCF_CLI_PATH) + " " + args + " 2>/dev/null";
    Result r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p)
        return r;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), p))
        r.out += buf.data();
    const int st = pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string fixture(const char* name) { return std::string(SCF_FIXTURE_DIR) + "/" + name + ".toml"; }

std::string value_of(const std::string& csv, const std::string& key)
{
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind(key + ",", 0) == 0)
            return line.substr(key.size() + 1);
    return "";
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("scf_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

} // namespace

TEST(Cli, ClassifyEx1)
{
    const auto r = scf_cli("classify --config " + fixture("ex1"));
    EXPECT_EQ(r.status, 0);
    EXPECT_EQ(value_of(r.out, "verdict"), "FailOmega0");
    EXPECT_EQ(value_of(r.out, "region_of_input.region"), "Omega0");
}

TEST(Cli, ClassifyEx2Json)
{
    const auto r = scf_cli("classify --config " + fixture("ex2") + " --format json-doc");
    ASSERT_EQ(r.status, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["verdict"], "FailNonpositiveMu");
    EXPECT_NEAR(j["mu_r"].get<double>(), -0.2924, 1e-3);
    EXPECT_EQ(j["r_star"], "none");
    EXPECT_TRUE(j["vbar"][0].is_null());
}

TEST(Cli, ClassifyEx3WithInitialCondition)
{
    const auto r = scf_cli("classify --config " + fixture("ex3") + " --s0 0.3,0.01,1 --x0 0.31");
    ASSERT_EQ(r.status, 0);
    EXPECT_EQ(value_of(r.out, "verdict"), "ConvergesToPeriodic");
    EXPECT_NEAR(std::stod(value_of(r.out, "x_threshold")), 0.2981, 3e-3);
    EXPECT_EQ(value_of(r.out, "n_rho"), "5");
}

TEST(Cli, ExitCodes)
{
    EXPECT_EQ(scf_cli("classify --config " + fixture("ex3") + " --set r=1.2").status, 2);
    EXPECT_EQ(scf_cli("classify --config /nonexistent.toml").status, 2);
    EXPECT_EQ(scf_cli("classify --config " + fixture("ex3") + " --set bogus=1").status, 2);
    EXPECT_EQ(scf_cli("classify --config " + fixture("ex3") + " --s0 1,2").status, 2);
    EXPECT_EQ(scf_cli("classify").status, 2);
    EXPECT_EQ(scf_cli("mu-sweep --config " + fixture("ex1")).status, 3);
    EXPECT_EQ(scf_cli("basin --config " + fixture("ex2")).status, 3);
    EXPECT_EQ(scf_cli("frobnicate").status, 2);
}

TEST(Cli, OverridesApply)
{
    const auto r = scf_cli("classify --config " + fixture("ex3") + " --set D=0 --format csv");
    ASSERT_EQ(r.status, 0);
    EXPECT_EQ(value_of(r.out, "rho_equals_sigma"), "true");
}

TEST(Cli, SimulateWritesCsvs)
{
    const fs::path dir = scratch("simulate");
    for (const char* x0 : {"0.29", "0.31"}) {
        const auto r = scf_cli("simulate --config " + fixture("ex3") + " --s0 0.3,0.01,1 --x0 " + x0 + " --out " +
                               (dir / x0).string());
        ASSERT_EQ(r.status, 0);
        EXPECT_EQ(value_of(r.out, "outcome"), std::string(x0) == "0.29" ? "Washout" : "ConvergedToPeriodic");
        const std::string traj = slurp(dir / x0 / "trajectory.csv");
        EXPECT_EQ(traj.substr(0, traj.find('\n')), "t,s1,s2,s3,x,phase");
        const std::string proj = slurp(dir / x0 / "projection.csv");
        EXPECT_EQ(proj.substr(0, proj.find('\n')), "t,s1,s2,phase");
        EXPECT_TRUE(fs::exists(dir / x0 / "cycles.csv"));
    }
    EXPECT_LE(std::stoi(value_of(scf_cli("simulate --config " + fixture("ex3") +
                                         " --s0 0.3,0.01,1 --x0 0.29 --out " + (dir / "again").string())
                                     .out,
                                 "impulses")),
              4);
    const auto r1 = scf_cli("simulate --config " + fixture("ex1") + " --s0 0.6,0.7,0.8 --x0 0.5 --out " +
                            (dir / "ex1").string());
    EXPECT_EQ(value_of(r1.out, "outcome"), "Washout");
    EXPECT_EQ(scf_cli("simulate --config " + fixture("ex3") + " --out " + dir.string()).status, 2);
}

TEST(Cli, MuSweep)
{
    const auto r = scf_cli("mu-sweep --config " + fixture("ex3") + " --r-grid 11");
    ASSERT_EQ(r.status, 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "r,mu,sign,kind");
    std::getline(in, line);
    EXPECT_EQ(line, "0,0,0,grid");
    int changes = 0;
    std::string prev = "0";
    bool saw_rstar = false;
    while (std::getline(in, line)) {
        if (line.find(",r_star") != std::string::npos) {
            saw_rstar = true;
            continue;
        }
        const std::string sign = line.substr(line.find(',', line.find(',') + 1) + 1, 1);
        changes += (sign == "+") != (prev == "+");
        prev = sign;
    }
    EXPECT_EQ(changes, 1);
    EXPECT_TRUE(saw_rstar);

    const auto r2 = scf_cli("mu-sweep --config " + fixture("ex2") + " --r-grid 11");
    EXPECT_NE(r2.out.find("\n0.7,-0.29"), std::string::npos);
}

TEST(Cli, FindRStar)
{
    EXPECT_EQ(value_of(scf_cli("find-rstar --config " + fixture("ex2")).out, "r_star"), "none");
    const double r = std::stod(value_of(scf_cli("find-rstar --config " + fixture("ex3")).out, "r_star"));
    EXPECT_LT(r, 0.3);
}

TEST(Cli, Basin)
{
    const auto single = scf_cli("basin --config " + fixture("ex3") + " --s0 0.3,0.01,1");
    ASSERT_EQ(single.status, 0);
    EXPECT_NE(single.out.find("0.3,0.01,1,Omega1,0.298"), std::string::npos);

    const auto grid = scf_cli("basin --config " + fixture("ex3") + " --grid 4 --jobs 3");
    ASSERT_EQ(grid.status, 0);
    EXPECT_EQ(grid.out, scf_cli("basin --config " + fixture("ex3") + " --grid 4 --jobs 1").out);
    // Points outside Omega1 carry no threshold.
    EXPECT_NE(grid.out.find("BoundaryOmega1,,"), std::string::npos);
    // s_in lies on the even grid with X = -I(s_in) < 0.
    const auto pos = grid.out.find("0.5,0.1,0.5,Omega1,-");
    EXPECT_NE(pos, std::string::npos);
}

TEST(Cli, Levelsets)
{
    const auto r = scf_cli("levelsets --config " + fixture("ex3") + " --grid 3");
    ASSERT_EQ(r.status, 0);
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "s1,s2,F");
    EXPECT_NE(r.out.find("0.5,0.1,0.13999999999999999"), std::string::npos);
}

TEST(Cli, ExamplesAreDeterministic)
{
    const fs::path a = scratch("examples_a"), b = scratch("examples_b");
    const auto ra = scf_cli("examples --out " + a.string() + " --grid 6 --r-grid 21");
    const auto rb = scf_cli("examples --out " + b.string() + " --grid 6 --r-grid 21 --jobs 2");
    ASSERT_EQ(ra.status, 0);
    ASSERT_EQ(rb.status, 0);
    EXPECT_EQ(ra.out, rb.out);
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file())
            continue;
        ++files;
        EXPECT_EQ(slurp(e.path()), slurp(b / fs::relative(e.path(), a))) << e.path();
    }
    EXPECT_GT(files, 15u);

    const std::string summary = slurp(a / "summary.csv");
    EXPECT_NE(summary.find("ex1.vbar,"), std::string::npos);
    EXPECT_NE(summary.find(",flagged_misprint\n"), std::string::npos);
    EXPECT_EQ(summary.find(",mismatch\n"), std::string::npos);
    EXPECT_NE(summary.find("ex3.x_threshold_sum_of_printed_terms"), std::string::npos);
}
