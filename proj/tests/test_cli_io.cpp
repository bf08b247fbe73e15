#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

#include "loblab/config.hpp"
#include "loblab/io.hpp"

using namespace loblab;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int status = -1;
    std::string out;
};

// Runs the CLI with stdout captured; stderr is discarded.
RunResult run_cli(const std::string& args) {
    const char* exe = std::getenv("LOBLAB_CLI");
    REQUIRE_MESSAGE(exe != nullptr, "LOBLAB_CLI must name the loblab executable");
    const std::string cmd = std::string("\"") + exe + "\" " + args + " 2>/dev/null";
    RunResult r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    std::size_t got = 0;
    while ((got = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, got);
    const int raw = pclose(p);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "loblab_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    f << text;
}

std::string read_file(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

std::string config_error(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("config parsing") {
    const RunConfig d = parse_config("[params]\n");
    CHECK(d.params.a == 1.5);
    CHECK(d.params.b == 1.5);
    CHECK(d.sim.n == 10000);
    const RunConfig c = parse_config(
        "# comment\n[params]\na = 2.0   # trailing\nb=1.5\n\n[sim]\nn = 400\npaths = 3\nseed = 17\n"
        "[output]\ncsv = out.csv\n");
    CHECK(c.params.a == 2.0);
    CHECK(c.sim.n == 400);
    CHECK(c.sim.paths == 3);
    CHECK(c.sim.seed == 17);
    CHECK(c.output.csv == "out.csv");

    CHECK(config_error("[params]\na = 2\nb = 2\n").find("a + b > a*b") != std::string::npos);
    CHECK(config_error("[params]\na = 1.5\na = 1.6\n").find("line 3: duplicate key 'a'") != std::string::npos);
    CHECK(config_error("[params]\nzeta = 1\n").find("line 2: unknown key 'zeta'") != std::string::npos);
    CHECK(config_error("[nowhere]\n").find("line 1") != std::string::npos);
    CHECK(config_error("a = 1\n").find("line 1") != std::string::npos);
    CHECK(config_error("[sim]\nn = many\n").find("line 2") != std::string::npos);
    CHECK(config_error("[sim]\nn 5\n").find("line 2") != std::string::npos);
    CHECK(config_error("[sim]\nn = -5\n") != "");
    CHECK_THROWS_AS(load_config(scratch("missing.conf").string() + ".none"), std::exception);
}

TEST_CASE("numbers round trip through text") {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 5e-324})
        CHECK(std::strtod(format_double(x).c_str(), nullptr) == x);
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    std::ostringstream os;
    write_csv_row(os, std::vector<double>{1.0, 0.5});
    CHECK(os.str() == "1,0.5\n");
}

TEST_CASE("constants subcommand") {
    const RunResult r = run_cli("constants");
    REQUIRE(r.status == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(std::fabs(j.at("kappa_L").get<double>() - 0.75) < 1e-14);
    CHECK(std::fabs(j.at("rho").get<double>() + 4.0 / 7.0) < 1e-14);
}

TEST_CASE("eval subcommand") {
    const RunResult r = run_cli("eval --quantity half_stable_identity --alpha 1");
    REQUIRE(r.status == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("quantity") == "half_stable_identity");
    CHECK(std::fabs(j.at("value")[0].get<double>() - 1.0) < 1e-4);
    CHECK(std::fabs(j.at("value")[1].get<double>() + 1.0) < 1e-4);
    CHECK(j.at("reference")[1].get<double>() == -1.0);
    const RunResult e = run_cli("eval --quantity exit_probs");
    REQUIRE(e.status == 0);
    CHECK(std::fabs(nlohmann::json::parse(e.out).at("value")[0].get<double>() - 0.5) < 1e-12);
}

TEST_CASE("exit codes") {
    CHECK(run_cli("").status == 2);
    CHECK(run_cli("frobnicate").status == 2);
    CHECK(run_cli("eval --quantity no_such_thing").status == 2);
    CHECK(run_cli("eval --quantity exit_probs --arg nonsense").status == 2);
    CHECK(run_cli("validate --check no_such_suite").status == 2);
    const fs::path bad = scratch("bad.conf");
    write_file(bad, "[params]\na = 2\nb = 2\n");
    CHECK(run_cli("constants --config " + bad.string()).status == 2);
    CHECK(run_cli("constants --config " + scratch("absent.conf").string()).status == 2);
    CHECK(run_cli("constants --out /nonexistent-dir/x.json").status == 1);
    CHECK(run_cli("--help").status == 0);
}

TEST_CASE("simulate-lob output is reproducible") {
    const fs::path conf = scratch("lob.conf");
    write_file(conf, "[sim]\nn = 100\nhorizon = 0.2\npaths = 2\ngrid_step = 0.05\nseed = 3\n");
    const fs::path a = scratch("a.csv"), b = scratch("b.csv");
    REQUIRE(run_cli("simulate-lob --config " + conf.string() + " --out " + a.string()).status == 0);
    REQUIRE(run_cli("simulate-lob --config " + conf.string() + " --out " + b.string()).status == 0);
    const std::string text = read_file(a);
    CHECK(text == read_file(b));
    CHECK(text.find('\r') == std::string::npos);
    CHECK(text.rfind("path,t,U,V,W,X,Y,Z,G,H", 0) == 0);
    int lines = 0;
    for (char ch : text) lines += ch == '\n';
    CHECK(lines == 1 + 2 * 5);
    CHECK(text.back() == '\n');
    // The seed flag overrides the config.
    const RunResult other = run_cli("simulate-lob --config " + conf.string() + " --seed 4");
    REQUIRE(other.status == 0);
    CHECK(other.out != text);

    const RunResult ren = run_cli("simulate-lob --mode renewals --config " + conf.string());
    REQUIRE(ren.status == 0);
    CHECK(ren.out.rfind("direction,s_hat", 0) == 0);
}

TEST_CASE("simulate-limit output") {
    const fs::path conf = scratch("limit.conf");
    write_file(conf, "[sim]\npaths = 3\nhorizon = 1\ngrid_step = 0.001\nlimit_dt = 0.001\nseed = 8\n");
    const RunResult r = run_cli("simulate-limit --config " + conf.string());
    REQUIRE(r.status == 0);
    CHECK(r.out.rfind("direction,s_star,g_at_renewal\n", 0) == 0);
    const RunResult p = run_cli("simulate-limit --mode path --config " + conf.string());
    REQUIRE(p.status == 0);
    CHECK(p.out.rfind("t,G,V,Y\n", 0) == 0);
    const RunResult e = run_cli("simulate-limit --mode excursions --config " + conf.string());
    REQUIRE(e.status == 0);
    CHECK(e.out.rfind("left,right,sign,length\n", 0) == 0);
}

TEST_CASE("validate subcommand") {
    const fs::path out = scratch("report.json");
    const RunResult r = run_cli("validate --check occupation --out " + out.string());
    CHECK(r.status == 0);
    CHECK(r.out.find("occupation.") != std::string::npos);
    const auto j = nlohmann::json::parse(read_file(out));
    REQUIRE(j.is_array());
    REQUIRE_FALSE(j.empty());
    CHECK(j[0].contains("name"));
    CHECK(j[0].contains("pass"));
}
