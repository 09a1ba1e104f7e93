#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "cli.hpp"

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args)
{
    std::ostringstream out;
    std::ostringstream err;
    const int code = hamext::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

struct CatalogEnv {
    explicit CatalogEnv(const std::string &path) { setenv("HAMEXT_CATALOG", path.c_str(), 1); }
    CatalogEnv(const CatalogEnv &) = delete;
    CatalogEnv &operator=(const CatalogEnv &) = delete;
    ~CatalogEnv() { setenv("HAMEXT_CATALOG", HAMEXT_TEST_CATALOG, 1); }
};

std::vector<std::string> split(const std::string &line, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, sep)) {
        out.push_back(cell);
    }
    return out;
}

nlohmann::json read_json(const std::string &path)
{
    std::ifstream in(path);
    return nlohmann::json::parse(in);
}

const bool env_ready = [] {
    setenv("HAMEXT_CATALOG", HAMEXT_TEST_CATALOG, 1);
    return true;
}();

} // namespace

TEST_CASE("list and show")
{
    REQUIRE(env_ready);
    const auto r = run({"list"});
    CHECK(r.code == 0);
    CHECK(r.out.find("calogero3") != std::string::npos);
    CHECK(r.out.find("S9") != std::string::npos);
    CHECK(run({"show", "E2"}).code == 0);
}

TEST_CASE("exit codes")
{
    CHECK(run({}).code == hamext::cli::usage);
    CHECK(run({"frobnicate"}).code == hamext::cli::usage);
    CHECK(run({"show", "E99"}).code == hamext::cli::unsupported);
    CHECK(run({"verify", "E99", "-m", "2"}).code == hamext::cli::unsupported);
    // a3 - m L0 = 0 cannot hold with a3 = 1, m = 2, L0 = 1
    CHECK(run({"extend", "E1", "-m", "2", "--constraint", "i", "--params", "a3=1", "--L0", "1"}).code ==
          hamext::cli::failed);
    CHECK(run({"extend", "E1", "-m", "2", "--params", "bogus=1"}).code == hamext::cli::usage);
    CHECK(run({"integral", "E1", "-m", "2", "--json", "/nonexistent-dir/x.json"}).code == hamext::cli::io_error);
}

TEST_CASE("HAMEXT_CATALOG overrides the catalog path")
{
    {
        const CatalogEnv env("/nonexistent/catalog.ham");
        CHECK(run({"list"}).code == hamext::cli::io_error);
    }
    const std::string path = "test_cli_catalog.ham";
    {
        std::ofstream f(path);
        f << "[chart P]\nfamily = euclidean\ncoords = x, y\n\n"
             "[system only]\nchart = P\ntitle = lone oscillator\nparams = a3\npotential = a3*(x^2 + y^2)\n"
             "constraint i = a3 - m*L0 = 0 => x; y\n";
    }
    const CatalogEnv env(path);
    const auto r = run({"list"});
    CHECK(r.code == 0);
    CHECK(r.out.find("only") != std::string::npos);
    CHECK(r.out.find("calogero3") == std::string::npos);
}

TEST_CASE("integral JSON follows the MomentumPolynomial schema")
{
    const std::string path = "test_cli_integral.json";
    REQUIRE(run({"integral", "E1", "-m", "2", "--json", path}).code == 0);
    const auto j = read_json(path);
    REQUIRE(j.contains("chart"));
    REQUIRE(j.contains("vars"));
    REQUIRE(j.contains("terms"));
    const std::size_t momenta = j["vars"].size() / 2;
    CHECK(momenta == 3);
    CHECK_FALSE(j["terms"].empty());
    for (const auto &t : j["terms"]) {
        REQUIRE(t["powers"].is_array());
        CHECK(t["powers"].size() == momenta);
        CHECK(t["coeff"].is_string());
    }
}

TEST_CASE("closed form and iteration print the same integral")
{
    const auto a = run({"integral", "E3", "-m", "3", "--params", "a3=3", "--closed-form"});
    const auto b = run({"integral", "E3", "-m", "3", "--params", "a3=3", "--iterative"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find("(2/9)*g1*p_x*u^3") != std::string::npos);
}

TEST_CASE("verify JSON follows the VerificationReport schema")
{
    const std::string path = "test_cli_report.json";
    const auto r = run({"verify", "E3", "-m", "2", "--points", "20", "-T", "1", "--json", path});
    CHECK(r.code == 0);
    const auto j = read_json(path);
    for (const char *k : {"target", "seed", "bracket", "drift", "rank", "verdict"}) {
        CHECK_MESSAGE(j.contains(k), k);
    }
    CHECK(j["target"] == "E3");
    CHECK(j["rank"] == 5);
    CHECK(j["verdict"] == "superintegrable-certified");
}

TEST_CASE("simulate writes t, q, p and the integrals")
{
    const auto r = run({"simulate", "E3", "-m", "2", "-T", "0.5"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string header;
    std::getline(in, header);
    const auto cols = split(header, ',');
    const std::vector<std::string> expected = {"t", "u", "x", "y", "p_u", "p_x", "p_y", "H", "L"};
    REQUIRE(cols.size() > expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(cols[i] == expected[i]);
    }
    CHECK(cols.back() == "U^2G");
    std::string line;
    int rows = 0;
    double last_t = -1.0;
    while (std::getline(in, line)) {
        const auto cells = split(line, ',');
        CHECK(cells.size() == cols.size());
        const double t = std::stod(cells.front());
        CHECK(t > last_t);
        last_t = t;
        ++rows;
    }
    CHECK(rows > 2);
    CHECK(last_t == doctest::Approx(0.5));
}

TEST_CASE("simulate refuses complex systems")
{
    CHECK(run({"simulate", "S5", "-m", "2", "-T", "0.5"}).code == hamext::cli::unsupported);
    // E4 has no admissible parameters at all
    CHECK(run({"simulate", "E4", "-m", "2", "-T", "0.5"}).code == hamext::cli::failed);
}
