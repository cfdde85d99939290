#include "doctest.h"

#include "cli.hpp"
#include "lambda_thermo/serialize.hpp"
#include "lambda_thermo/spectra.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

using namespace lambda_thermo;
using lambda_thermo::cli::parse_grid;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

Json run_json(std::vector<std::string> args)
{
    const Run r = run(std::move(args));
    REQUIRE(r.code == 0);
    return Json::parse(r.out);
}

std::vector<std::string> lines(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

} // namespace

TEST_CASE("grid syntax")
{
    auto g = parse_grid("0:2:0.01");
    CHECK(g.size() == 200);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == doctest::Approx(1.99).epsilon(1e-15));

    // 10·0.1 lands a hair past 1 in floating point; the guard still excludes it
    CHECK(parse_grid("0:1:0.1").size() == 10);
    CHECK(parse_grid("0.1:0.9:0.1").size() == 8);
    CHECK(parse_grid("1:0:-0.25") == std::vector<double>{1.0, 0.75, 0.5, 0.25});
    CHECK(parse_grid("0.2, 0.5,0.7") == std::vector<double>{0.2, 0.5, 0.7});
    CHECK(parse_grid("+3") == std::vector<double>{3.0});

    CHECK_THROWS_AS(parse_grid("0:1:0"), DomainError);
    CHECK_THROWS_AS(parse_grid("0:0:1"), DomainError);
    CHECK_THROWS_AS(parse_grid("1:0:1"), DomainError);
    CHECK_THROWS_AS(parse_grid("0:1"), DomainError);
    CHECK_THROWS_AS(parse_grid("abc"), DomainError);
    CHECK_THROWS_AS(parse_grid("0.3x"), DomainError);
    CHECK_THROWS_AS(parse_grid("inf"), DomainError);
    CHECK_THROWS_AS(parse_grid(""), DomainError);
    CHECK_THROWS_AS(parse_grid("0:1:1e-9", 1000), cli::GridCapExceeded);
    CHECK_THROWS_AS(parse_grid("1,2,3", 2), cli::GridCapExceeded);
}

TEST_CASE("exit codes")
{
    Run r = run({"frobnicate"});
    CHECK(r.code == cli::kExitUsage);
    CHECK(r.err.find("pressure") != std::string::npos);

    CHECK(run({}).code == cli::kExitUsage);
    CHECK(run({"classify", "--lambda", "0.3"}).code == cli::kExitUsage);
    CHECK(run({"classify", "--lambda", "1.5", "--t", "1"}).code == cli::kExitUsage);
    CHECK(run({"classify", "--lambda", "0.3", "--t", "zz"}).code == cli::kExitUsage);
    CHECK(run({"simulate", "--lambda", "0.4", "--mode", "teleport"}).code == cli::kExitUsage);
    CHECK(run({"simulate", "--lambda", "0.4", "--t", "2", "--mode", "interval"}).code == cli::kExitUsage);
    CHECK(run({"invariant", "--lambda", "0.6", "--t", "1"}).code == cli::kExitUsage);
    CHECK(run({"conformal", "--lambda", "0.3", "--t", "1", "--p", "-5"}).code == cli::kExitUsage);
    CHECK(run({"verify", "--suite", "smoke"}).code == cli::kExitUsage);

    r = run({"classify", "--lambda", "0.1:0.9:0.01", "--t", "0:3:0.01", "--max-points", "1000"});
    CHECK(r.code == cli::kExitUsage);
    CHECK(r.err.find("max-points") != std::string::npos);

    r = run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("start:stop:step") != std::string::npos);
    CHECK(run({"pressure", "--help"}).code == 0);
}

TEST_CASE("classify: null-recurrent boundary point")
{
    const Json env = run_json({"classify", "--lambda", "0.25", "--t", "0.5"});
    CHECK(env["schema_version"] == "1");
    CHECK(env["command"] == "classify");
    CHECK(env["library_version"] == kLibraryVersion);
    CHECK(env["spec"]["lambda"] == "0.25");
    CHECK(env["warnings"].empty());
    const Json& row = env["results"]["rows"][0];
    CHECK(row["class"] == "null_recurrent");
    CHECK(row["lambda_t"].get<double>() == 0.5);
    CHECK(row["certificates"]["rho_integral"]["divergent"] == true);
    CHECK(row["certificates"]["drift"]["sign"] == 0);
}

TEST_CASE("classify: sweep is row-major and matches the three regimes")
{
    const Json env = run_json({"classify", "--lambda", "0.2,0.5,0.8", "--t", "0.5,1,2", "--threads", "3"});
    const Json& rows = env["results"]["rows"];
    REQUIRE(rows.size() == 9);
    for (std::size_t i = 0; i < 9; ++i) {
        const double lambda = rows[i]["lambda"], t = rows[i]["t"];
        CHECK(lambda == std::vector<double>{0.2, 0.5, 0.8}[i / 3]);
        CHECK(t == std::vector<double>{0.5, 1.0, 2.0}[i % 3]);
        const double a = std::pow(lambda, t);
        const std::string expected =
            std::abs(a - 0.5) < 1e-12 ? "null_recurrent" : (a < 0.5 ? "positive_recurrent" : "transient");
        CHECK(rows[i]["class"] == expected);
        CHECK(rows[i]["certificates"]["rho_integral"].is_null() == (a > 0.5 + 1e-12));
    }
}

TEST_CASE("JSON round-trip and determinism")
{
    const std::vector<std::string> args = {"simulate", "--lambda", "0.4", "--steps", "2000", "--walkers", "70",
                                           "--seed", "11"};
    const Run a = run(args);
    const Run b = run(args);
    REQUIRE(a.code == 0);
    Json ja = Json::parse(a.out), jb = Json::parse(b.out);
    CHECK(Json::parse(ja.dump()) == ja);
    ja.erase("timestamp");
    jb.erase("timestamp");
    CHECK(ja.dump() == jb.dump());
    CHECK(ja["results"]["n_walkers"] == 70);
    CHECK(ja["results"]["total_visits"] == 140000);

    // a different seed changes the payload
    auto args2 = args;
    args2.back() = "12";
    Json jc = Json::parse(run(args2).out);
    jc.erase("timestamp");
    CHECK(jc.dump() != ja.dump());

    // thread count does not
    auto args3 = args;
    args3.insert(args3.end(), {"--threads", "1"});
    Json jd = Json::parse(run(args3).out);
    jd.erase("timestamp");
    jd["spec"] = ja["spec"];
    CHECK(jd.dump() == ja.dump());
}

TEST_CASE("floats survive serialization exactly")
{
    for (double x : {0.1, 1.0 / 3.0, std::log(2.0), 1e-300, 6.02214076e23, -0.0}) {
        CHECK(std::stod(format_double(x)) == x);
        CHECK(Json::parse(number(x).dump()).get<double>() == x);
    }
    CHECK(number(INFINITY) == "inf");
    CHECK(number(-INFINITY) == "-inf");
    CHECK(number(NAN) == "nan");
    CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("pressure: CSV projection")
{
    const Run r = run({"pressure", "--lambda", "0.3", "--t-grid", "0:2:0.01", "--k-schedule", "8,64", "--format",
                       "csv"});
    REQUIRE(r.code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 201);
    CHECK(rows[0] == "lambda,t,P_closed,x_K8,x_K64,envelope_ok");
    CHECK(rows[1].rfind("0.29999999999999999,0,", 0) == 0);
    // P_closed column equals the library value to the last digit
    std::istringstream cells(rows[101]);
    std::vector<std::string> c;
    for (std::string cell; std::getline(cells, cell, ',');) c.push_back(cell);
    CHECK(std::stod(c[1]) == 1.0);
    CHECK(std::stod(c[2]) == pressure_closed(0.3, 1.0));
    CHECK(std::stod(c[3]) < std::stod(c[4]));
    CHECK(std::stod(c[4]) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pressure: phase-transition locus")
{
    const Json env = run_json({"pressure", "--lambda", "0.3:0.71:0.1", "--t", "1", "--k-schedule", "8",
                               "--phase-transition"});
    const Json& pt = env["results"]["phase_transitions"];
    REQUIRE(pt.size() == 5);
    for (const auto& p : pt) {
        const double lambda = p["lambda"];
        CHECK(p["t0"].get<double>() == doctest::Approx(-std::log(2.0) / std::log(lambda)).epsilon(1e-15));
    }
}

TEST_CASE("conformal and invariant payloads")
{
    Json env = run_json({"conformal", "--lambda", "0.3", "--t", "1"});
    CHECK(env["results"]["law"]["law"] == "geometric");
    CHECK(env["results"]["residual"].get<double>() < 1e-12);
    CHECK(env["results"]["masses"].size() == 20);

    env = run_json({"conformal", "--lambda", "0.3", "--t", "1", "--p", "0.5"});
    CHECK(env["results"]["law"]["law"] == "two-term");
    CHECK(env["results"]["p"].get<double>() == 0.5);

    env = run_json({"invariant", "--lambda", "0.3", "--t", "1", "--j-max", "5"});
    const Json& res = env["results"];
    CHECK(res["masses"].size() == 5);
    CHECK(res["masses"][0]["mu"].get<double>() == doctest::Approx(4.0 / 7.0).epsilon(1e-14));
    CHECK(res["variational"]["sum"].get<double>() == doctest::Approx(res["variational"]["log_psi"].get<double>()));
}

TEST_CASE("dimension: JSON and CSV")
{
    Json env = run_json({"dimension", "--lambda", "0.3,0.7", "--truncated", "16"});
    const Json& rows = env["results"]["rows"];
    CHECK(rows[0]["dim_escaping"].get<double>() == doctest::Approx(std::log(4.0) / -std::log(0.21)).epsilon(1e-15));
    CHECK(rows[1]["dim_hyperbolic"] == rows[0]["dim_escaping"]);
    CHECK(rows[1]["dim_truncated"]["16"].get<double>() < rows[1]["dim_hyperbolic"].get<double>());

    const Run r = run({"dimension", "--lambda", "0.3", "--method", "root-find", "--format", "csv"});
    REQUIRE(r.code == 0);
    CHECK(lines(r.out)[0] == "lambda,dim_escaping,dim_hyperbolic,t1,method");
    CHECK(lines(r.out)[1].find("root_find") != std::string::npos);
}

TEST_CASE("partition: exact and float")
{
    Json env = run_json({"partition", "--lambda-t", "1/2", "--k", "1:4:1"});
    const Json& rows = env["results"]["rows"];
    REQUIRE(rows.size() == 3);
    CHECK(rows[0]["value"] == "1/2");
    CHECK(rows[1]["value"] == "3/8");
    CHECK(rows[2]["value"] == "5/16");

    env = run_json({"partition", "--lambda", "0.25", "--t", "0.5", "--k", "3"});
    CHECK(env["results"]["rows"][0]["value"].get<double>() == doctest::Approx(5.0 / 16.0).epsilon(1e-13));

    env = run_json({"partition", "--kind", "null-column", "--k", "2"});
    CHECK(env["results"]["rows"][0]["column"] == Json::array({"3/8", "3/16", "1/16", "0/1"}));
    CHECK(env["results"]["rows"][0]["closed_form_match"] == true);

    env = run_json({"partition", "--kind", "series", "--lambda", "0.25", "--t", "0.5", "--n", "400"});
    CHECK(env["results"]["verdict"] == "divergent");
    CHECK(env["results"]["N"] == 400);

    CHECK(run({"partition", "--kind", "column-sum", "--lambda", "0.25", "--t", "0.5"}).code == cli::kExitUsage);
}

TEST_CASE("--output writes the file")
{
    const std::string path = "test_cli_output.json";
    const Run r = run({"dimension", "--lambda", "0.5", "-o", path});
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    std::ifstream in(path);
    const Json env = Json::parse(in);
    CHECK(env["results"]["rows"][0]["dim_escaping"].get<double>() == doctest::Approx(1.0));
    std::remove(path.c_str());
    CHECK(run({"dimension", "--lambda", "0.5", "-o", "/nonexistent/dir/x.json"}).code == cli::kExitUsage);
}

TEST_CASE("verify: single criterion")
{
    const Run r = run({"verify", "--suite", "acceptance", "--criterion", "3"});
    CHECK(r.code == 0);
    const Json env = Json::parse(r.out);
    CHECK(env["results"]["all_passed"] == true);
    CHECK(env["results"]["criteria"][0]["id"] == 3);
    CHECK(r.err.find("PASS") != std::string::npos);
}
