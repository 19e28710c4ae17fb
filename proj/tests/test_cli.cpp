#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "lifecycle/policy.hpp"

namespace {

struct RunResult {
    int exit_code;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    const std::string out_file = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
                                 "/lifecycle_cli_out.txt";
    const std::string cmd = std::string(LIFECYCLE_CLI_BIN) + " " + args + " > " + out_file + " 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(out_file);
    std::stringstream ss;
    ss << in.rdbuf();
    std::remove(out_file.c_str());
    return RunResult{WEXITSTATUS(status), ss.str()};
}

}  // namespace

TEST_CASE("policy at the floor prints the floor controls") {
    const RunResult r = run_cli("policy --x 2.5 --h 1");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("region=floor") != std::string::npos);
    CHECK(r.out.find("c=0.2") != std::string::npos);
    CHECK(r.out.find("pi=0") != std::string::npos);
    CHECK(r.out.find("b=0") != std::string::npos);
}

TEST_CASE("policy at the study's simulated start lies in the low-consumption band") {
    const RunResult r = run_cli("policy --x 3.5 --h 1");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("region=constrained") != std::string::npos);
    CHECK(r.out.find("jumped=no") != std::string::npos);
}

TEST_CASE("policy applies the initial jump from h = 0") {
    const RunResult r = run_cli("policy --x 1 --h 0");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("jumped=yes") != std::string::npos);
}

TEST_CASE("exit codes: invalid parameters and inadmissible states") {
    CHECK(run_cli("policy --x 3.5 --h 1 --set mu=0.05").exit_code == 2);   // mu = r
    CHECK(run_cli("policy --x 3.5 --h 1 --set gamma2=0.2").exit_code == 2);  // restriction fails
    CHECK(run_cli("policy --x 2.0 --h 1").exit_code == 3);  // below the floor
    CHECK(run_cli("policy --x 3.5 --h 1 --set junk=1").exit_code == 2);
}

TEST_CASE("parameter file loading honours overrides") {
    const std::string params = std::string(LIFECYCLE_PARAMS_DIR) + "/baseline.json";
    const RunResult base = run_cli("policy --x 6 --h 1 --params " + params);
    CHECK(base.exit_code == 0);
    const RunResult shifted = run_cli("policy --x 6 --h 1 --params " + params + " --set K=7.5");
    CHECK(shifted.exit_code == 0);
    CHECK(base.out != shifted.out);
}

TEST_CASE("boundaries CSV is ordered on every row") {
    const RunResult r = run_cli("boundaries --hmin 0.1 --hmax 10 --n 25");
    CHECK(r.exit_code == 0);
    std::istringstream is(r.out);
    std::string line;
    std::getline(is, line);
    CHECK(line == "h,x_bound,x_low,x_aggr,x_lavs");
    int rows = 0;
    while (std::getline(is, line)) {
        double h, xb, xl, xa, xv;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &h, &xb, &xl, &xa, &xv) == 5);
        CHECK(xb < xl);
        CHECK(xl < xa);
        CHECK(xa < xv);
        ++rows;
    }
    CHECK(rows == 25);
}

TEST_CASE("a degenerate sweep reproduces the policy rows") {
    const RunResult r = run_cli("sweep --axis lambda --values 0.03 --xmin 6 --xmax 6 --xn 1 --h 1");
    CHECK(r.exit_code == 0);
    std::istringstream is(r.out);
    std::string header, row;
    std::getline(is, header);
    CHECK(header == "axis_value,x,c,pi,p");
    REQUIRE(std::getline(is, row));
    double v, x, c, pi, p;
    REQUIRE(std::sscanf(row.c_str(), "%lf,%lf,%lf,%lf,%lf", &v, &x, &c, &pi, &p) == 5);
    const lifecycle::Solver solver{lifecycle::ModelParams{}};
    const lifecycle::PolicyDecision d = lifecycle::optimal_controls(solver, 6.0, 1.0);
    CHECK(c == doctest::Approx(d.c).epsilon(1e-11));
    CHECK(pi == doctest::Approx(d.pi).epsilon(1e-11));
    CHECK(p == doctest::Approx(d.p).epsilon(1e-11));
}

TEST_CASE("simulate emits the pinned CSV schemas and is byte-stable") {
    const std::string args =
        "simulate --x0 3.5 --h0 1 --dt 0.01 --horizon 1 --paths 1 --seed 7 --record-stride 10";
    const RunResult a = run_cli(args);
    const RunResult b = run_cli(args);
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.rfind("t,X,H,c,pi,b,p\n", 0) == 0);

    const RunResult ens = run_cli(
        "simulate --x0 3.5 --h0 1 --dt 0.01 --horizon 1 --paths 8 --seed 7 --record-stride 25");
    CHECK(ens.exit_code == 0);
    CHECK(ens.out.rfind("t,mean_X,q05_X,q95_X,mean_c,mean_pi,mean_p\n", 0) == 0);
}

TEST_CASE("three-variant simulation runs") {
    for (const char* v : {"full", "no-insurance-no-drawdown", "non-habit"}) {
        const RunResult r = run_cli(std::string("simulate --x0 3.5 --h0 1 --dt 0.01 --horizon 1 "
                                                "--paths 2 --seed 3 --variant ") +
                                    v);
        CHECK(r.exit_code == 0);
    }
    CHECK(run_cli("simulate --variant bogus").exit_code == 2);
}

TEST_CASE("verify emits a machine-readable report") {
    const std::string report = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
                               "/lifecycle_verify.json";
    const RunResult r = run_cli("verify --out " + report);
    // The battery includes the figure-direction check, which the closed form
    // itself contradicts for x_lavs; the run must complete (not a config
    // error) and report exactly that check as failing.
    CHECK(r.exit_code != 2);
    std::ifstream in(report);
    REQUIRE(in.good());
    nlohmann::json j;
    in >> j;
    std::remove(report.c_str());
    REQUIRE(j.contains("checks"));
    CHECK(j.at("checks").size() == 6);
    for (const auto& c : j.at("checks")) {
        const std::string name = c.at("name").get<std::string>();
        if (name == "ode_residual" || name == "smooth_fit" || name == "hjb_residual" ||
            name == "convexity")
            CHECK(c.at("pass").get<bool>());
    }
    CHECK(run_cli("verify --set gamma2=0.2").exit_code == 2);
}
