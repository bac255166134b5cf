#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qfam/distributions.hpp"
#include "qfam/report_io.hpp"

using json = nlohmann::json;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string scratch_path(const std::string& stem) {
    static int counter = 0;
    return "/tmp/qfam_cli_test_" + std::to_string(::getpid()) + "_" +
           std::to_string(counter++) + "_" + stem;
}

CliResult run_cli(const std::string& args) {
    const std::string out_path = scratch_path("out");
    const std::string err_path = scratch_path("err");
    const std::string cmd =
        std::string(QFAM_CLI_PATH) + " " + args + " >" + out_path + " 2>" + err_path;
    const int status = std::system(cmd.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out_path);
    result.err = slurp(err_path);
    std::remove(out_path.c_str());
    std::remove(err_path.c_str());
    return result;
}

}  // namespace

TEST_CASE("eval prints 17-significant-digit scalars") {
    const CliResult pdf0 = run_cli("eval --dist t --nu 2 --at 0 --what pdf");
    CHECK(pdf0.exit_code == 0);
    CHECK(pdf0.out == "0.35355339059327373\n");

    const CliResult cdf1 = run_cli("eval --dist t --nu 2 --at 1 --what cdf");
    CHECK(cdf1.exit_code == 0);
    CHECK(cdf1.out == "0.78867513459481287\n");

    // The family at its heavy-tailed member parameters reproduces the same
    // quantile as the nu=2 law.
    const CliResult q = run_cli(
        "eval --dist qfamily --lambda 0.5 --c 0.35355339059327373 --at 0.75 --what quantile");
    CHECK(q.exit_code == 0);
    const double expected = qfam::qfam_quantile({0.5, 0.35355339059327373, 0.0}, 0.75);
    CHECK(q.out == qfam::format_double(expected) + "\n");
    const CliResult q2 = run_cli("eval --dist t --nu 2 --at 0.75 --what quantile");
    CHECK(std::abs(std::stod(q2.out) - expected) <= 1e-9);
}

TEST_CASE("eval validates parameters with exit code 2") {
    CHECK(run_cli("eval --dist t --at 0 --what pdf").exit_code == 2);       // missing --nu
    CHECK(run_cli("eval --dist t --nu 2 --what pdf").exit_code == 2);      // missing --at
    CHECK(run_cli("eval --dist qfamily --lambda 0.5 --at 0").exit_code == 2);  // missing --c
    CHECK(run_cli("eval --dist t --nu -1 --at 0").exit_code == 2);
    CHECK(run_cli("eval --dist banana --at 0").exit_code == 2);
    CHECK(run_cli("eval --dist t --nu 2 --at 0 --what density").exit_code == 2);
    CHECK(run_cli("eval --dist t --nu 2 --at 0 --format yaml").exit_code == 2);
    CHECK(run_cli("frobnicate").exit_code == 2);
    CHECK(run_cli("").exit_code == 2);  // a subcommand is required
}

TEST_CASE("residual-grid canonical first-moment run passes") {
    const CliResult r = run_cli(
        "residual-grid --theorem 1 --dist t --nu 2 --lambda 0.5 --n 5 --k 3 --tol 1e-6");
    CHECK(r.exit_code == 0);
    CHECK(r.err.find("PASS") != std::string::npos);
    const json doc = json::parse(r.out);
    CHECK(doc.at("x_grid").size() == 41);  // default grid size
    CHECK(doc.at("max_abs_delta").get<double>() <= 1e-6);
    CHECK(doc.at("tol").get<double>() == 1e-6);
    CHECK(doc.at("passed").get<bool>());
}

TEST_CASE("residual-grid rejects invalid family parameters with exit 2") {
    CHECK(run_cli("residual-grid --theorem 1 --dist qfamily --lambda 1.2 --c 1").exit_code ==
          2);
    CHECK(run_cli("residual-grid --theorem 3 --dist t --nu 2").exit_code == 2);
    CHECK(run_cli("residual-grid --theorem 2 --dist normal").exit_code == 2);  // needs --nu
    CHECK(run_cli("residual-grid --theorem 1").exit_code == 2);  // default t needs --nu
}

TEST_CASE("residual-grid flags identity violations with exit 1") {
    const CliResult r =
        run_cli("residual-grid --theorem 1 --dist normal --points 11 --tol 1e-6");
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("FAIL") != std::string::npos);
    const json doc = json::parse(r.out);
    CHECK(doc.at("max_abs_delta").get<double>() > 0.05);
    CHECK_FALSE(doc.at("passed").get<bool>());
}

TEST_CASE("residual-grid second-moment identity run") {
    const CliResult ok = run_cli(
        "residual-grid --theorem 2 --dist t --nu 4 --n 4 --k 2 --points 11 --tol 1e-6");
    CHECK(ok.exit_code == 0);
    CHECK(ok.err.find("|delta|/(1+x^2)") != std::string::npos);
}

TEST_CASE("residual-grid CSV output has the documented header") {
    const CliResult r = run_cli(
        "residual-grid --theorem 1 --dist t --nu 2 --points 5 --format csv");
    CHECK(r.exit_code == 0);
    std::istringstream lines(r.out);
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "x,lhs,rhs,delta");
    int rows = 0;
    while (std::getline(lines, line)) {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 3);
    }
    CHECK(rows == 5);
    CHECK(r.out.find("\r") == std::string::npos);  // Unix line endings
}

TEST_CASE("identical runs produce byte-identical artifacts") {
    const std::string args =
        "residual-grid --theorem 1 --dist qfamily --lambda 0.25 --c 1 --d -1 "
        "--points 9 --tol 1e-6 --format json";
    const CliResult first = run_cli(args);
    const CliResult second = run_cli(args);
    CHECK(first.exit_code == 0);
    CHECK(first.out == second.out);

    const std::string out_a = scratch_path("a.json");
    const std::string out_b = scratch_path("b.json");
    CHECK(run_cli(args + " --out " + out_a).exit_code == 0);
    CHECK(run_cli(args + " --out " + out_b).exit_code == 0);
    CHECK(slurp(out_a) == slurp(out_b));
    CHECK(slurp(out_a) == first.out);
    std::remove(out_a.c_str());
    std::remove(out_b.c_str());
}

TEST_CASE("residual report JSON round-trips through its schema") {
    const CliResult r = run_cli(
        "residual-grid --theorem 1 --dist t --nu 2 --points 7 --format json");
    REQUIRE(r.exit_code == 0);
    const json doc = json::parse(r.out);
    qfam::ResidualReport rebuilt;
    rebuilt.x_grid = doc.at("x_grid").get<std::vector<double>>();
    rebuilt.lhs = doc.at("lhs").get<std::vector<double>>();
    rebuilt.rhs = doc.at("rhs").get<std::vector<double>>();
    rebuilt.delta = doc.at("delta").get<std::vector<double>>();
    rebuilt.max_abs_delta = doc.at("max_abs_delta").get<double>();
    rebuilt.tol = doc.at("tol").get<double>();
    rebuilt.passed = doc.at("passed").get<bool>();
    CHECK(qfam::to_json(rebuilt) == r.out);
}

TEST_CASE("sampling is reproducible and schema-stable") {
    const std::string args = "sample --dist uniform --a 0 --b 1 --count 5 --seed 9";
    const CliResult a = run_cli(args + " --format csv");
    CHECK(a.exit_code == 0);
    std::istringstream lines(a.out);
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "value");
    int rows = 0;
    while (std::getline(lines, line)) {
        const double v = std::stod(line);
        CHECK(v > 0.0);
        CHECK(v < 1.0);
        ++rows;
    }
    CHECK(rows == 5);

    const CliResult b = run_cli(args + " --format json");
    const json doc = json::parse(b.out);
    const auto values = doc.at("values").get<std::vector<double>>();
    CHECK(qfam::values_to_json(values) == b.out);
    CHECK(run_cli(args + " --format json").out == b.out);
    CHECK(run_cli("sample --dist uniform --a 0 --b 1 --count 5 --seed 10 --format json").out !=
          b.out);
    CHECK(run_cli("sample --dist uniform --count 0").exit_code == 2);
}

TEST_CASE("ode-check covers all three equations") {
    CHECK(run_cli("ode-check --check quantile-ode --dist t --nu 2 --lambda 0.5 "
                  "--c 0.35355339059327373 --tol 1e-9")
              .exit_code == 0);
    CHECK(run_cli("ode-check --check quantile-ode --dist t --nu 2 --lambda 0.5 "
                  "--c 1.0 --tol 1e-6")
              .exit_code == 1);
    CHECK(run_cli("ode-check --check moment-eq --nu 3 --tol 1e-7").exit_code == 0);
    CHECK(run_cli("ode-check --check moment-eq --nu 3 --dist normal --tol 1e-6").exit_code ==
          1);
    CHECK(run_cli("ode-check --check log-slope --nu 4 --tol 1e-6 --step 1e-4").exit_code ==
          0);
    CHECK(run_cli("ode-check --check log-slope --tol 1e-6").exit_code == 2);  // needs --nu
    CHECK(run_cli("ode-check --check banana --nu 3").exit_code == 2);
}

TEST_CASE("mc-verify emits the regression estimate and a verdict") {
    const std::string args =
        "mc-verify --dist t --nu 2 --n 3 --k 2 --kind sample-mean --replications 4000 "
        "--bins 10 --seed 7 --format json";
    const CliResult r = run_cli(args);
    CHECK(r.exit_code == 0);
    CHECK(r.err.find("interior bins") != std::string::npos);
    const json doc = json::parse(r.out);
    CHECK(doc.at("bin_edges").size() == 11);
    CHECK(doc.at("bin_centers").size() == 10);

    qfam::RegressionEstimate rebuilt;
    rebuilt.bin_edges = doc.at("bin_edges").get<std::vector<double>>();
    rebuilt.bin_centers = doc.at("bin_centers").get<std::vector<double>>();
    rebuilt.counts = doc.at("counts").get<std::vector<long long>>();
    rebuilt.empirical_mean = doc.at("empirical_mean").get<std::vector<double>>();
    rebuilt.std_err = doc.at("std_err").get<std::vector<double>>();
    rebuilt.theoretical = doc.at("theoretical").get<std::vector<double>>();
    rebuilt.z_scores = doc.at("z_scores").get<std::vector<double>>();
    CHECK(qfam::to_json(rebuilt) == r.out);

    CHECK(run_cli(args).out == r.out);  // determinism

    const CliResult csv = run_cli(
        "mc-verify --dist t --nu 2 --n 3 --k 2 --kind sample-mean --replications 4000 "
        "--bins 10 --seed 7 --format csv");
    std::istringstream lines(csv.out);
    std::string header;
    REQUIRE(std::getline(lines, header));
    CHECK(header == "bin_lo,bin_hi,bin_center,count,empirical_mean,std_err,theoretical,z_score");

    CHECK(run_cli("mc-verify --dist t --nu 2 --kind below-dev --r 3").exit_code == 2);
    CHECK(run_cli("mc-verify --dist t --nu 1 --kind sample-mean").exit_code == 2);
}

TEST_CASE("fit-lambda recovers the heavy-tailed member from the nu=2 law") {
    const CliResult r = run_cli(
        "fit-lambda --dist t --nu 2 --points 21 --init-lambda 0.4 --init-c 1 --init-d 0.1");
    CHECK(r.exit_code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc.at("lambda").get<double>() == Catch::Approx(0.5).margin(1e-4));
    CHECK(doc.at("c").get<double>() == Catch::Approx(0.35355339059327373).margin(1e-4));
    CHECK(doc.at("d").get<double>() == Catch::Approx(0.0).margin(1e-4));
    CHECK(doc.at("objective").get<double>() < 1e-8);

    CHECK(run_cli("fit-lambda --dist t --nu 2 --points 3").exit_code == 2);
}

TEST_CASE("dump-config reports the effective run configuration on stderr") {
    const CliResult r = run_cli("eval --dist t --nu 2 --at 0 --what pdf --dump-config");
    CHECK(r.exit_code == 0);
    CHECK(r.out == "0.35355339059327373\n");
    CHECK(r.err.find("\"command\":\"eval\"") != std::string::npos);
    CHECK(r.err.find("\"dist\":\"t\"") != std::string::npos);
}
