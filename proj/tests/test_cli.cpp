#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <string>

#ifndef SPHRAD_CLI_PATH
#error "SPHRAD_CLI_PATH must be defined"
#endif
#ifndef SPHRAD_PROBLEMS_DIR
#error "SPHRAD_PROBLEMS_DIR must be defined"
#endif

namespace {

using nlohmann::json;

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(SPHRAD_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult result;
    std::array<char, 4096> buf;
    std::size_t got = 0;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) {
        result.out.append(buf.data(), got);
    }
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string problem(const char* name) {
    return std::string(SPHRAD_PROBLEMS_DIR) + "/" + name;
}

void check_all_numbers_finite(const json& j) {
    if (j.is_number_float()) {
        CHECK(std::isfinite(j.get<double>()));
    } else if (j.is_object() || j.is_array()) {
        for (const auto& item : j) check_all_numbers_finite(item);
    }
}

}  // namespace

TEST_CASE("eval: half-space closed form and report schema") {
    const RunResult r =
        run_cli("eval --problem " + problem("halfspace.json") + " --x 1");
    REQUIRE(r.exit_code == 0);
    const json report = json::parse(r.out);
    const auto& result = report.at("result");
    CHECK(std::abs(result.at("value").get<double>() - 0.8413447460685429) <= 1e-3);
    for (const char* key : {"value", "stderr", "N", "sampler", "tie_fraction",
                            "residual_infinite_mass", "diagnostics"}) {
        CHECK_MESSAGE(result.contains(key), "missing key: ", key);
    }
    CHECK(result.at("N").get<long long>() == 16384);
    // Header carries the full effective configuration.
    const auto& config = report.at("config");
    for (const char* key : {"samples", "sampler", "tie_tolerance", "root_tolerance",
                            "cutoff_level", "seed", "replicates"}) {
        CHECK_MESSAGE(config.contains(key), "missing config key: ", key);
    }
    check_all_numbers_finite(report);
}

TEST_CASE("eval at a Slater-violating point exits 2") {
    const RunResult r =
        run_cli("eval --problem " + problem("halfspace.json") + " --x 0");
    CHECK(r.exit_code == 2);
    // With the general kernel explicitly enabled it evaluates phi(0) = 1/2.
    const RunResult ok = run_cli("eval --problem " + problem("halfspace.json") +
                                 " --x 0 --allow-non-slater --samples 4096");
    REQUIRE(ok.exit_code == 0);
    CHECK(std::abs(json::parse(ok.out).at("result").at("value").get<double>() - 0.5) <=
          5e-3);
}

TEST_CASE("validation failures exit 3") {
    CHECK(run_cli("eval --problem /nonexistent.json --x 1").exit_code == 3);
    CHECK(run_cli("eval --problem " + problem("halfspace.json") + " --x 1,2").exit_code ==
          3);
    CHECK(run_cli("eval --problem " + problem("halfspace.json") + " --x 1 --sampler bogus")
              .exit_code == 3);
    CHECK(run_cli("bogus-subcommand").exit_code == 3);
    CHECK(run_cli("eval --problem " + problem("halfspace.json")).exit_code == 3);

    // Schema violation.
    const std::string bad = "/tmp/sphrad_bad_problem.json";
    std::ofstream(bad) << "{\"n\": 1, \"m\": 2}";
    CHECK(run_cli("eval --problem " + bad + " --x 1").exit_code == 3);

    // Expression error inside the problem file.
    const std::string badexpr = "/tmp/sphrad_bad_expr.json";
    std::ofstream(badexpr)
        << R"({"n":1,"m":2,"mean":[0,0],"covariance":[[1,0],[0,1]],)"
        << R"("components":[{"kind":"expr","src":"z1 + "}]})";
    CHECK(run_cli("eval --problem " + badexpr + " --x 1").exit_code == 3);
}

TEST_CASE("byte-identical reports for identical configs") {
    const std::string args = "eval --problem " + problem("product.json") +
                             " --x 1 --samples 2048 --seed 7";
    const RunResult a = run_cli(args);
    const RunResult b = run_cli(args);
    REQUIRE(a.exit_code == 0);
    CHECK(a.out == b.out);

    // Parallel run reports the same values (threads only appear in config).
    const RunResult c = run_cli(args + " --threads 4");
    REQUIRE(c.exit_code == 0);
    json ja = json::parse(a.out), jc = json::parse(c.out);
    CHECK(ja.at("result") == jc.at("result"));
}

TEST_CASE("grad and subdiff emit coordinate estimates") {
    const RunResult g = run_cli("grad --problem " + problem("product.json") +
                                " --x 1 --samples 8192");
    REQUIRE(g.exit_code == 0);
    const json grad = json::parse(g.out);
    CHECK(std::abs(grad.at("result").at("value")[0].get<double>() - 0.4071615955531600) <=
          2e-2);
    check_all_numbers_finite(grad);

    const RunResult s = run_cli("subdiff --problem " + problem("duplicated.json") +
                                " --x 1 --samples 2048");
    REQUIRE(s.exit_code == 0);
    const json sub = json::parse(s.out);
    const auto& res = sub.at("result");
    CHECK(res.at("tie_fraction").get<double>() > 0.0);
    const double width = res.at("hull_hi")[0].get<double>() -
                         res.at("hull_lo")[0].get<double>();
    CHECK(std::abs(width) <= 1e-12);
    check_all_numbers_finite(sub);
}

TEST_CASE("check reports the growth failure of the example") {
    const RunResult r = run_cli("check --problem " + problem("example52.json") +
                                " --x 0 --l 1 --samples 1024 --probes 128");
    REQUIRE(r.exit_code == 0);
    const json rep = json::parse(r.out);
    const auto& res = rep.at("result");
    CHECK(res.at("slater_ok").get<bool>());
    CHECK(res.at("g_at_origin").get<double>() == -1.0);
    CHECK(!res.at("growth").at("pass").get<bool>());
    CHECK(res.at("growth").contains("witness_x"));
    CHECK(res.at("differentiability_verdict").get<std::string>() == "unknown");
    // One nice-direction probe per signed coordinate direction: +e1 fails,
    // -e1 passes.
    bool up_fail = false, down_pass = false;
    for (const auto& nd : res.at("nice_directions")) {
        const double h = nd.at("h")[0].get<double>();
        if (h > 0 && !nd.at("pass").get<bool>()) up_fail = true;
        if (h < 0 && nd.at("pass").get<bool>()) down_pass = true;
    }
    CHECK(up_fail);
    CHECK(down_pass);
    check_all_numbers_finite(rep);
}

TEST_CASE("oracle emits probability and common-direction FD gradient") {
    const RunResult r = run_cli("oracle --problem " + problem("halfspace.json") +
                                " --x 1 --samples 50000 --seed 5");
    REQUIRE(r.exit_code == 0);
    const json rep = json::parse(r.out);
    const auto& res = rep.at("result");
    CHECK(std::abs(res.at("probability").at("value").get<double>() - 0.8413447) <= 0.01);
    CHECK(res.contains("gradient_fd"));
    check_all_numbers_finite(rep);
}

TEST_CASE("example emits the witness CSV by default") {
    const RunResult r = run_cli("example");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("t,phi_gap,eps_sqrt_t,ratio") != std::string::npos);
    const json rep = json::parse(run_cli("example --format json").out);
    CHECK(rep.at("result").at("witness").size() == 4);
    for (const auto& row : rep.at("result").at("witness")) {
        CHECK(row.at("phi_gap").get<double>() >= row.at("eps_sqrt_t").get<double>());
    }
    check_all_numbers_finite(rep);
}

TEST_CASE("replicated qmc runs are deterministic and report replicate spread") {
    const std::string args = "eval --problem " + problem("halfspace.json") +
                             " --x 1 --samples 1024 --replicates 8 --seed 9";
    const RunResult a = run_cli(args);
    const RunResult b = run_cli(args);
    REQUIRE(a.exit_code == 0);
    CHECK(a.out == b.out);
    const json rep = json::parse(a.out);
    const auto& res = rep.at("result");
    CHECK(res.at("N").get<long long>() == 8 * 1024);
    CHECK(res.at("stderr").get<double>() > 0.0);
    CHECK(std::abs(res.at("value").get<double>() - 0.8413447460685429) <= 5e-3);
    CHECK(res.at("sampler").get<std::string>().find("replicates=8") != std::string::npos);
}

TEST_CASE("subdiff labels the cone term from the growth verdict") {
    // Affine problem: growth passes, integral term is the whole enclosure.
    const RunResult ok = run_cli("subdiff --problem " + problem("halfspace.json") +
                                 " --x 1 --samples 512");
    REQUIRE(ok.exit_code == 0);
    CHECK(json::parse(ok.out).at("result").at("cone_term").get<std::string>().find(
              "trivial") == 0);

    // The exp-barrier example fails the growth check at l = 1.
    const RunResult bad = run_cli("subdiff --problem " + problem("example52.json") +
                                  " --x 0.1 --samples 512 --l 1");
    REQUIRE(bad.exit_code == 0);
    CHECK(json::parse(bad.out).at("result").at("cone_term").get<std::string>() ==
          "integral part only; cone term nontrivial");
}

TEST_CASE("csv eval emits a single data row with config comments") {
    const RunResult r = run_cli("eval --problem " + problem("ball2.json") +
                                " --x 0 --samples 512 --format csv");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("# command=\"eval\"") != std::string::npos);
    CHECK(r.out.find("value,stderr,N,sampler,tie_fraction,residual_infinite_mass") !=
          std::string::npos);
    CHECK(r.out.find("0.86466471676338") != std::string::npos);
}

TEST_CASE("expr-kind problems load and evaluate") {
    const std::string path = "/tmp/sphrad_expr_problem.json";
    std::ofstream(path)
        << R"({"n":1,"m":2,"mean":[0,0],"covariance":[[1,0],[0,1]],)"
        << R"("components":[{"kind":"expr","src":"z1 - x1"}]})";
    const RunResult r = run_cli("eval --problem " + path + " --x 1 --samples 4096");
    REQUIRE(r.exit_code == 0);
    CHECK(std::abs(json::parse(r.out).at("result").at("value").get<double>() -
                   0.8413447460685429) <= 5e-3);
}
