#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

// End-to-end checks through the installed command-line binary.

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

RunResult run(const std::string& args, const std::string& env = "") {
    std::string out_file = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
                           "/torsionstab_cli_out.txt";
    std::string cmd = env + " " + std::string(TORSIONSTAB_CLI_PATH) + " " + args + " > " +
                      out_file + " 2>&1";
    int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out_file);
    std::stringstream ss;
    ss << in.rdbuf();
    r.output = ss.str();
    return r;
}

std::string fixture(const std::string& name) {
    return std::string(TORSIONSTAB_FIXTURES) + "/" + name;
}

}  // namespace

TEST_CASE("analyze produces a consistent report and exit code 0", "[cli]") {
    RunResult r = run("analyze " + fixture("oscillator.json") + " --samples 6 --seed 42");
    INFO(r.output);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("consistent: yes") != std::string::npos);
    CHECK(r.output.find("oracle verdict:    stable") != std::string::npos);
}

TEST_CASE("analyze writes text and json mirrors", "[cli]") {
    std::string base = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp");
    std::string out = base + "/report.txt";
    RunResult r = run("analyze " + fixture("lemma46.json") + " --samples 6 --out " + out);
    CHECK(r.exit_code == 0);
    std::ifstream text(out);
    REQUIRE(text.good());
    std::ifstream json(base + "/report.json");
    REQUIRE(json.good());
    std::stringstream ss;
    ss << json.rdbuf();
    CHECK(ss.str().find("\"consistent\": true") != std::string::npos);
}

TEST_CASE("analyze input failures exit with code 1", "[cli]") {
    CHECK(run("analyze /nonexistent/matrix.json").exit_code == 1);
    std::string bad = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
                      "/bad_matrix.json";
    std::ofstream f(bad);
    f << "{\"n\": 2, \"rows\": [[1, 2], [3,]]}\n";
    f.close();
    RunResult r = run("analyze " + bad);
    CHECK(r.exit_code == 1);
    CHECK(r.output.find(":1:") != std::string::npos);  // line:column diagnostic
}

TEST_CASE("trace emits the pinned CSV schema", "[cli]") {
    std::string csv = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
                      "/trace.csv";
    RunResult r = run("trace " + fixture("oscillator.json") +
                      " --r0 1,2,1,2 --points 32 --out " + csv);
    INFO(r.output);
    REQUIRE(r.exit_code == 0);
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,logV1,logV2,logV3,logV4,kappa_1,kappa_2,kappa_3,tau");
    int rows = 0;
    std::string line;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 32);
}

TEST_CASE("trace validates the initial condition", "[cli]") {
    CHECK(run("trace " + fixture("oscillator.json") + " --r0 1,2,1").exit_code == 1);
    CHECK(run("trace " + fixture("oscillator.json") + " --r0 1,0,1,2").exit_code == 1);
    CHECK(run("trace " + fixture("oscillator.json") + " --r0 1,0,1,2 --allow-degenerate --points 32")
              .exit_code == 0);
}

TEST_CASE("examples subcommand reproduces the reference systems", "[cli]") {
    RunResult r = run("examples paper2");
    INFO(r.output);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("[PASS]") != std::string::npos);
    CHECK(r.output.find("[FAIL]") == std::string::npos);

    RunResult unknown = run("examples nosuch");
    CHECK(unknown.exit_code == 1);
    CHECK(unknown.output.find("paper1") != std::string::npos);  // lists valid names
}

TEST_CASE("verify runs the seeded property suite", "[cli]") {
    RunResult r = run("verify --suite properties --seed 42");
    INFO(r.output);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("all suites passed") != std::string::npos);
}

TEST_CASE("seed resolution prefers the flag over the environment", "[cli]") {
    RunResult env_only =
        run("analyze " + fixture("lemma46.json") + " --samples 6", "TORSIONSTAB_SEED=7");
    CHECK(env_only.exit_code == 0);
    CHECK(env_only.output.find("seed = 7") != std::string::npos);

    RunResult both = run("analyze " + fixture("lemma46.json") + " --samples 6 --seed 9",
                         "TORSIONSTAB_SEED=7");
    CHECK(both.exit_code == 0);
    CHECK(both.output.find("seed = 9") != std::string::npos);
}
