#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

fs::path scratch() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("lab_cli_test_" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

Run run(const std::string& args, const std::string& config = "") {
    const fs::path dir = scratch();
    std::string cmd = std::string(LAB_CLI_PATH) + " " + args + " --out " + (dir / "out").string();
    if (!config.empty()) {
        std::ofstream(dir / "cfg.json") << config;
        cmd += " --config " + (dir / "cfg.json").string();
    }
    cmd += " > " + (dir / "stdout").string() + " 2> " + (dir / "stderr").string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(dir / "stdout"), slurp(dir / "stderr")};
}

// The run directory is the last line on stdout.
fs::path run_dir(const Run& r) {
    std::string s = r.out;
    while (!s.empty() && s.back() == '\n') s.pop_back();
    return s.substr(s.rfind('\n') + 1);
}

} // namespace

TEST_CASE("unknown subcommand prints usage and exits 1") {
    const auto r = run("nope");
    CHECK(r.code == 1);
    CHECK(r.err.find("usage:") != std::string::npos);
}

TEST_CASE("bad config names the key path") {
    auto r = run("propagate", R"({"propagate": {"t": 0.1, "tt": 2}})");
    CHECK(r.code == 1);
    CHECK(r.err.find("propagate.tt") != std::string::npos);
    r = run("propagate", R"({"grid": {"n_points": "many"}})");
    CHECK(r.code == 1);
    CHECK(r.err.find("grid.n_points") != std::string::npos);
    r = run("propagate", "{not json");
    CHECK(r.code == 1);
}

TEST_CASE("propagate at t = 0 returns the input") {
    const auto r = run("propagate", R"({"propagate": {"t": 0.0, "method": "free"}})");
    REQUIRE(r.code == 0);
    const fs::path d = run_dir(r);
    CHECK(fs::exists(d / "resolved.json"));
    CHECK(fs::exists(d / "summary.json"));
    std::istringstream csv(slurp(d / "data.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "x,re_in,im_in,re_out,im_out");
    int rows = 0;
    while (std::getline(csv, line)) {
        std::istringstream ls(line);
        std::string x, a, b, c, e;
        std::getline(ls, x, ',');
        std::getline(ls, a, ',');
        std::getline(ls, b, ',');
        std::getline(ls, c, ',');
        std::getline(ls, e, ',');
        CHECK(a == c);
        CHECK(b == e);
        ++rows;
    }
    CHECK(rows == 256);
    CHECK(slurp(d / "resolved.json").find("\"method\": \"free\"") != std::string::npos);
}

TEST_CASE("weights with defaults writes the scan schema") {
    const auto r = run("weights");
    REQUIRE(r.code == 0);
    const std::string csv = slurp(run_dir(r) / "data.csv");
    CHECK(csv.rfind("lemma,s,a,b,gamma,xi_star,tau_star,sup,diverged,tail_ratio\n", 0) == 0);
    CHECK(csv.find("linear,0.25,0.2,0.55,0.35,") != std::string::npos);
}

TEST_CASE("failed assertion exits 2") {
    const auto r = run("xsb-check", R"({"xsb-check": {"max_spread": 1.0}})");
    CHECK(r.code == 2);
    CHECK(r.out.find("FAIL ensemble_spread") != std::string::npos);
}

TEST_CASE("inconclusive fits fail only under --strict") {
    const std::string cfg = R"({"potential": {"kind": "zero"}, "kernel-fits": {"times": [0.4, 0.2]}})";
    const auto loose = run("kernel-fits", cfg);
    CHECK(loose.code == 0);
    CHECK(loose.out.find("INCONCLUSIVE amplitude_slope") != std::string::npos);
    CHECK(run("kernel-fits --strict", cfg).code == 2);
}

TEST_CASE("reruns are byte identical") {
    const std::string cfg = R"({"data": {"kind": "random_hs", "s": 0.35},
                                "potential": {"kind": "gaussian_well", "depth": 2},
                                "maximal": {"evolver": "exact", "t_max": [0.05, 0.025]}})";
    const auto a = run("maximal --seed 7", cfg);
    const auto b = run("maximal --seed 7 --threads 1", cfg);
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(run_dir(a) != run_dir(b));
    CHECK(slurp(run_dir(a) / "data.csv") == slurp(run_dir(b) / "data.csv"));
    CHECK(slurp(run_dir(a) / "summary.json") == slurp(run_dir(b) / "summary.json"));
    const auto c = run("maximal --seed 8", cfg);
    CHECK(slurp(run_dir(a) / "data.csv") != slurp(run_dir(c) / "data.csv"));
}

TEST_CASE("LAB_THREADS is the fallback parallelism") {
    const auto r = run("propagate");
    REQUIRE(r.code == 0);
    CHECK(slurp(run_dir(r) / "resolved.json").find("\"threads\": 1") != std::string::npos);
    ::setenv("LAB_THREADS", "3", 1);
    const auto e = run("propagate");
    ::unsetenv("LAB_THREADS");
    CHECK(slurp(run_dir(e) / "resolved.json").find("\"threads\": 3") != std::string::npos);
}
