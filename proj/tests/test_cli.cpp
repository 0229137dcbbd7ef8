#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sprel/cli.hpp"
#include "sprel/reliability.hpp"
#include "support.hpp"

using namespace sprel;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run invoke(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    Run r;
    r.code = sprel::cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string temp(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("sprel_cli_" + name)).string();
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("generate writes a valid instance") {
    const std::string path = temp("gen.json");
    const Run r = invoke({"generate", "--m", "8", "--seed", "3", "--alpha", "0.75", "--out", path});
    CHECK(r.code == sprel::cli::kExitOk);
    const Instance inst = read_instance(path);
    CHECK(inst.m() == 8);
    CHECK(inst.alpha == 0.75);
    CHECK(inst == generate(8, 3, 0.75));
    std::filesystem::remove(path);
}

TEST_CASE("evaluate prints the reliability") {
    const std::string path = temp("tri.json");
    write_instance(testing::triangle(0.9, 0.9, 0.9), path);
    const Run r = invoke({"evaluate", "--instance", path, "--mask", "111"});
    CHECK(r.code == sprel::cli::kExitOk);
    CHECK(std::abs(std::stod(r.out) - 0.972) <= 1e-12);
    const Run traced = invoke({"evaluate", "--instance", path, "--mask", "110", "--trace"});
    CHECK(traced.code == sprel::cli::kExitOk);
    CHECK(traced.out.find("Omega=") != std::string::npos);
    const Run oracle = invoke({"oracle", "--instance", path});
    CHECK(oracle.code == sprel::cli::kExitOk);
    CHECK(std::abs(std::stod(oracle.out) - 0.972) <= 1e-12);
    std::filesystem::remove(path);
}

TEST_CASE("usage errors exit with 1") {
    CHECK(invoke({"generate", "--m", "8", "--seed", "1", "--bogus"}).code == sprel::cli::kExitUsage);
    CHECK(invoke({}).code == sprel::cli::kExitUsage);
    CHECK(invoke({"generate", "--m", "1", "--seed", "1"}).code == sprel::cli::kExitUsage);
    const std::string path = temp("bad_mask.json");
    write_instance(testing::triangle(0.9, 0.9, 0.9), path);
    const Run bad = invoke({"evaluate", "--instance", path, "--mask", "1x1"});
    CHECK(bad.code == sprel::cli::kExitUsage);
    CHECK_FALSE(bad.err.empty());
    CHECK(invoke({"solve", "--instance", path, "--cuts", "all"}).code == sprel::cli::kExitUsage);
    CHECK(invoke({"evaluate", "--instance", temp("missing.json"), "--mask", "1"}).code == sprel::cli::kExitUsage);
    std::filesystem::remove(path);
}

TEST_CASE("solve agrees with oracle --optimize") {
    const std::string path = temp("m12.json");
    const std::string out = temp("m12_result.json");
    const std::string log = temp("m12.log");
    const std::string lp = temp("m12.lp");
    const Run gen = invoke({"generate", "--m", "12", "--seed", "4", "--alpha", "0.6", "--out", path});
    REQUIRE(gen.code == sprel::cli::kExitOk);
    const Run orc = invoke({"oracle", "--instance", path, "--optimize"});
    REQUIRE(orc.code == sprel::cli::kExitOk);
    const auto at = orc.out.find("reliability=");
    REQUIRE(at != std::string::npos);
    const double best = std::stod(orc.out.substr(at + 12));
    const Run sol = invoke({"solve", "--instance", path, "--cuts", "improved", "--out", out, "--log", log,
                            "--lp-export", lp});
    CHECK(sol.code == sprel::cli::kExitOk);
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(std::abs(j.at("incumbent_reliability").get<double>() - best) <= 1e-9);
    CHECK(j.at("gap").get<double>() == 0.0);
    CHECK(slurp(log).find("node=") != std::string::npos);
    CHECK(slurp(lp).find("Subject To") != std::string::npos);
    for (const auto& p : {path, out, log, lp}) {
        std::filesystem::remove(p);
    }
}

TEST_CASE("solve exits with 2 when a limit stops it") {
    const std::string path = temp("m40.json");
    const Run gen = invoke({"generate", "--m", "40", "--seed", "2", "--alpha", "0.8", "--out", path});
    REQUIRE(gen.code == sprel::cli::kExitOk);
    const Run r = invoke({"solve", "--instance", path, "--cuts", "none", "--node-limit", "1"});
    CHECK(r.code == sprel::cli::kExitUnsolved);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("termination") == "node_limit");
    std::filesystem::remove(path);
}

TEST_CASE("bench writes one sorted CSV row per seed and mode") {
    const Run r = invoke({"bench", "--m", "8", "--alpha", "0.8", "--seeds", "2", "--seed", "5", "--cuts",
                          "improved,none"});
    CHECK(r.code == sprel::cli::kExitOk);
    std::istringstream lines(r.out);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "seed,m,alpha,config,status,incumbent,bound,gap,nodes,cuts,time_s");
    std::vector<std::string> rows;
    while (std::getline(lines, line)) {
        rows.push_back(line);
    }
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].rfind("5,8,0.8,none,", 0) == 0);
    CHECK(rows[1].rfind("5,8,0.8,improved,", 0) == 0);
    CHECK(rows[2].rfind("6,8,0.8,none,", 0) == 0);
}

}  // TEST_SUITE
