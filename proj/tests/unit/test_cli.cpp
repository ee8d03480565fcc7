#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "a2lab/experiment.hpp"
#include "a2lab/io.hpp"

using namespace a2lab;

namespace {

Json parse(const char* text) { return Json::parse(text); }

std::string config_error(const Json& config) {
    try {
        validate_config(config);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

Json small_config() {
    return parse(R"({
        "seed": 3,
        "experiments": [
            {"type": "bellman", "alphas": [0.25], "Qs": [2.0, 10.0], "samples": 500},
            {"type": "shift-bench", "tree": "regular:64:2", "weights": "a2:1..100:per-decade=2", "complexities": [[0, 1], [1, 1]],
             "draws": 2}
        ]
    })");
}

int run_cli(const std::string& args) {
    const int status = std::system((std::string(A2LAB_CLI) + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config validation names the offending field") {
    CHECK(config_error(parse(R"({"experiments": []})")).find("seed") == 0);
    CHECK(config_error(parse(R"({"seed": -1})")).find("seed") == 0);
    CHECK(config_error(parse(R"({"seed": 1, "bogus": 2})")).find("bogus") == 0);
    CHECK(config_error(parse(R"({"seed": 1, "experiments": [{"type": "bellman"}, {"type": "nope"}]})"))
              .find("experiments[1].type") == 0);
    CHECK(config_error(parse(R"({"seed": 1, "experiments": [{"type": "cover"}, {"type": "cover"},
                                  {"type": "pbad", "trials": "many"}]})"))
              .find("experiments[2].trials") == 0);
    CHECK(config_error(parse(R"({"seed": 1, "experiments": [{"type": "bellman", "samples": 10, "extra": 1}]})"))
              .find("experiments[0].extra") == 0);
    CHECK(config_error(parse(R"({"seed": 1, "experiments": [{"type": "shift-bench", "complexities": [[1]]}]})"))
              .find("experiments[0].complexities[0]") == 0);
    CHECK(config_error(small_config()).empty());
    CHECK_THROWS_AS(run_config(parse(R"({"experiments": []})")), ConfigError);
}

TEST_CASE("an empty experiment list gives an empty passing report") {
    const Report r = run_config(parse(R"({"seed": 7, "experiments": []})"));
    CHECK(r.experiments.empty());
    CHECK(r.pass());
    CHECK(r.seed == 7);
    CHECK(!r.config_hash.empty());
    CHECK(r.version == version());
}

TEST_CASE("reports round-trip through JSON and CSV") {
    const Report r = run_config(small_config());
    REQUIRE(r.experiments.size() == 2);
    const Json j = report_to_json(r);
    CHECK(Json::parse(j.dump()) == j);
    CHECK(j["seed"] == 3);
    CHECK(j["experiments"][1]["type"] == "shift-bench");
    CHECK(j["experiments"][1]["tables"][0] == "01_shift-bench_shift.csv");
    CHECK(j["pass"].get<bool>() == r.pass());

    const auto& shift = r.experiments[1];
    REQUIRE(!shift.tables.empty());
    CHECK(shift.tables.front().first == "shift");
    const std::string csv = shift.tables.front().second.str();
    CHECK(csv.substr(0, csv.find('\n')) == "complexity,m,n,a2,norm,slope");

    const auto dir = std::filesystem::temp_directory_path() / "a2lab_cli_report";
    std::filesystem::remove_all(dir);
    emit_report(r, dir.string());
    CHECK(read_json((dir / "report.json").string()) == j);
    CHECK(slurp(dir / "01_shift-bench_shift.csv") == csv);
    std::filesystem::remove_all(dir);
}

TEST_CASE("the same config gives the same tables and hash") {
    const Report a = run_config(small_config()), b = run_config(small_config());
    CHECK(a.config_hash == b.config_hash);
    REQUIRE(a.experiments.size() == b.experiments.size());
    for (std::size_t i = 0; i < a.experiments.size(); ++i) {
        CHECK(a.experiments[i].quantities == b.experiments[i].quantities);
        REQUIRE(a.experiments[i].tables.size() == b.experiments[i].tables.size());
        for (std::size_t k = 0; k < a.experiments[i].tables.size(); ++k)
            CHECK(a.experiments[i].tables[k].second.str() == b.experiments[i].tables[k].second.str());
    }
    Json other = small_config();
    other["seed"] = 4u;
    CHECK(run_config(other).config_hash != a.config_hash);
}

TEST_CASE("command line exit codes") {
    const auto dir = std::filesystem::temp_directory_path() / "a2lab_cli_run";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    CHECK(run_cli("--version") == 0);

    write_json((dir / "ok.json").string(), small_config());
    const Report expected = run_config(small_config());
    CHECK(run_cli("run --config " + (dir / "ok.json").string() + " --out-dir " + (dir / "out").string()) ==
          (expected.pass() ? 0 : 1));
    CHECK(std::filesystem::exists(dir / "out" / "report.json"));
    CHECK(std::filesystem::exists(dir / "out" / "00_bellman_bellman.csv"));

    write_json((dir / "bad.json").string(), parse(R"({"experiments": []})"));
    CHECK(run_cli("run --config " + (dir / "bad.json").string() + " --out-dir " + (dir / "out2").string()) == 2);
    CHECK(run_cli("run --config " + (dir / "missing.json").string()) == 2);
    std::filesystem::remove_all(dir);
}
