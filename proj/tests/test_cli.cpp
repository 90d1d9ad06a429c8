#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "aoismpc/cli.hpp"
#include "aoismpc/config.hpp"
#include "aoismpc/errors.hpp"
#include "aoismpc/report_io.hpp"

using namespace aoismpc;
namespace fs = std::filesystem;

namespace {

const char* kDesk = R"({
  "plant": {"A": [[1, 1], [0, 1]], "B": [[0.5], [1]], "E": [[0.5], [1]]},
  "disturbance": {"covariance": [[0.05]]},
  "horizon": 6,
  "x0": [4, 0],
  "constraints": {
    "state": {"lo": [-5, -2], "hi": [5, 2]},
    "input": {"lo": [-1], "hi": [1]},
    "delta_x": 0.8, "delta_u": 0.8
  },
  "channel": {"type": "one-link", "q": 0.9, "a_max": 8},
  "weights": {"Q": [[1, 0], [0, 1]], "R": [[0.1]], "S": 1.0},
  "solver": {"beta_rule": "adaptive"}
})";

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("aoismpc_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write(const fs::path& dir, const std::string& text) {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << text;
    return p;
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
    const auto at = s.find(from);
    REQUIRE(at != std::string::npos);
    return s.replace(at, from.size(), to);
}

int run(std::vector<std::string> args, std::string* err_out = nullptr) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    if (err_out) *err_out = err.str();
    return code;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config errors name the field or the line") {
    CHECK_THROWS_WITH_AS(parse_config(replace(kDesk, R"("B": [[0.5], [1]], )", "")),
                         doctest::Contains("plant.B"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(replace(kDesk, R"("horizon": 6,)", R"("horizon": 6)")),
                         doctest::Contains("line 5"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(replace(kDesk, R"("q": 0.9)", R"("q": "high")")),
                         doctest::Contains("channel.q"), ConfigError);
    const RunConfig cfg = parse_config(kDesk);
    CHECK(cfg.horizon == 6);
    CHECK(cfg.options.beta_rule == BetaRule::Adaptive);
    CHECK(cfg.config_hash == fnv1a(kDesk));
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("synth writes a policy that round trips") {
    const fs::path dir = scratch("synth");
    const fs::path cfg = write(dir, kDesk);
    REQUIRE(run({"synth", "--config", cfg.string(), "--out", dir.string(), "--dump-sdp",
                 (dir / "sdp.txt").string()}) == kExitOk);
    std::ifstream in(dir / "policy.json");
    const PolicyFile pf = read_policy(in);
    CHECK(pf.policy.respects_mask());
    CHECK(pf.config_hash == fnv1a(kDesk));
    std::ostringstream again;
    write_policy(again, pf);
    CHECK(again.str() == slurp(dir / "policy.json"));
    std::ifstream again_in(dir / "policy.json");
    const PolicyFile back = read_policy(again_in);
    CHECK(back.policy.V == pf.policy.V);
    CHECK(back.policy.M == pf.policy.M);
    CHECK(back.policy.support_mask == pf.policy.support_mask);
    CHECK(fs::file_size(dir / "sdp.txt") > 0);
}

TEST_CASE("exit codes") {
    const fs::path dir = scratch("codes");
    std::string err;
    CHECK(run({"synth", "--config", write(dir, replace(kDesk, R"("B": [[0.5], [1]], )", "")).string(), "--out",
               dir.string()},
              &err) == kExitConfig);
    CHECK(err.find("plant.B") != std::string::npos);

    const std::string risky = replace(replace(replace(kDesk, R"("q": 0.9)", R"("q": 0.5)"), R"("delta_x": 0.8)",
                                              R"("delta_x": 0.999)"),
                                      R"("adaptive")", R"("strict")");
    CHECK(run({"synth", "--config", write(dir, risky).string(), "--out", dir.string()}, &err) == kExitRiskChain);
    CHECK(err.find("failing k=") != std::string::npos);

    const std::string tight = replace(kDesk, R"("lo": [-5, -2], "hi": [5, 2])", R"("lo": [-5, -0.05], "hi": [5, 0.05])");
    CHECK(run({"synth", "--config", write(dir, tight).string(), "--out", dir.string()}) == kExitInfeasible);

    const fs::path empty = scratch("nopolicy");
    CHECK(run({"simulate", "--config", write(empty, kDesk).string(), "--out", empty.string()}, &err) ==
          kExitConfig);
    CHECK(err.find("policy") != std::string::npos);
    CHECK(run({"bogus"}) == kExitConfig);
}

TEST_CASE("simulate is deterministic and writes the rates table") {
    const fs::path a = scratch("sim_a"), b = scratch("sim_b");
    for (const auto& dir : {a, b}) {
        const fs::path cfg = write(dir, kDesk);
        REQUIRE(run({"synth", "--config", cfg.string(), "--out", dir.string()}) == kExitOk);
        REQUIRE(run({"simulate", "--config", cfg.string(), "--out", dir.string(), "--runs", "500", "--seed", "5"}) ==
                kExitOk);
    }
    CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
    CHECK(slurp(a / "trajectories.csv") == slurp(b / "trajectories.csv"));
    std::ifstream csv(a / "trajectories.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "run,k,x_0,x_1,u_0,aoi,beta_applicable,state_ok,input_ok");
    std::ifstream rates(a / "rates.csv");
    std::getline(rates, header);
    CHECK(header.rfind("k,state,state_se,input,input_se,beta,beta_se", 0) == 0);
    const auto report = nlohmann::json::parse(slurp(a / "report.json"));
    CHECK(report.at("seed").get<int>() == 5);
    CHECK(report.at("config_hash").get<std::string>() == hex64(fnv1a(kDesk)));
}

TEST_CASE("aoi-table and enumerate") {
    const fs::path dir = scratch("aoi");
    const std::string perfect = R"({"horizon": 4, "channel": {"type": "one-link", "q": 1.0, "a_max": 4}})";
    REQUIRE(run({"aoi-table", "--config", write(dir, perfect).string(), "--out", dir.string()}) == kExitOk);
    std::ifstream in(dir / "availability.csv");
    std::string line;
    std::getline(in, line);
    int rows = 0;
    while (std::getline(in, line)) {
        CHECK(line.substr(line.rfind(',') + 1) == "1");
        ++rows;
    }
    CHECK(rows == 6);

    const std::string dead = R"({"horizon": 3, "channel": {"type": "one-link", "q": 0.0, "a_max": 4}})";
    REQUIRE(run({"aoi-table", "--config", write(dir, dead).string(), "--out", dir.string()}) == kExitOk);
    std::ifstream din(dir / "availability.csv");
    std::getline(din, line);
    while (std::getline(din, line)) CHECK(line.substr(line.rfind(',') + 1) == "0");

    const std::string lossy = R"({"horizon": 4, "channel": {"type": "one-link", "q": 0.6, "a_max": 6}})";
    REQUIRE(run({"enumerate", "--config", write(dir, lossy).string(), "--out", dir.string()}) == kExitOk);
    const auto e = nlohmann::json::parse(slurp(dir / "enumeration.json"));
    CHECK(e.at("count").get<int>() == 8);
    CHECK(e.at("catalan_bound").get<int>() == 14);
    CHECK(e.at("realizations").size() == 8);
    REQUIRE(run({"enumerate", "--config", write(dir, lossy).string(), "--out", dir.string(), "--horizon", "1"}) ==
            kExitOk);
    CHECK(nlohmann::json::parse(slurp(dir / "enumeration.json")).at("count").get<int>() == 1);
}
