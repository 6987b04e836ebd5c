#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "exittime/error.hpp"
#include "exittime/run.hpp"

using namespace exittime;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an exception");
    return ErrorCode::InvalidArgument;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("exittime_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kBrownian = R"({
  "mode": "pde",
  "sde": {"family": "brownian_periodic_drift", "params": {"sigma": 1.0, "period": 1.0}},
  "domain": {"left": 0.0, "right": 1.0},
  "grid": {"n_x": 499, "n_t": 4},
  "solver": {"method": "banach", "tol_F": 1e-12}
})";

}  // namespace

TEST_CASE("unknown keys and bad values are rejected") {
    CHECK(code_of([] { parse_config(R"({"mode": "pde", "colour": 1})"); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_config(R"({"grid": {"nx": 10}})"); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_config(R"({"solver": {"method": "newton"}})"); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_config(R"({"mode": "plot"})"); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_config(R"({"grid": {"n_x": 1.5}})"); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_config("{not json"); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { validate(parse_config(R"({"sde": {"family": "duffing", "params": {"B": 1}}})")); }) ==
          ErrorCode::InvalidConfig);
    CHECK(code_of([] { validate(parse_config(R"({"domain": {"left": -1, "right": null}})")); }) ==
          ErrorCode::InvalidConfig);
    CHECK(code_of([] { validate(parse_config(R"({"mode": "mc", "initial_states": [5.0]})")); }) ==
          ErrorCode::InvalidConfig);
}

TEST_CASE("canonical form and hash") {
    const auto a = parse_config(kBrownian);
    auto b = parse_config(kBrownian);
    CHECK(canonical_json(a) == canonical_json(b));
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    b.threads = 4;
    CHECK(config_hash(a) == config_hash(b));
    b.n_x = 101;
    CHECK(config_hash(a) != config_hash(b));
    CHECK(canonical_json(parse_config(canonical_json(a))) == canonical_json(a));
}

TEST_CASE("truncation directive") {
    const auto c = parse_config(R"({"domain": {"left": -1, "right": null, "truncate": true}})");
    const auto p = resolve(c);
    REQUIRE(p.certificate.has_value());
    CHECK(p.domain.bounded());
    CHECK(p.domain.upper() == doctest::Approx(p.certificate->R_star));
    CHECK(p.certificate->R_star <= 3.0);
}

TEST_CASE("pde mode on brownian motion") {
    const auto out = scratch("pde");
    const auto outcome = run(parse_config(kBrownian), out);
    REQUIRE(outcome.files.size() == 2);
    std::ifstream csv(out / "tau.csv");
    std::string line;
    std::getline(csv, line);
    CHECK(line.rfind("# exittime ", 0) == 0);
    CHECK(line.find("config_hash=" + config_hash(parse_config(kBrownian))) != std::string::npos);
    std::getline(csv, line);
    CHECK(line == "x,tau");
    std::vector<std::pair<double, double>> rows;
    while (std::getline(csv, line)) {
        const auto comma = line.find(',');
        rows.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    }
    REQUIRE(rows.size() == 499);
    CHECK(rows[249].first == doctest::Approx(0.5));
    CHECK(rows[249].second == doctest::Approx(0.25).epsilon(1e-3));
    const auto report = nlohmann::json::parse(slurp(out / "solver.json"));
    CHECK(report["solve"]["converged"].get<bool>());
    CHECK(report["version"] == version);
    fs::remove_all(out);
}

TEST_CASE("identical config and seed give byte-identical output") {
    const char* cfg = R"({
      "mode": "mc",
      "sde": {"family": "brownian_periodic_drift", "params": {"sigma": 1.0, "s_amp": 0.5, "omega": 6.283185307179586}},
      "domain": {"left": 0.0, "right": 1.0},
      "mc": {"dt": 1e-3, "n_paths": 50, "seed": 11},
      "initial_states": {"count": 5}
    })";
    const auto a = scratch("mc_a"), b = scratch("mc_b");
    run(parse_config(cfg), a);
    auto c = parse_config(cfg);
    c.threads = 2;
    run(c, b);
    CHECK(slurp(a / "mc.csv") == slurp(b / "mc.csv"));
    CHECK(slurp(a / "mc.csv").find("x,mean,std_error,n_censored") != std::string::npos);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("compare mode reports both error summaries") {
    const char* cfg = R"({
      "mode": "compare",
      "sde": {"family": "brownian_periodic_drift", "params": {"sigma": 1.0, "period": 1.0}},
      "domain": {"left": -0.5, "right": 0.5},
      "grid": {"n_x": 199, "n_t": 4},
      "mc": {"dt": 1e-4, "n_paths": 400, "seed": 2},
      "initial_states": [-0.25, 0.0, 0.25]
    })";
    const auto out = scratch("compare");
    run(parse_config(cfg), out);
    const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
    CHECK(summary.contains("rel_err_full"));
    CHECK(summary.contains("rel_err_right_well"));
    CHECK(summary["rel_err_full"].get<double>() < 0.1);
    fs::remove_all(out);
}

TEST_CASE("survival mode") {
    const char* cfg = R"({
      "mode": "survival",
      "sde": {"family": "brownian_periodic_drift", "params": {"sigma": 1.0, "period": 1.0}},
      "domain": {"left": 0.0, "right": 1.0},
      "grid": {"n_x": 199, "n_t": 200},
      "survival": {"points": [0.5], "tail_tol": 1e-10}
    })";
    const auto out = scratch("survival");
    run(parse_config(cfg), out);
    const std::string text = slurp(out / "survival.csv");
    CHECK(text.find("x,node,duration,steps") != std::string::npos);
    fs::remove_all(out);
}

TEST_CASE("resonance mode") {
    const char* cfg = R"({
      "mode": "resonance",
      "sde": {"family": "duffing", "params": {"omega": 0.05}},
      "grid": {"n_x": 60, "n_t": 64},
      "resonance": {"sweep": {"lo": 0.3, "hi": 0.6, "points": 4}, "find": false}
    })";
    const auto out = scratch("resonance");
    const auto outcome = run(parse_config(cfg), out);
    CHECK(outcome.files.size() == 2);
    const std::string text = slurp(out / "sweep.csv");
    CHECK(text.find("sigma,tau_at_one") != std::string::npos);
    fs::remove_all(out);
}

TEST_CASE("validation failure writes nothing") {
    const auto out = scratch("invalid");
    auto c = parse_config(kBrownian);
    c.s = 0.3;  // not a lattice time for n_t = 4
    CHECK(code_of([&] { run(c, out); }) == ErrorCode::InvalidConfig);
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("command line tool") {
    const char* cli = std::getenv("EXITTIME_CLI");
    if (!cli) return;
    const auto out = scratch("cli_bad");
    const std::string bad = std::string(cli) + " pde --method nope --out " + out.string() + " 2>/dev/null";
    CHECK(std::system(bad.c_str()) != 0);
    CHECK_FALSE(fs::exists(out));

    const auto good = scratch("cli_good");
    const std::string ok = std::string(cli) +
                           " pde --family brownian_periodic_drift --param period=1 --left 0 --right 1 --n-x 99 "
                           "--n-t 2 --out " + good.string() + " >/dev/null 2>&1";
    CHECK(std::system(ok.c_str()) == 0);
    CHECK(fs::exists(good / "tau.csv"));
    fs::remove_all(good);
}

TEST_CASE("shipped configurations load and validate") {
    int n = 0;
    for (const auto& entry : fs::directory_iterator(EXITTIME_CONFIG_DIR)) {
        if (entry.path().extension() != ".json") continue;
        CAPTURE(entry.path().string());
        const auto c = load_config(entry.path());
        CHECK_NOTHROW(validate(c));
        CHECK_NOTHROW(resolve(c));
        ++n;
    }
    CHECK(n >= 4);
}
