#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "bgf/config.hpp"
#include "bgf/errors.hpp"
#include "bgf/experiments.hpp"
#include "bgf/rng.hpp"
#include "doctest.h"

using namespace bgf;
using namespace bgf::experiments;

TEST_CASE("config text round trip is lossless") {
    for (const auto& spec : registry()) {
        auto c = default_config(spec.id);
        c.master_seed = 987654321;
        c.output_dir = "somewhere/else";
        const auto text = config::to_text(c, spec.params);
        CHECK(load_config(text) == c);
    }
    auto c = default_config("gf-cumulant");
    c.params["p"] = 0.1 + 0.2;
    CHECK(load_config(config::to_text(c, find_experiment(c.id).params)) == c);
}

TEST_CASE("config parsing rejects unknown or malformed entries") {
    CHECK_THROWS_AS(load_config("[experiment]\nid = gf-cumulant\n[params]\nfloor = 1\n"), ConfigError);
    CHECK_THROWS_AS(load_config("[experiment]\nid = gf-cumulant\ncolour = red\n"), ConfigError);
    CHECK_THROWS_AS(load_config("[experiment]\nid = gf-cumulant\n[extra]\n"), ConfigError);
    CHECK_THROWS_AS(load_config("[experiment]\nid = gf-cumulant\n[params]\np = two\n"), ConfigError);
    CHECK_THROWS_AS(load_config("[experiment]\nid = gf-cumulant\nreplicates = -3\n"), ConfigError);
    CHECK_THROWS_AS(load_config("[experiment]\nid = gf-cumulant\nseed = 1\nseed = 2\n"), ConfigError);
    CHECK_THROWS_AS(load_config("[params]\np = 2\n"), ConfigError);
    CHECK_THROWS_AS(load_config("[experiment]\nid = nope\n"), ConfigError);

    const auto c = load_config("# comment\n[experiment]\nid = gf-cumulant ; trailing\nreplicates = 2e3\n[params]\np = 3\n");
    CHECK(c.replicates == 2000);
    CHECK(c.real("p") == 3.0);
    CHECK(c.real("mass_floor") == default_config("gf-cumulant").real("mass_floor"));
    CHECK(c.master_seed == find_experiment("gf-cumulant").default_seed);
    CHECK_THROWS_AS(c.count("p"), ConfigError);
}

TEST_CASE("unknown experiment lists the registered ids") {
    try {
        find_experiment("no-such-thing");
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        for (const auto& s : registry()) CHECK(msg.find(s.id) != std::string::npos);
    }
}

TEST_CASE("registry covers every acceptance criterion") {
    for (int k = 1; k <= 12; ++k) {
        int found = 0;
        for (const auto& s : registry()) found += s.criterion == k;
        CHECK(found == 1);
    }
    for (const auto& s : registry()) {
        CHECK(!s.anchor.empty());
        CHECK(static_cast<bool>(s.run));
    }
}

TEST_CASE("tail slope of synthetic power laws") {
    Random rng = RngStream(1).random();
    for (double a : {6.0, 2.0}) {
        std::vector<double> xs(200000);
        for (auto& x : xs) x = std::pow(rng.uniform(), -1.0 / a);
        const auto fit = fit_tail_slope(xs, 1.5, 3.0, 16, 50, 7);
        CHECK(fit.slope == doctest::Approx(-a).epsilon(0.03));
        CHECK(fit.std_error > 0.0);
        CHECK(std::abs(fit.slope + a) < 5.0 * fit.std_error + 1e-3);
        CHECK(fit.r.size() == 16);
    }
    std::vector<double> few(50, 2.0);
    try {
        fit_tail_slope(few, 1.5, 3.0);
        FAIL("expected an error");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("50") != std::string::npos);
    }
}

TEST_CASE("two-sample report") {
    std::vector<double> a{1, 2, 3, 4, 5, 6, 7, 8};
    const auto same = two_sample_report(a, a, 199, 3);
    CHECK(same.ks == 0.0);
    CHECK(same.p_value == 1.0);
    CHECK(same.quantiles_a == same.quantiles_b);

    std::vector<double> b{11, 12, 13, 14, 15, 16, 17, 18};
    const auto apart = two_sample_report(a, b, 199, 3);
    CHECK(apart.ks == 1.0);
    CHECK(apart.p_value < 0.05);
    CHECK(two_sample_report(a, b, 199, 3).p_value == apart.p_value);
    CHECK_THROWS_AS(two_sample_report({}, b), DomainError);
}

TEST_CASE("Hill estimator on a Pareto sample") {
    Random rng = RngStream(2).random();
    std::vector<double> xs(100000);
    for (auto& x : xs) x = std::pow(rng.uniform(), -1.0 / 1.5);
    CHECK(hill_index(xs, 2000) == doctest::Approx(1.5).epsilon(0.08));
    CHECK_THROWS_AS(hill_index(xs, 0), DomainError);
}

TEST_CASE("fast experiments pass and reports are deterministic") {
    for (const char* id : {"kappa-identity", "psi-hat"}) {
        const auto c = default_config(id);
        const auto a = execute(c);
        const auto b = execute(c);
        CHECK(a.passed());
        CHECK(a.to_json(false).dump() == b.to_json(false).dump());
    }
    auto c = default_config("structural-invariants");
    c.replicates = 20;
    const auto a = execute(c);
    CHECK(a.passed());
    CHECK(a.to_json(false).dump() == execute(c).to_json(false).dump());
}

TEST_CASE("run_experiment writes the report and artifacts") {
    const auto dir = std::filesystem::temp_directory_path() / "bgf-test-output";
    std::filesystem::remove_all(dir);
    auto c = default_config("kappa-identity");
    c.output_dir = dir.string();
    Report rep;
    CHECK(run_experiment(c, &rep) == 0);
    CHECK(std::filesystem::exists(dir / "report.json"));
    CHECK(std::filesystem::exists(dir / "kappa.csv"));
    CHECK(load_config(config::read_file((dir / "config.ini").string())) == c);
    std::ifstream in(dir / "report.json");
    const auto j = json::parse(in);
    CHECK(j["passed"] == true);
    CHECK(j["id"] == "kappa-identity");

    auto bad = c;
    bad.params["rel_tol"] = 0.0;
    bad.params["root_tol"] = -1.0;
    CHECK(run_experiment(bad) != 0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("output root follows the environment") {
    ::setenv("BGF_OUTPUT_ROOT", "/tmp/bgf-root", 1);
    CHECK(output_root() == std::filesystem::path("/tmp/bgf-root"));
    CHECK(output_dir(default_config("psi-hat")) == std::filesystem::path("/tmp/bgf-root/psi-hat"));
    ::unsetenv("BGF_OUTPUT_ROOT");
    CHECK(output_root() == std::filesystem::path("out"));
}
