#include <algorithm>
#include <cmath>

#include "bgf/errors.hpp"
#include "bgf/exponents.hpp"
#include "bgf/levy.hpp"
#include "doctest.h"

using namespace bgf;
using namespace bgf::levy;
namespace ex = bgf::exponents;

TEST_CASE("effective drift under the sampler convention") {
    // mpmath reference values (50 digits, series near y = 0)
    CHECK(effective_drift(ex::eve_triplet()) == doctest::Approx(-2.97865457497904395).epsilon(1e-11));
    CHECK(effective_drift(ex::circ_triplet()) == doctest::Approx(0.268065754299814225).epsilon(1e-10));
    CHECK(effective_drift(ex::drift_only_triplet(-1.25)) == -1.25);
}

TEST_CASE("internal exponent reproduces the paper-form exponents") {
    for (double l : {0.5, 1.0, 2.0, 3.0}) {
        CHECK(internal_exponent(ex::eve_triplet(), l) == doctest::Approx(ex::psi_eve(l).value).epsilon(1e-10));
        CHECK(internal_exponent(ex::circ_triplet(), l) == doctest::Approx(ex::psi_circ(l).value).epsilon(1e-10));
        auto [a, b] = hat_triplet();
        CHECK(internal_exponent(a, l) + internal_exponent(b, l) == doctest::Approx(ex::psi_hat(l)).epsilon(1e-9));
    }
}

TEST_CASE("hat pieces") {
    auto [a, b] = hat_triplet();
    CHECK(a.singular_at_zero());
    CHECK(a.density(-1e-8) > 1e10);
    CHECK(b.support_lo == -std::numeric_limits<double>::infinity());
    CHECK(b.support_hi == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
    CHECK(b.density(-0.5) == 0.0);
    CHECK(b.density(-1.0) > 0.0);
}

TEST_CASE("jump table intensities and moments") {
    const auto eve = ex::eve_triplet();
    const JumpTable table(eve, 1e-3);
    for (std::size_t k : {std::size_t{0}, std::size_t{100}, std::size_t{2000}, std::size_t{4000}}) {
        const double a = table.knot(k);
        const double direct = eve.integrate([](double) { return 1.0; }, -10.0, -a).value;
        CHECK(table.rate(k) == doctest::Approx(direct).epsilon(1e-9));
        const double var = eve.integrate([](double y) { return y * y; }, -a, 0.0).value;
        CHECK(table.small_variance(k) == doctest::Approx(var).epsilon(1e-9));
        const double h = eve.integrate([](double y) { return y; }, -10.0, -a).value;
        CHECK(table.large_compensator(k) == doctest::Approx(h).epsilon(1e-9));
    }
    CHECK(table.knot_for(1e-3) == 0);
    CHECK(table.knot_for(5e-4) == 0);
    CHECK(table.knot(table.knot_for(0.01)) <= 0.01);
    CHECK(table.knot(table.knot_for(0.01) + 1) > 0.01);
}

TEST_CASE("jump sizes follow the truncated measure") {
    const auto circ = ex::circ_triplet();
    const JumpTable table(circ, 1e-2);
    const double total = table.rate(0);
    Xoshiro256 eng(11);
    const int n = 200000;
    std::vector<double> draws(n);
    for (auto& d : draws) d = table.sample(0, eng.uniform());
    CHECK(*std::max_element(draws.begin(), draws.end()) <= -1e-2);
    for (double cut : {0.02, 0.1, 0.7, 3.0}) {
        const double p = circ.integrate([](double) { return 1.0; }, -kMaxJumpMagnitude, -cut).value / total;
        const double emp = std::count_if(draws.begin(), draws.end(), [&](double d) { return d <= -cut; }) /
                           static_cast<double>(n);
        CHECK(std::abs(emp - p) < 4.0 * std::sqrt(p * (1 - p) / n) + 1e-12);
    }
}

TEST_CASE("drift-only path is a straight line") {
    const auto path = sample_levy_path(ex::drift_only_triplet(-1.0), 1.0, 1e-3, 0.01, RngStream(3));
    CHECK(path.jumps.empty());
    CHECK(path.times.front() == 0.0);
    CHECK(path.times.back() == 1.0);
    CHECK(path.values.back() == doctest::Approx(-1.0).epsilon(1e-14));
    for (std::size_t i = 0; i < path.size(); ++i) CHECK(path.values[i] == doctest::Approx(-path.times[i]));
}

TEST_CASE("skeleton invariants and reproducibility") {
    const auto eve = ex::eve_triplet();
    const auto p1 = sample_levy_path(eve, 2.0, 1e-2, 1e-2, RngStream(42, {7}));
    const auto p2 = sample_levy_path(eve, 2.0, 1e-2, 1e-2, RngStream(42, {7}));
    const auto p3 = sample_levy_path(eve, 2.0, 1e-2, 1e-2, RngStream(42, {8}));
    CHECK(p1.values == p2.values);
    CHECK(p1.times == p2.times);
    CHECK(p1.values != p3.values);
    CHECK(p1.values[0] == 0.0);
    CHECK(!p1.jumps.empty());
    CHECK(std::is_sorted(p1.times.begin(), p1.times.end()));
    std::size_t j = 0;
    for (std::size_t i = 1; i < p1.size(); ++i) {
        if (!p1.is_jump[i]) continue;
        REQUIRE(j < p1.jumps.size());
        CHECK(p1.times[i] == p1.times[i - 1]);
        CHECK(p1.jumps[j].time == p1.times[i]);
        CHECK(p1.values[i] - p1.values[i - 1] == p1.jumps[j].size);
        CHECK(p1.jumps[j].size <= -1e-2);
        CHECK(p1.jumps[j].size > -std::log(2.0));
        CHECK(std::exp(p1.jumps[j].size) > 0.5);
        ++j;
    }
    CHECK(j == p1.jumps.size());
}

TEST_CASE("sampler argument checks") {
    const auto eve = ex::eve_triplet();
    CHECK_THROWS_AS(sample_levy_path(eve, 1.0, 0.0, 1e-3, RngStream(1)), DomainError);
    CHECK_THROWS_AS(sample_levy_path(eve, 1.0, 0.9, 1e-3, RngStream(1)), DomainError);
    CHECK_THROWS_AS(sample_levy_path(eve, 1e6, 1e-9, 1e-3, RngStream(1)), RateOverflow);
}

TEST_CASE("mgf Monte Carlo against the exponents") {
    SUBCASE("zero variance") {
        auto e = mgf_mc(ex::drift_only_triplet(-1.0), 1.0, 2.0, 100, RngStream(5));
        CHECK(e.point == doctest::Approx(-2.0).epsilon(1e-15));
        CHECK(e.std_error == 0.0);
    }
    const auto eve = LevySampler::for_process(Process::eve, 1e-2);
    SUBCASE("eve lambda 2, t 0.5") {
        auto e = mgf_mc(eve, 2.0, 0.5, 20000, RngStream(21), 1e-2);
        const double bias = 0.5 * std::abs(eve.small_jump_bias(2.0, 1e-2));
        CHECK(e.within(0.5 * ex::psi_eve(2.0).value, 3.0, bias));
        CHECK(e.method == stats::EstimateMethod::delta_log);
    }
    SUBCASE("circ lambda 1 brackets zero") {
        const auto circ = LevySampler::for_process(Process::circ, 1e-2);
        auto e = mgf_mc(circ, 1.0, 1.0, 20000, RngStream(22), 1e-2);
        CHECK(e.within(0.0, 3.0, std::abs(circ.small_jump_bias(1.0, 1e-2))));
    }
    SUBCASE("hat lambda 1, t 0.5") {
        const auto hat = LevySampler::for_process(Process::hat, 1e-2);
        auto e = mgf_mc(hat, 1.0, 0.5, 20000, RngStream(23), 1e-2);
        CHECK(e.within(0.5 * ex::psi_hat(1.0), 3.0, 0.5 * std::abs(hat.small_jump_bias(1.0, 1e-2))));
    }
}

TEST_CASE("small-jump bias shrinks with the cutoff") {
    const auto eve = LevySampler::for_process(Process::eve, 1e-4);
    const double b1 = std::abs(eve.small_jump_bias(3.0, 1e-2));
    const double b2 = std::abs(eve.small_jump_bias(3.0, 1e-3));
    CHECK(b1 > 0.0);
    CHECK(b2 < b1 / 20.0);
}

TEST_CASE("inverse tail intensity is accurate") {
    for (const auto& tr : {ex::eve_triplet(), ex::circ_triplet(), ex::hat_large_triplet()}) {
        const JumpTable table(tr, 1e-4);
        for (std::size_t k : {std::size_t{0}, std::size_t{1500}}) {
            for (double u : {1e-9, 1e-4, 0.01, 0.3, 0.77, 0.999999}) {
                const double a = -table.sample(k, u);
                const double n = tr.integrate([](double) { return 1.0; }, -kMaxJumpMagnitude, -a).value;
                CHECK(n == doctest::Approx(u * table.rate(k)).epsilon(1e-6));
            }
        }
    }
}
