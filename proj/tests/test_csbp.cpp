#include <cmath>

#include "bgf/csbp.hpp"
#include "bgf/errors.hpp"
#include "doctest.h"

using namespace bgf;
using namespace bgf::csbp;

TEST_CASE("transition exponent") {
    CHECK(u_t(1e-12, 2.0) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(u_t(1.0, 1e18) == doctest::Approx(1.5).epsilon(1e-8));
    CHECK(u_t(2.0, 1e18) == doctest::Approx(1.5 / 4.0).epsilon(1e-8));
    CHECK(u_t(1.0, 1.0) == doctest::Approx(std::pow(1.0 + std::sqrt(2.0 / 3.0), -2.0)).epsilon(1e-15));
    CHECK(u_t(1.0, 1.0) == doctest::Approx(0.3030615).epsilon(1e-6));
    CHECK_THROWS_AS(u_t(1.0, 0.0), DomainError);
}

TEST_CASE("flow identity on a grid") {
    CHECK(flow_identity_error({0.1, 0.5, 1.0, 2.0, 5.0}, {0.1, 0.5, 1.0, 3.0, 10.0}) < 1e-12);
}

TEST_CASE("exit probability") {
    CHECK(exit_prob(2.0, 2.0) == 1.0);
    CHECK(exit_prob(3.0, 2.0) == 1.0);
    CHECK(exit_prob(1.0, 2.0) == doctest::Approx(1.0 - std::sqrt(0.5)).epsilon(1e-15));
    CHECK(exit_prob(1.0, 2.0) == doctest::Approx(0.29289).epsilon(1e-4));
    for (double x : {1e-3, 1e-4, 1e-5}) CHECK(exit_prob(x, 1.0) == doctest::Approx(x / 2.0).epsilon(x));
    double prev = 0.0;
    for (double x = 0.05; x < 2.0; x += 0.05) {
        CHECK(exit_prob(x, 2.0) > prev);
        prev = exit_prob(x, 2.0);
    }
}

TEST_CASE("snake-measure constants") {
    CHECK(n0_constants(N0Kind::range_tail)(1.0) == 1.5);
    CHECK(n0_constants(N0Kind::range_tail)(2.0) == 0.375);
    CHECK(n0_constants(N0Kind::Lz_mass)(2.0) == 0.25);
    // mpmath: 1.5 pi^{-3/2} Gamma(1/3)^3 Gamma(7/6)^3
    CHECK(local_time_constant() == doctest::Approx(4.1352761825329258).epsilon(1e-12));
    CHECK(n0_constants(N0Kind::star_height_tail)(2.0) == doctest::Approx(2.0 * local_time_constant() / 8.0));
    CHECK(frag_local_time_factor() == doctest::Approx(0.23032943298089031).epsilon(1e-14));
    CHECK(parse_n0_kind("Lz_mass") == N0Kind::Lz_mass);
    CHECK_THROWS_AS(parse_n0_kind("nope"), DomainError);
}

TEST_CASE("csbp Monte Carlo near t = 0") {
    const auto e = csbp_mc_check(1.0, 0.01, 1.0, 4000, RngStream(4), 1e-3);
    CHECK(std::abs(e.point - std::exp(-u_t(0.01, 1.0))) < 3.0 * e.std_error + 2e-3);
    CHECK(std::abs(e.point - std::exp(-1.0)) < 0.02);
}

TEST_CASE("csbp branching property") {
    const std::size_t n = 20000;
    const auto a = csbp_mc_check(0.5, 0.5, 1.0, n, RngStream(30), 2e-3);
    const auto b = csbp_mc_check(1.0, 0.5, 1.0, n, RngStream(31), 2e-3);
    const auto ab = csbp_mc_check(1.5, 0.5, 1.0, n, RngStream(32), 2e-3);
    const double prod = a.point * b.point;
    const double se = std::sqrt(std::pow(a.std_error * b.point, 2) + std::pow(b.std_error * a.point, 2) +
                                std::pow(ab.std_error, 2));
    CHECK(std::abs(ab.point - prod) < 3.5 * se);
}

TEST_CASE("csbp transition and exit at moderate sample size") {
    const auto l = laplace_check(1.0, 0.5, 1.0, 20000, RngStream(40), 2e-3);
    CHECK(l.pass());
    const auto x = exit_check(1.0, 2.0, 20000, RngStream(41), 2e-3);
    CHECK(x.pass());
}
