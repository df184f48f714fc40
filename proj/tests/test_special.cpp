#include <cmath>
#include <numbers>

#include "bgf/errors.hpp"
#include "bgf/special.hpp"
#include "doctest.h"

using namespace bgf::special;

TEST_CASE("gamma: classical values") {
    CHECK(gamma_fn(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(gamma_fn(0.5) == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-14));
    CHECK(gamma_fn(5.0) == doctest::Approx(24.0).epsilon(1e-14));
}

TEST_CASE("gamma: negative half-integer from the reflection oracle") {
    // Gamma(-1/2) = pi / (sin(-pi/2) Gamma(3/2)) = -2 sqrt(pi)
    const double oracle = std::numbers::pi / (std::sin(-std::numbers::pi / 2) * (0.5 * std::sqrt(std::numbers::pi)));
    CHECK(gamma_fn(-0.5) == doctest::Approx(oracle).epsilon(1e-13));
    CHECK(gamma_fn(-0.5) == doctest::Approx(-3.5449077018110318).epsilon(1e-13));
}

TEST_CASE("gamma: relative error <= 1e-12 against libm on |x| <= 20") {
    double worst = 0.0;
    for (int i = -4000; i <= 4000; ++i) {
        const double x = i * 0.005 + 0.0012345;
        if (x <= 0.0 && x == std::floor(x)) continue;
        const double ref = std::tgamma(x);
        const double rel = std::abs(gamma_fn(x) - ref) / std::abs(ref);
        worst = std::max(worst, rel);
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("gamma: poles signal") {
    CHECK_THROWS_AS(gamma_fn(0.0), bgf::DomainError);
    CHECK_THROWS_AS(gamma_fn(-3.0), bgf::DomainError);
    CHECK_THROWS_WITH(gamma_fn(-1.0), "gamma pole");
    CHECK(rgamma(-2.0) == 0.0);
    CHECK(rgamma(0.0) == 0.0);
}

TEST_CASE("series helpers match direct formulas away from cancellation") {
    for (double x : {-0.09, -1e-4, 1e-7, 0.05, 0.3, -2.0}) {
        const long double ref = std::expm1((long double)x) - (long double)x;
        CHECK(expm1_minus_linear(x) == doctest::Approx((double)ref).epsilon(1e-13));
    }
    for (double lam : {0.5, 2.0, 2.5, 3.7}) {
        for (double u : {1e-9, 1e-3, 0.049, 0.3}) {
            const long double ref = std::pow(1.0L - u, (long double)lam) - 1.0L + lam * (long double)u;
            CHECK(binomial_remainder(lam, u) == doctest::Approx((double)ref).epsilon(1e-12));
        }
    }
    CHECK(exprel(0.0) == 1.0);
    CHECK(exprel(1.0) == doctest::Approx(std::numbers::e - 1.0));
}
