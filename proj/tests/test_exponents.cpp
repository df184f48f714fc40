#include <cmath>
#include <numbers>
#include <vector>

#include "bgf/errors.hpp"
#include "bgf/exponents.hpp"
#include "doctest.h"

using namespace bgf::exponents;

namespace {
const double kLn2 = std::numbers::ln2;
const double kSqrtPi = std::sqrt(std::numbers::pi);

// Frozen with a 40-digit tanh-sinh oracle (mpmath) on the same integrals,
// with the numerator expanded in series near u = 0.
constexpr double kPsiHalf = -1.1894609250204682612;
constexpr double kPsi1 = -1.8426354638471225561;
constexpr double kPsi2 = -1.8426354638471225561;
constexpr double kPsi3 = -0.46065886596178063902;
constexpr double kPsiCircHalf = -0.46065886596178063902;
constexpr double kPsiCirc2 = 2.1708037636748029781;
constexpr double kPsiCirc3 = 5.4270094091870074452;
}  // namespace

TEST_CASE("levy_density_eve: support and log-pushforward identity") {
    CHECK(levy_density_eve(-kLn2 - 0.1) == 0.0);
    CHECK(levy_density_eve(0.1) == 0.0);
    const double edge = levy_density_eve(-kLn2 + 1e-9);
    CHECK(std::isfinite(edge));
    CHECK(edge == doctest::Approx(kAlpha * std::pow(2.0, 1.5) * std::pow(2.0, 2.5)).epsilon(1e-7));
    // nu(dy) is the image of 1_{[1/2,1]}(x) alpha (x(1-x))^{-5/2} dx under x -> log x,
    // so its density in y is alpha x (x(1-x))^{-5/2} with x = e^y.
    for (int i = 1; i < 200; ++i) {
        const double y = -kLn2 + kLn2 * i / 200.0;
        const double x = std::exp(y);
        const double push = kAlpha * x * std::pow(x * (1.0 - x), -2.5);
        CHECK(levy_density_eve(y) == doctest::Approx(push).epsilon(1e-12));
    }
}

TEST_CASE("levy_density_circ examples") {
    CHECK(levy_density_circ(-20.0) == doctest::Approx(kAlpha * std::exp(-10.0)).epsilon(1e-8));
    CHECK(levy_density_circ(-kLn2) == doctest::Approx(4.0 * kAlpha).epsilon(1e-14));
    CHECK(levy_density_circ(0.1) == 0.0);
}

TEST_CASE("psi_eve against frozen oracle values") {
    CHECK(psi_eve(0.0).value == 0.0);
    CHECK(psi_eve(0.5).value == doctest::Approx(kPsiHalf).epsilon(1e-11));
    CHECK(psi_eve(1.0).value == doctest::Approx(kPsi1).epsilon(1e-11));
    CHECK(psi_eve(2.0).value == doctest::Approx(kPsi2).epsilon(1e-11));
    CHECK(psi_eve(3.0).value == doctest::Approx(kPsi3).epsilon(1e-11));
    CHECK(psi_eve(2.0).error <= 1e-10 * (1.0 + std::abs(kPsi2)));
    CHECK_THROWS_AS(psi_eve(-1.0), bgf::DomainError);
}

TEST_CASE("psi_eve at the roots of kappa equals minus the (1 - e^y)^p mass") {
    const auto eve = eve_triplet();
    for (double p : {2.0, 3.0}) {
        auto mass = eve.integrate([p](double y) { return std::pow(-std::expm1(y), p); });
        CHECK(psi_eve(p).value < 0.0);
        CHECK(psi_eve(p).value == doctest::Approx(-mass.value).epsilon(1e-10));
    }
}

TEST_CASE("psi_circ: zeros at 0 and 1, frozen values, positivity beyond 1") {
    CHECK(psi_circ(0.0).value == 0.0);
    CHECK(std::abs(psi_circ(1.0).value) < 1e-11);
    CHECK(psi_circ(0.5).value == doctest::Approx(kPsiCircHalf).epsilon(1e-11));
    CHECK(psi_circ(2.0).value == doctest::Approx(kPsiCirc2).epsilon(1e-11));
    CHECK(psi_circ(3.0).value == doctest::Approx(kPsiCirc3).epsilon(1e-11));
    CHECK(psi_circ(2.0).value > 0.0);
}

TEST_CASE("kappa_closed examples") {
    CHECK(kappa_closed(2.0).value == 0.0);
    CHECK(kappa_closed(3.0).value == 0.0);
    CHECK(kappa_closed(2.5).value == doctest::Approx(kPhiCoef / (-2.0 * kSqrtPi)).epsilon(1e-13));
    CHECK(kappa_closed(2.5).value == doctest::Approx(-0.46063).epsilon(1e-3));
    CHECK(kappa_closed(4.0).value == doctest::Approx(kPhiCoef * 0.75 * kSqrtPi).epsilon(1e-13));
    CHECK(kappa_closed(4.0).value == doctest::Approx(2.1709).epsilon(1e-4));
    CHECK(kappa_closed(1.0).infinite);
    CHECK(kappa_closed(1.5).infinite);
    CHECK_FALSE(kappa_closed(1.5000001).infinite);
    CHECK_THROWS_AS(kappa_closed(0.0), bgf::DomainError);
}

TEST_CASE("kappa_integral matches the closed form on the standard grid") {
    for (double p : {1.6, 1.8, 2.0, 2.2, 2.5, 3.0, 3.5, 4.0, 5.0}) {
        const double closed = kappa_closed(p).value;
        const double integral = kappa_integral(p).value;
        CAPTURE(p);
        CHECK(std::abs(integral - closed) <= 1e-8 * (1.0 + std::abs(closed)));
    }
    CHECK(std::abs(kappa_integral(2.0).value) < 1e-10);
    CHECK(std::abs(kappa_integral(3.0).value) < 1e-10);
    CHECK_THROWS_AS(kappa_integral(1.5), bgf::DomainError);
}

TEST_CASE("psi_hat examples") {
    CHECK(psi_hat(1.0) == doctest::Approx(kappa_closed(4.0).value).epsilon(1e-14));
    CHECK(psi_hat(2.0) == doctest::Approx(kPhiCoef * 15.0 / 8.0 * kSqrtPi).epsilon(1e-13));
    CHECK(psi_hat(2.0) == doctest::Approx(5.4272).epsilon(1e-4));
    CHECK(std::abs(psi_hat(1e-12)) < 1e-11);
    CHECK_THROWS_AS(psi_hat(0.0), bgf::DomainError);
    for (double lam : {0.5, 1.0, 2.0, 5.0, 0.01, 7.3})
        CHECK(std::abs(psi_hat(lam) - kappa_closed(3.0 + lam).value) <= 1e-12 * (1.0 + psi_hat(lam)));
}

TEST_CASE("phi examples") {
    CHECK(phi(0.0) == 0.0);
    CHECK(phi(1.0) == doctest::Approx(1.63299).epsilon(1e-5));
    CHECK(phi(4.0) == doctest::Approx(kPhiCoef * 8.0).epsilon(1e-15));
}

TEST_CASE("convexity of psi, psi_circ, kappa and psi_hat on grids") {
    auto second_diffs_ok = [](auto f, double lo, double hi, int n) {
        std::vector<double> v;
        for (int i = 0; i <= n; ++i) v.push_back(f(lo + (hi - lo) * i / n));
        for (int i = 1; i < n; ++i)
            if (v[i - 1] - 2 * v[i] + v[i + 1] < -1e-8) return false;
        return true;
    };
    CHECK(second_diffs_ok([](double l) { return psi_eve(l).value; }, 0.0, 6.0, 30));
    CHECK(second_diffs_ok([](double l) { return psi_circ(l).value; }, 0.0, 6.0, 30));
    CHECK(second_diffs_ok([](double p) { return kappa_closed(p).value; }, 1.55, 6.0, 40));
    CHECK(second_diffs_ok([](double l) { return psi_hat(l); }, 0.01, 6.0, 40));
}

TEST_CASE("triplets reproduce the exponents through the generic quadrature route") {
    const auto eve = eve_triplet();
    const auto circ = circ_triplet();
    for (double lam : {0.5, 1.0, 2.0, 3.0}) {
        CHECK(eve.exponent(lam).value == doctest::Approx(psi_eve(lam).value).epsilon(1e-10));
        CHECK(circ.exponent(lam).value == doctest::Approx(psi_circ(lam).value).epsilon(1e-9));
    }
    const auto a = hat_tilted_triplet();
    const auto b = hat_large_triplet();
    for (double lam : {0.25, 0.5, 1.0, 2.0, 3.5}) {
        const double hat = a.exponent(lam).value + b.exponent(lam).value;
        CAPTURE(lam);
        CHECK(hat == doctest::Approx(psi_hat(lam)).epsilon(1e-9));
    }
    CHECK_NOTHROW(eve.validate());
    CHECK_NOTHROW(circ.validate());
    CHECK_NOTHROW(a.validate());
    CHECK_NOTHROW(b.validate());
    CHECK(drift_only_triplet(-1.0).exponent(2.0).value == -2.0);
}
