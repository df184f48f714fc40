#include <algorithm>
#include <cmath>

#include "bgf/errors.hpp"
#include "bgf/exponents.hpp"
#include "bgf/lamperti.hpp"
#include "bgf/stats.hpp"
#include "doctest.h"

using namespace bgf;
using namespace bgf::lamperti;
namespace ex = bgf::exponents;

namespace {

levy::LevyPathSkeleton drift_path(double c, double horizon, double dt) {
    return levy::sample_levy_path(ex::drift_only_triplet(-c), horizon, 1e-3, dt, RngStream(1));
}

}  // namespace

TEST_CASE("deterministic drift gives the closed-form pssMp") {
    for (double c : {0.5, 1.0, 3.0}) {
        for (double z : {1.0, 4.0, 0.3}) {
            const auto sk = drift_path(c, 60.0 / c, 0.01);
            const auto x = pssmp_from_levy(sk, z);
            const double h0 = 2.0 * std::sqrt(z) / c;
            CHECK(x.absorbed());
            CHECK(x.absorption_time == doctest::Approx(h0).epsilon(1e-12));
            double sup = 0.0;
            for (std::size_t i = 0; i < x.times.size(); ++i) {
                const double r = x.times[i];
                const double w = std::max(0.0, 1.0 - c * r / (2.0 * std::sqrt(z)));
                sup = std::max(sup, std::abs(x.values[i] - z * w * w));
            }
            CHECK(sup < 1e-6);
            for (double f : {0.013, 0.31, 0.5, 0.77, 0.999}) {
                const double r = f * h0;
                const double w = 1.0 - c * r / (2.0 * std::sqrt(z));
                CHECK(x.value_at(r) == doctest::Approx(z * w * w).epsilon(1e-10));
            }
            CHECK(x.value_at(h0 * 1.01) == 0.0);
        }
    }
}

TEST_CASE("zero Levy path keeps the mass constant") {
    const auto sk = levy::sample_levy_path(ex::drift_only_triplet(0.0), 2.0, 1e-3, 0.1, RngStream(1));
    const auto x = pssmp_from_levy(sk, 4.0, 0.0, 1e-6);
    CHECK(!x.absorbed());
    for (double v : x.values) CHECK(v == 4.0);
    CHECK(x.times.back() == doctest::Approx(2.0 * 2.0));
    CHECK_THROWS_AS(x.value_at(100.0), OutOfHorizon);
}

TEST_CASE("short skeleton is rejected") {
    const auto sk = drift_path(1.0, 1.0, 0.01);
    CHECK_THROWS_AS(pssmp_from_levy(sk, 1.0), HorizonInsufficient);
    try {
        pssmp_from_levy(sk, 1.0);
    } catch (const HorizonInsufficient& e) {
        CHECK(e.tail_bound() == doctest::Approx(2.0 * std::exp(-0.5)).epsilon(1e-9));
    }
}

TEST_CASE("self-similarity of the construction is exact") {
    const auto sk = levy::sample_levy_path(ex::eve_triplet(), 30.0, 1e-2, 1e-2, RngStream(9, {1}));
    const auto base = pssmp_from_levy(sk, 0.7);
    for (double c : {4.0, 16.0, 0.25, 1.0 / 64.0}) {
        const auto scaled = pssmp_from_levy(sk, c * 0.7, 1.0);
        REQUIRE(scaled.times.size() == base.times.size());
        const double rc = std::sqrt(c);
        bool exact = true;
        for (std::size_t i = 0; i < base.times.size(); ++i)
            exact = exact && scaled.values[i] / c == base.values[i] && scaled.times[i] / rc == base.times[i];
        CHECK(exact);
        CHECK(scaled.absorption_time / rc == base.absorption_time);
    }
    const auto other = pssmp_from_levy(sk, 3.0 * 0.7, 1.0);
    for (std::size_t i = 0; i < base.times.size(); i += 97) {
        CHECK(other.values[i] / 3.0 == doctest::Approx(base.values[i]).epsilon(1e-14));
        CHECK(other.times[i] / std::sqrt(3.0) == doctest::Approx(base.times[i]).epsilon(1e-13));
    }
}

TEST_CASE("eve pssMp jumps") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto sk = levy::sample_levy_path(ex::eve_triplet(), 30.0, 1e-2, 1e-2, RngStream(seed));
        const auto x = pssmp_from_levy(sk, 1.0);
        CHECK(x.absorbed());
        CHECK(x.jumps.size() == sk.jumps.size());
        std::size_t j = 0;
        for (std::size_t i = 1; i < x.times.size(); ++i) {
            if (!x.is_jump[i]) {
                CHECK(x.times[i] >= x.times[i - 1]);
                continue;
            }
            const double pre = x.values[i - 1], post = x.values[i];
            CHECK(x.times[i] == x.times[i - 1]);
            CHECK(post > 0.0);
            CHECK(post > pre - post);
            CHECK(-x.jumps[j].size == doctest::Approx(pre * -std::expm1(sk.jumps[j].size)).epsilon(1e-12));
            ++j;
        }
        for (std::size_t i = 0; i + 1 < x.values.size(); ++i) CHECK(x.values[i] > 0.0);
    }
}

TEST_CASE("conditioned eve is never absorbed") {
    const auto hat = levy::LevySampler::for_process(levy::Process::hat, 1e-2);
    CHECK(hat.psi_half() > 0.0);
    const auto sk = hat.sample_path(1.0, 1e-2, 1e-2, RngStream(3));
    const auto x = pssmp_from_levy(sk, 1e-4);
    CHECK(!x.absorbed());
}

TEST_CASE("stable increments have the prescribed Laplace transform") {
    const std::size_t n = 400000;
    std::vector<double> s(n);
    Random rng = RngStream(17).random();
    for (auto& v : s) v = stable_unit(rng);
    for (double l : {0.5, 1.0, 2.0}) {
        std::vector<double> e(n);
        for (std::size_t i = 0; i < n; ++i) e[i] = std::exp(-l * s[i]);
        const auto est = stats::log_mean_estimate(e);
        CHECK(est.within(ex::phi(l), 3.0));
    }
    CHECK(stats::quantile(s, 0.99) > -stats::quantile(s, 0.01));
}

TEST_CASE("stable scaling over time 4t") {
    const std::size_t n = 20000;
    std::vector<double> sum4(n), one(n);
    Random rng = RngStream(18).random();
    const double dt = 0.01;
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int k = 0; k < 4; ++k) acc += stable_scale(dt) * stable_unit(rng);
        sum4[i] = acc;
        one[i] = std::pow(4.0, 2.0 / 3.0) * stable_scale(dt) * stable_unit(rng);
    }
    const double d = stats::ks_two_sample(sum4, one);
    CHECK(d < 1.63 * std::sqrt(2.0 / n));
    CHECK(stable_spectrally_positive(1.0, 0.01, RngStream(2)).size() == 101);
}

TEST_CASE("csbp from a deterministic decreasing path") {
    levy::LevyPathSkeleton u;
    const double x = 2.0;
    for (int i = 0; i <= 200; ++i) u.push(i * 0.01, x - i * 0.01);
    u.values.back() = 0.0;
    const auto y = csbp_from_stable(u, x);
    CHECK(y.extinction_time == kInfinity);
    for (double t : {0.0, 0.1, 0.5, 1.7, 3.0, 9.0}) CHECK(y.value_at(t) == doctest::Approx(x * std::exp(-t)).epsilon(1e-12));
}

TEST_CASE("csbp contract violations") {
    levy::LevyPathSkeleton u;
    for (int i = 0; i <= 10; ++i) u.push(i * 0.1, 1.0);
    CHECK_THROWS_AS(csbp_from_stable(u, 1.0), ContractViolation);
    levy::LevyPathSkeleton w;
    w.push(0.0, 1.0);
    w.push(0.1, 0.0);
    CHECK_THROWS_AS(csbp_from_stable(w, 2.0), ContractViolation);
}

TEST_CASE("inverse time change") {
    SUBCASE("constant") {
        CsbpPath y;
        y.x = 1.5;
        for (int i = 0; i <= 10; ++i) {
            y.times.push_back(i * 0.2);
            y.values.push_back(1.5);
            y.is_jump.push_back(0);
        }
        const auto u = csbp_inverse_timechange(y);
        CHECK(u.times.back() == doctest::Approx(1.5 * 2.0));
        for (double v : u.values) CHECK(v == 1.5);
    }
    SUBCASE("single upward jump") {
        CsbpPath y;
        y.x = 1.0;
        y.times = {0.0, 0.5, 0.5, 1.0};
        y.values = {1.0, 1.0, 3.0, 3.0};
        y.is_jump = {0, 0, 1, 0};
        const auto u = csbp_inverse_timechange(y);
        REQUIRE(u.jumps.size() == 1);
        CHECK(u.jumps[0].time == doctest::Approx(0.5));
        CHECK(u.jumps[0].size == 2.0);
        CHECK(u.times.back() == doctest::Approx(0.5 + 1.5));
    }
    SUBCASE("round trip on sampled paths") {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto u = stopped_stable_path(1.0, 1e-3, RngStream(seed));
            const auto y = csbp_from_stable(u, 1.0);
            const auto back = csbp_from_stable(csbp_inverse_timechange(y), 1.0);
            REQUIRE(back.times.size() == y.times.size());
            double sup = 0.0;
            for (std::size_t i = 0; i < y.times.size(); ++i) {
                sup = std::max(sup, std::abs(back.values[i] - y.values[i]));
                sup = std::max(sup, std::abs(back.times[i] - y.times[i]) / (1.0 + y.times[i]));
            }
            CHECK(sup < 1e-9);
            CHECK(back.decay_rate == doctest::Approx(y.decay_rate).epsilon(1e-9));
        }
    }
}
