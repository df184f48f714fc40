#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "bgf/errors.hpp"
#include "bgf/snake.hpp"
#include "bgf/stats.hpp"
#include "doctest.h"

using namespace bgf;
using namespace bgf::snake;

TEST_CASE("single edge snake") {
    const auto s = sample_snake(1, RngStream(1));
    CHECK(s.contour == std::vector<std::int32_t>{0, 1, 0});
    CHECK(s.vertex_count() == 2);
    CHECK(s.labels[0] == 0.0);
    CHECK(s.labels[2] == 0.0);
    CHECK(s.labels[1] != 0.0);
    CHECK(audit_snake(s).ok());
    CHECK_THROWS_AS(sample_snake(0, RngStream(1)), DomainError);
}

TEST_CASE("sampled snakes are valid excursions with the snake property") {
    for (std::uint64_t k = 0; k < 50; ++k) {
        const auto s = sample_snake(200 + k, RngStream(2).child(k));
        CHECK(s.contour.size() == 2 * s.n + 1);
        CHECK(s.vertex_count() == s.n + 1);
        CHECK(audit_snake(s).ok());
        std::size_t visits = 0;
        for (auto v : s.visits) visits += v;
        CHECK(visits == 2 * s.n);
    }
}

TEST_CASE("audit catches a broken snake property") {
    auto s = sample_snake(50, RngStream(3));
    // a return visit to the root carrying a different label
    for (std::size_t i = 1; i < s.contour.size(); ++i)
        if (s.contour[i] == 0) {
            s.labels[i] += 1.0;
            break;
        }
    CHECK(!audit_snake(s).snake_property);
}

TEST_CASE("contour shapes are uniform for n = 3") {
    // five Dyck paths of length 6, each with probability 1/5
    std::map<std::vector<std::int32_t>, int> counts;
    const int draws = 20000;
    Random rng = RngStream(4).random();
    for (int k = 0; k < draws; ++k) ++counts[sample_snake(3, rng).contour];
    CHECK(counts.size() == 5);
    for (const auto& [c, m] : counts) CHECK(std::abs(m / double(draws) - 0.2) < 4.0 * std::sqrt(0.16 / draws));
}

TEST_CASE("label covariance follows the contour minimum") {
    auto s = sample_snake(40, RngStream(5));
    const std::size_t i = 17, j = 55;
    REQUIRE(j < s.labels.size());
    const int shared = *std::min_element(s.contour.begin() + i, s.contour.begin() + j + 1);
    Random rng = RngStream(6).random();
    const int reps = 40000;
    std::vector<double> prod(reps);
    for (int k = 0; k < reps; ++k) {
        resample_labels(s, rng);
        prod[k] = s.labels[i] * s.labels[j];
    }
    const auto est = stats::mean_estimate(prod);
    CHECK(std::abs(est.point - shared) < 3.5 * est.std_error);
    CHECK(audit_snake(s).ok());
}

TEST_CASE("truncation") {
    const auto s = sample_snake(2000, RngStream(7));
    const double lo = *std::min_element(s.labels.begin(), s.labels.end()) * s.scale.space;
    const auto same = truncate(s, lo - 1.0);
    CHECK(same.contour == s.contour);
    CHECK(same.labels == s.labels);

    for (double y : {lo / 2.0, lo / 4.0, 0.3}) {
        const auto t = truncate(s, y);
        CHECK(audit_snake(t).ok());
        const auto t2 = truncate(t, y);
        CHECK(t2.contour == t.contour);
        CHECK(t2.labels == t.labels);
        // no surviving vertex lies strictly beyond a hit of y on its ancestral line
        for (std::size_t v = 1; v < t.vertex_count(); ++v) {
            for (std::size_t a = t.parent[v];; a = t.parent[a]) {
                const double l = t.continuum_label(a);
                CHECK(!(y < 0.0 ? l <= y : l >= y));
                if (a == 0) break;
            }
        }
    }
    const auto root_only = truncate(s, 0.0);
    CHECK(root_only.n == 0);
    CHECK(audit_snake(root_only).ok());
}

TEST_CASE("truncation commutes with components above the truncation level") {
    const auto s = sample_snake(3000, RngStream(8));
    const double y = -0.2;
    const auto t = truncate(s, y);
    auto survives = [&](std::size_t v) {
        for (std::size_t a = v; a != 0;) {
            a = s.parent[a];
            if (s.continuum_label(a) <= y) return false;
        }
        return true;
    };
    for (double r : {-0.1, 0.0, 0.2}) {
        std::vector<LevelComponent> kept;
        for (auto& c : components_above(s, r))
            if (survives(c.top)) kept.push_back(c);
        const auto b = components_above(t, r);
        REQUIRE(kept.size() == b.size());
        for (std::size_t k = 0; k < b.size(); ++k) {
            CHECK(kept[k].vertices.size() == b[k].vertices.size());
            CHECK(kept[k].volume == doctest::Approx(b[k].volume).epsilon(1e-12));
        }
    }
}

TEST_CASE("components above a level") {
    const auto s = sample_snake(5000, RngStream(9));
    double lo = 1e300, hi = -1e300;
    for (std::size_t v = 0; v < s.vertex_count(); ++v) {
        lo = std::min(lo, s.continuum_label(v));
        hi = std::max(hi, s.continuum_label(v));
    }
    const auto all = components_above(s, lo - 1e-9);
    REQUIRE(all.size() == 1);
    CHECK(all[0].vertices.size() == s.vertex_count());
    CHECK(all[0].attachment == npos);
    CHECK(all[0].volume == doctest::Approx(1.0));
    CHECK(components_above(s, hi).empty());

    for (double r : {0.1, 0.3, 0.5}) {
        for (const auto& c : components_above(s, r)) {
            CHECK(c.attachment != npos);
            CHECK(!(s.continuum_label(c.attachment) > r));
            for (auto v : c.vertices) CHECK(s.continuum_label(v) > r);
        }
    }
    for (double r : {-0.3, 0.0, 0.2, 0.4}) CHECK(nesting_audit(s, r, r + 0.1).ok());
}

TEST_CASE("boundary size estimates") {
    const auto s = sample_snake(20000, RngStream(10));
    auto comps = components_above(s, 0.2);
    REQUIRE(!comps.empty());
    for (auto& c : comps) {
        const double b = boundary_size_est(s, c, 0.05);
        CHECK(b >= 0.0);
        CHECK(c.boundary_size_estimates.at(0.05) == b);
    }
    // a component with all labels beyond r + eps has no boundary mass
    LevelComponent far;
    far.r = -10.0;
    far.vertices = {0};
    CHECK(boundary_size_est(s, far, 0.5) == 0.0);
    CHECK_THROWS_AS(boundary_size_est(s, far, 0.0), DomainError);
}

TEST_CASE("occupation identity for the local time estimator") {
    const auto s = sample_snake(20000, RngStream(11));
    const double eps = 0.02;
    double total = 0.0;
    for (double x = -5.0; x < 5.0; x += 2.0 * eps) total += local_time_est(s, x, eps) * 2.0 * eps;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(local_time_est(s, 100.0, eps) == 0.0);
}

TEST_CASE("exit measure estimator") {
    const auto s = sample_snake(20000, RngStream(12));
    double lo = 0.0;
    for (std::size_t v = 0; v < s.vertex_count(); ++v) lo = std::min(lo, s.continuum_label(v));
    CHECK(exit_measure_est(s, lo - 0.5, 0.1) == 0.0);
    CHECK(exit_measure_est(s, lo / 2.0, 0.05) >= 0.0);
    CHECK_THROWS_AS(exit_measure_est(s, 0.5, 0.1), DomainError);
}

TEST_CASE("ranked boundary process") {
    const auto s = sample_snake(10000, RngStream(13));
    double lo = 0.0;
    for (std::size_t v = 0; v < s.vertex_count(); ++v) lo = std::min(lo, s.continuum_label(v));
    const auto seq = ranked_boundary_process(s, {lo - 1.0, 0.1, 0.3}, 0.05);
    REQUIRE(seq.size() == 3);
    CHECK(seq[0].masses.size() == 1);
    for (const auto& m : seq) CHECK(std::is_sorted(m.masses.begin(), m.masses.end(), std::greater<>()));
    CHECK_THROWS_AS(ranked_boundary_process(s, {0.3, 0.1}, 0.05), DomainError);
}

TEST_CASE("space scale calibration matches the default") {
    const double s = calibrate_space_scale(4000, 200, RngStream(14));
    CHECK(s == doctest::Approx(default_scale(4000).space).epsilon(0.1));
}
