#include "bgf/csbp.hpp"

#include <cmath>
#include <numbers>

#include "bgf/errors.hpp"
#include "bgf/exponents.hpp"
#include "bgf/lamperti.hpp"
#include "bgf/parallel.hpp"

namespace bgf::csbp {

double u_t(double t, double lambda) {
    if (!(t >= 0.0) || !(lambda > 0.0)) throw DomainError("u_t needs t >= 0 and lambda > 0");
    const double w = 1.0 / std::sqrt(lambda) + t * std::sqrt(2.0 / 3.0);
    return 1.0 / (w * w);
}

double exit_prob(double x, double z) {
    if (!(x > 0.0) || !(z > 0.0)) throw DomainError("exit_prob needs positive x and z");
    if (x >= z) return 1.0;
    return 1.0 - std::sqrt(1.0 - x / z);
}

N0Kind parse_n0_kind(const std::string& name) {
    if (name == "range_tail") return N0Kind::range_tail;
    if (name == "Lz_mass") return N0Kind::Lz_mass;
    if (name == "star_height_tail") return N0Kind::star_height_tail;
    if (name == "local_time_const") return N0Kind::local_time_const;
    if (name == "frag_local_time_factor") return N0Kind::frag_local_time_factor;
    throw DomainError("unknown constant kind '" + name + "'");
}

double local_time_constant() {
    const double g13 = exponents::gamma_fn(1.0 / 3.0), g76 = exponents::gamma_fn(7.0 / 6.0);
    return 1.5 * std::pow(std::numbers::pi, -1.5) * g13 * g13 * g13 * g76 * g76 * g76;
}

double frag_local_time_factor() { return 1.0 / std::sqrt(6.0 * std::numbers::pi); }

std::function<double(double)> n0_constants(N0Kind kind) {
    switch (kind) {
        case N0Kind::range_tail: return [](double r) { return 1.5 / (r * r); };
        case N0Kind::Lz_mass: return [](double z) { return 0.5 / z; };
        case N0Kind::star_height_tail: {
            const double c = local_time_constant();
            return [c](double d) { return 2.0 * c / (d * d * d); };
        }
        case N0Kind::local_time_const: {
            const double c = local_time_constant();
            return [c](double) { return c; };
        }
        case N0Kind::frag_local_time_factor: return [](double) { return frag_local_time_factor(); };
    }
    throw DomainError("unknown constant kind");
}

stats::EstimateWithCI csbp_mc_check(double x, double t, double lambda, std::size_t n, const RngStream& rng,
                                    double dt) {
    std::vector<double> e(n);
    parallel_for(n, [&](std::size_t i) {
        Random r = rng.child(i).random();
        e[i] = std::exp(-lambda * lamperti::csbp_value(x, t, dt, r));
    });
    auto est = stats::mean_estimate(e);
    est.seed = rng.describe();
    return est;
}

stats::EstimateWithCI exit_prob_mc(double x, double z, std::size_t n, const RngStream& rng, double dt) {
    std::vector<double> hit(n);
    parallel_for(n, [&](std::size_t i) {
        Random r = rng.child(i).random();
        hit[i] = lamperti::csbp_exits_above(x, z, dt, r) ? 1.0 : 0.0;
    });
    auto est = stats::mean_estimate(hit);
    est.seed = rng.describe();
    return est;
}

double BudgetedCheck::deviation() const { return std::abs(fine.point - target); }

namespace {

double richardson_budget(double fine, double coarse) {
    return std::abs(fine - coarse) / (std::pow(2.0, kGridOrder) - 1.0);
}

}  // namespace

BudgetedCheck laplace_check(double x, double t, double lambda, std::size_t n, const RngStream& rng, double dt) {
    BudgetedCheck c;
    c.dt = dt;
    c.target = std::exp(-x * u_t(t, lambda));
    c.fine = csbp_mc_check(x, t, lambda, n, rng.child(0), dt);
    c.coarse = csbp_mc_check(x, t, lambda, n, rng.child(1), 2.0 * dt);
    c.budget = richardson_budget(c.fine.point, c.coarse.point);
    return c;
}

BudgetedCheck exit_check(double x, double z, std::size_t n, const RngStream& rng, double dt) {
    BudgetedCheck c;
    c.dt = dt;
    c.target = exit_prob(x, z);
    c.fine = exit_prob_mc(x, z, n, rng.child(0), dt);
    c.coarse = exit_prob_mc(x, z, n, rng.child(1), 2.0 * dt);
    c.budget = richardson_budget(c.fine.point, c.coarse.point);
    return c;
}

double flow_identity_error(const std::vector<double>& times, const std::vector<double>& lambdas) {
    double worst = 0.0;
    for (double t : times)
        for (double s : times)
            for (double l : lambdas) {
                const double lhs = u_t(t + s, l);
                worst = std::max(worst, std::abs(lhs - u_t(t, u_t(s, l))) / lhs);
            }
    return worst;
}

}  // namespace bgf::csbp
