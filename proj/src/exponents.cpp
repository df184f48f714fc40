#include "bgf/exponents.hpp"

#include <cmath>
#include <numbers>

#include "bgf/errors.hpp"
#include "bgf/special.hpp"

namespace bgf::exponents {
namespace {

using special::binomial_remainder;
using special::expm1_minus_linear;

const double kLog2 = std::numbers::ln2;
const double kSqrtHalf = std::sqrt(0.5);
constexpr double kFarTail = -40.0;

quad::Options tight() {
    quad::Options o;
    o.abs_tol = 1e-13;
    o.rel_tol = 1e-13;
    return o;
}

// int_{-log 2}^0 F(y) e^{c y} (1 - e^y)^{-5/2} dy with u = 1 - e^y = s^2, where
// F is given as a function of u and vanishes like u^2:
//   = int_0^{1/sqrt 2} 2 F(s^2) (1 - s^2)^{-c - 1} s^{-4} ds.
Value near_zero_integral(const std::function<double(double)>& f_of_u, double c) {
    auto integrand = [&](double s) {
        const double u = s * s;
        return 2.0 * f_of_u(u) * std::pow(1.0 - u, c - 1.0) / (u * u);
    };
    auto r = quad::integrate(integrand, 0.0, kSqrtHalf, tight());
    return {r.value, r.error};
}

}  // namespace

double gamma_fn(double x) { return special::gamma_fn(x); }

double levy_density_eve(double y) {
    if (!(y > -kLog2 && y < 0.0)) return 0.0;
    return kAlpha * std::exp(-1.5 * y) * std::pow(-std::expm1(y), -2.5);
}

double levy_density_circ(double y) {
    if (!(y < 0.0)) return 0.0;
    return kAlpha * std::exp(0.5 * y) * std::pow(-std::expm1(y), -2.5);
}

Value psi_eve(double lambda) {
    if (!(lambda >= 0.0)) throw DomainError("psi_eve requires lambda >= 0");
    if (lambda == 0.0) return {0.0, 0.0};
    auto I = near_zero_integral([lambda](double u) { return binomial_remainder(lambda, u); }, -1.5);
    return {kAlpha * (-8.0 / 3.0 * lambda + I.value), kAlpha * I.error};
}

Value psi_circ(double lambda) {
    if (!(lambda >= 0.0)) throw DomainError("psi_circ requires lambda >= 0");
    if (lambda == 0.0) return {0.0, 0.0};
    auto near = near_zero_integral([lambda](double u) { return binomial_remainder(lambda, u); }, 0.5);
    auto mid_integrand = [lambda](double y) {
        return (std::exp(lambda * y) - 1.0 - lambda * std::expm1(y)) * std::exp(0.5 * y) *
               std::pow(-std::expm1(y), -2.5);
    };
    auto mid = quad::integrate(mid_integrand, kFarTail, -kLog2, tight());
    // Beyond y = -40 the factor (1 - e^y)^{-5/2} equals 1 to within 3e^{-40}.
    const double Y = kFarTail;
    const double tail = std::exp((lambda + 0.5) * Y) / (lambda + 0.5) + 2.0 * (lambda - 1.0) * std::exp(0.5 * Y) -
                        (2.0 * lambda / 3.0) * std::exp(1.5 * Y);
    const double tail_err = 2.0 * (lambda + 1.0) * std::exp(1.5 * Y);
    const double total = near.value + mid.value + tail;
    return {kAlpha * total, kAlpha * (near.error + mid.error + tail_err)};
}

ExtendedReal kappa_closed(double p) {
    if (!(p > 0.0)) throw DomainError("kappa requires p > 0");
    if (p <= kKappaDomainLower) return ExtendedReal::plus_infinity();
    return ExtendedReal::finite(kPhiCoef * special::gamma_fn(p - 1.5) * special::rgamma(p - 3.0));
}

Value kappa_integral(double p) {
    if (!(p > kKappaDomainLower)) throw DomainError("divergent cumulant: kappa integral needs p > 3/2");
    const Value psi = psi_eve(p);
    // int_{-log 2}^0 (1 - e^y)^p e^{-3y/2} (1 - e^y)^{-5/2} dy = int_0^{1/2} u^{p - 5/2} (1 - u)^{-5/2} du
    const double a = p - 1.5;
    quad::Result B;
    if (a < 1.0) {
        // u = t^{1/a} absorbs the u^{a - 1} endpoint singularity.
        auto f = [a](double t) { return std::pow(1.0 - std::pow(t, 1.0 / a), -2.5) / a; };
        B = quad::integrate(f, 0.0, std::pow(0.5, a), tight());
    } else {
        auto f = [a](double u) { return std::pow(u, a - 1.0) * std::pow(1.0 - u, -2.5); };
        B = quad::integrate(f, 0.0, 0.5, tight());
    }
    return {psi.value + kAlpha * B.value, psi.error + kAlpha * B.error};
}

double psi_hat(double lambda) {
    if (!(lambda > 0.0)) throw DomainError("psi_hat requires lambda > 0");
    return kPhiCoef * special::gamma_fn(lambda + 1.5) * special::rgamma(lambda);
}

double phi(double lambda) {
    if (!(lambda >= 0.0)) throw DomainError("phi requires lambda >= 0");
    return kPhiCoef * lambda * std::sqrt(lambda);
}

std::string to_string(TripletLabel label) {
    switch (label) {
        case TripletLabel::eve: return "eve";
        case TripletLabel::circ: return "circ";
        case TripletLabel::hat_piece_tilted: return "hat_piece_tilted";
        case TripletLabel::hat_piece_large: return "hat_piece_large";
        case TripletLabel::custom: return "custom";
    }
    return "custom";
}

Value LevyTriplet::integrate(const std::function<double(double)>& f, double lo, double hi,
                             const quad::Options& opt) const {
    if (!has_jumps()) return {};
    lo = std::max(lo, support_lo);
    hi = std::min(hi, support_hi);
    if (!(lo < hi)) return {};
    auto g = [&](double y) { return f(y) * density(y); };
    Value out;
    auto add = [&out](const quad::Result& r) {
        out.value += r.value;
        out.error += r.error;
    };
    double upper = hi;
    if (hi == 0.0) {
        // y = log(1 - s^2): removes the |y|^{-1/2} endpoint behaviour of f(y) nu(dy).
        const double y0 = std::max(lo, -kLog2);
        const double s_max = std::sqrt(-std::expm1(y0));
        auto h = [&](double s) {
            const double y = std::log1p(-s * s);
            return g(y) * 2.0 * s / (1.0 - s * s);
        };
        add(quad::integrate(h, 0.0, s_max, opt));
        upper = y0;
    }
    if (lo < upper) {
        if (std::isinf(lo)) {
            const double cut = std::min(upper, kFarTail);
            if (cut < upper) add(quad::integrate(g, cut, upper, opt));
            add(quad::integrate_to_infinity([&](double w) { return g(cut - w); }, 0.0, opt));
        } else {
            add(quad::integrate(g, lo, upper, opt));
        }
    }
    return out;
}

Value LevyTriplet::exponent(double lambda) const {
    Value v{paper_drift * lambda, 0.0};
    if (!has_jumps()) return v;
    auto integrand = [&](double y) {
        const double base = (compensation == Compensation::full && y >= -1.0)
                                ? expm1_minus_linear(lambda * y)
                                : std::expm1(lambda * y);
        const double gap = compensator_gap ? compensator_gap(y) : 0.0;
        return base + lambda * gap;
    };
    auto r = integrate(integrand, -std::numeric_limits<double>::infinity(), 0.0, tight());
    v.value += r.value;
    v.error += r.error;
    return v;
}

void LevyTriplet::validate() const {
    if (!has_jumps()) return;
    const double lo = std::isinf(support_lo) ? -60.0 : support_lo;
    for (int i = 1; i < 64; ++i) {
        const double y = lo + (support_hi - lo) * i / 64.0;
        const double d = density(y);
        if (!(d >= 0.0) || std::isinf(d)) throw DomainError("jump density must be finite and nonnegative on its support");
    }
    quad::Options o;
    o.abs_tol = 1e-9;
    o.rel_tol = 1e-9;
    auto r = integrate([](double y) { return std::min(y * y, 1.0); }, -std::numeric_limits<double>::infinity(), 0.0, o);
    if (!std::isfinite(r.value)) throw DomainError("jump measure violates the (y^2 ^ 1) integrability condition");
}

LevyTriplet eve_triplet() {
    LevyTriplet t;
    t.label = TripletLabel::eve;
    t.paper_drift = -8.0 / 3.0 * kAlpha;
    t.density = levy_density_eve;
    t.support_lo = -kLog2;
    t.support_hi = 0.0;
    t.compensation = Compensation::full;
    // y - (e^y - 1)
    t.compensator_gap = [](double y) { return -expm1_minus_linear(y); };
    return t;
}

LevyTriplet circ_triplet() {
    LevyTriplet t;
    t.label = TripletLabel::circ;
    t.paper_drift = 0.0;
    t.density = levy_density_circ;
    t.support_lo = -std::numeric_limits<double>::infinity();
    t.support_hi = 0.0;
    t.compensation = Compensation::full;
    // y 1{y >= -1} - (e^y - 1)
    t.compensator_gap = [](double y) { return y >= -1.0 ? -expm1_minus_linear(y) : -std::expm1(y); };
    return t;
}

LevyTriplet hat_tilted_triplet() {
    LevyTriplet t;
    t.label = TripletLabel::hat_piece_tilted;
    t.paper_drift = -8.0 / 3.0 * kAlpha;
    t.density = [](double y) { return std::exp(3.0 * y) * levy_density_eve(y); };
    t.support_lo = -kLog2;
    t.support_hi = 0.0;
    t.compensation = Compensation::full;
    // y - (e^y - 1) e^{-3y}
    t.compensator_gap = [](double y) { return expm1_minus_linear(-3.0 * y) - expm1_minus_linear(-2.0 * y); };
    return t;
}

LevyTriplet hat_large_triplet() {
    LevyTriplet t;
    t.label = TripletLabel::hat_piece_large;
    t.paper_drift = 0.0;
    t.density = [](double j) {
        if (!(j < -kLog2)) return 0.0;
        return kAlpha * std::exp(1.5 * j) * std::pow(-std::expm1(j), -2.5);
    };
    t.support_lo = -std::numeric_limits<double>::infinity();
    t.support_hi = -kLog2;
    t.compensation = Compensation::none;
    return t;
}

LevyTriplet drift_only_triplet(double drift) {
    LevyTriplet t;
    t.label = TripletLabel::custom;
    t.paper_drift = drift;
    return t;
}

}  // namespace bgf::exponents
