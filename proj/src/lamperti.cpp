#include "bgf/lamperti.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bgf/errors.hpp"
#include "bgf/special.hpp"

namespace bgf::lamperti {

namespace {

// (b - a) / (log b - log a) for a, b > 0
double log_mean(double a, double b) {
    const double rho = (b - a) / a;
    if (rho == 0.0) return a;
    return a * rho / std::log1p(rho);
}

std::size_t segment_index(const std::vector<double>& times, double t) {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    return static_cast<std::size_t>(it - times.begin()) - 1;
}

const double kStableSigma = std::cbrt(4.0 / 3.0);  // (2/sqrt(3))^{2/3}

}  // namespace

double segment_clock(double x, double ds, double d) {
    return ds * std::sqrt(x) * special::exprel(0.5 * d);
}

PssmpPath pssmp_from_levy(const LevyPathSkeleton& skeleton, double z, double tail_tol) {
    return pssmp_from_levy(skeleton, z, skeleton.params.psi_half, tail_tol);
}

PssmpPath pssmp_from_levy(const LevyPathSkeleton& sk, double z, double psi_half, double tail_tol) {
    if (!(z > 0.0)) throw DomainError("initial mass must be positive");
    if (sk.times.empty() || sk.values.front() != 0.0) throw DomainError("skeleton must start at 0");
    if (std::isnan(psi_half)) throw DomainError("tail exponent psi(1/2) unknown for this skeleton");

    PssmpPath out;
    out.z = z;
    const double sz = std::sqrt(z);
    const std::size_t n = sk.size();
    out.times.reserve(n + 1);
    out.values.reserve(n + 1);
    out.is_jump.reserve(n + 1);
    double functional = 0.0;
    out.times.push_back(0.0);
    out.values.push_back(z);
    out.is_jump.push_back(0);
    for (std::size_t i = 1; i < n; ++i) {
        const double xi0 = sk.values[i - 1], xi1 = sk.values[i];
        const double value = z * std::exp(xi1);
        if (sk.is_jump[i]) {
            const double r = out.times.back();
            out.jumps.push_back({r, value - out.values.back()});
            out.times.push_back(r);
            out.values.push_back(value);
            out.is_jump.push_back(1);
            continue;
        }
        const double ds = sk.times[i] - sk.times[i - 1];
        functional += ds * std::exp(0.5 * xi0) * special::exprel(0.5 * (xi1 - xi0));
        out.times.push_back(sz * functional);
        out.values.push_back(value);
        out.is_jump.push_back(0);
    }
    if (psi_half < 0.0) {
        const double remainder = std::exp(0.5 * sk.values.back()) / -psi_half;
        if (sz * remainder > tail_tol)
            throw HorizonInsufficient("Levy horizon too short for the exponential functional", sz * remainder);
        out.absorption_time = sz * (functional + remainder);
        out.times.push_back(out.absorption_time);
        out.values.push_back(0.0);
        out.is_jump.push_back(0);
    }
    return out;
}

double PssmpPath::value_at(double r) const {
    if (r < 0.0) throw DomainError("negative process time");
    if (r >= absorption_time) return 0.0;
    const std::size_t i = segment_index(times, r);
    if (i + 1 >= times.size()) {
        if (r == times.back()) return values.back();
        throw OutOfHorizon("time beyond the simulated path");
    }
    const double w = (r - times[i]) / (times[i + 1] - times[i]);
    const double root = std::sqrt(values[i]) + (std::sqrt(values[i + 1]) - std::sqrt(values[i])) * w;
    return root * root;
}

double stable_unit(Random& rng) {
    constexpr double alpha = 1.5;
    constexpr double b = -std::numbers::pi / 6.0;  // atan(tan(3 pi / 4)) / alpha
    const double s = std::cbrt(2.0);               // (1 + tan^2(3 pi / 4))^{1 / (2 alpha)}
    const double v = std::numbers::pi * (rng.uniform() - 0.5);
    const double w = rng.exponential();
    const double x = s * std::sin(alpha * (v + b)) / std::pow(std::cos(v), 1.0 / alpha) *
                     std::cbrt(w / std::cos(v - alpha * (v + b)));
    return kStableSigma * x;
}

LevyPathSkeleton stable_spectrally_positive(double horizon, double dt, const RngStream& stream) {
    if (!(horizon > 0.0) || !(dt > 0.0)) throw DomainError("horizon and dt must be positive");
    LevyPathSkeleton path;
    path.params = {"stable-3/2", 0.0, dt, horizon, stream.describe()};
    Random rng = stream.random();
    const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
    path.push(0.0, 0.0);
    double value = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
        const double t0 = static_cast<double>(s) * dt;
        const double t1 = s + 1 == steps ? horizon : static_cast<double>(s + 1) * dt;
        value += stable_scale(t1 - t0) * stable_unit(rng);
        path.push(t1, value);
    }
    return path;
}

LevyPathSkeleton stopped_stable_path(double x, double dt, const RngStream& stream, double max_time) {
    if (!(x > 0.0) || !(dt > 0.0)) throw DomainError("start and dt must be positive");
    LevyPathSkeleton path;
    path.params = {"stable-3/2", 0.0, dt, 0.0, stream.describe()};
    Random rng = stream.random();
    const double scale = stable_scale(dt);
    path.push(0.0, x);
    double u = x;
    for (std::size_t s = 0;; ++s) {
        const double t0 = static_cast<double>(s) * dt;
        if (t0 > max_time) throw BudgetExceeded("stable path did not reach 0", s);
        const double u1 = u + scale * stable_unit(rng);
        if (u1 <= 0.0) {
            path.push(t0 + dt * (u / (u - u1)), 0.0);
            break;
        }
        path.push(static_cast<double>(s + 1) * dt, u1);
        u = u1;
    }
    path.params.horizon = path.times.back();
    return path;
}

CsbpPath csbp_from_stable(const LevyPathSkeleton& u, double x) {
    if (u.times.empty() || u.values.front() != x)
        throw ContractViolation("stable path must start at the initial mass");
    if (u.values.back() != 0.0) throw ContractViolation("stable path is not stopped at 0");
    for (std::size_t i = 0; i + 1 < u.size(); ++i)
        if (!(u.values[i] > 0.0)) throw ContractViolation("stable path reaches 0 before its end");

    CsbpPath y;
    y.x = x;
    double t = 0.0;
    y.times.push_back(0.0);
    y.values.push_back(x);
    y.is_jump.push_back(0);
    for (std::size_t i = 1; i < u.size(); ++i) {
        const double u0 = u.values[i - 1], u1 = u.values[i];
        const double ds = u.times[i] - u.times[i - 1];
        if (u.is_jump[i]) {
            y.times.push_back(t);
            y.values.push_back(u1);
            y.is_jump.push_back(1);
        } else if (u1 > 0.0) {
            t += ds / log_mean(u0, u1);
            y.times.push_back(t);
            y.values.push_back(u1);
            y.is_jump.push_back(0);
        } else {
            y.decay_rate = u0 / ds;
        }
    }
    return y;
}

double CsbpPath::value_at(double t) const {
    if (t < 0.0) throw DomainError("negative time");
    if (t >= extinction_time) return 0.0;
    const std::size_t i = segment_index(times, t);
    if (i + 1 >= times.size()) {
        if (decay_rate > 0.0) return values.back() * std::exp(-decay_rate * (t - times.back()));
        if (t == times.back()) return values.back();
        throw OutOfHorizon("time beyond the simulated path");
    }
    const double w = (t - times[i]) / (times[i + 1] - times[i]);
    return values[i] * std::pow(values[i + 1] / values[i], w);
}

LevyPathSkeleton csbp_inverse_timechange(const CsbpPath& y) {
    LevyPathSkeleton u;
    u.params.label = "stable-3/2";
    double s = 0.0;
    u.push(0.0, y.values.front());
    for (std::size_t i = 1; i < y.times.size(); ++i) {
        if (y.is_jump[i]) {
            u.push(s, y.values[i], true);
            u.jumps.push_back({s, y.values[i] - y.values[i - 1]});
            continue;
        }
        s += (y.times[i] - y.times[i - 1]) * log_mean(y.values[i - 1], y.values[i]);
        u.push(s, y.values[i]);
    }
    if (y.decay_rate > 0.0) u.push(s + y.values.back() / y.decay_rate, 0.0);
    u.params.horizon = u.times.back();
    return u;
}

double csbp_value(double x, double t, double dt, Random& rng) {
    const double scale = stable_scale(dt);
    double clock = 0.0, u = x;
    for (;;) {
        const double u1 = u + scale * stable_unit(rng);
        if (u1 <= 0.0) {
            const double rate = (u - u1) / dt;
            return u * std::exp(-rate * (t - clock));
        }
        const double dc = dt / log_mean(u, u1);
        if (clock + dc >= t) return u * std::exp((u1 - u) * (t - clock) / dt);
        clock += dc;
        u = u1;
    }
}

bool csbp_exits_above(double x, double z, double dt, Random& rng, double max_time) {
    if (x >= z) return true;
    const double scale = stable_scale(dt);
    double u = x;
    const auto max_steps = static_cast<std::size_t>(max_time / dt);
    for (std::size_t s = 0; s < max_steps; ++s) {
        u += scale * stable_unit(rng);
        if (u >= z) return true;
        if (u <= 0.0) return false;
    }
    throw BudgetExceeded("exit from the interval not observed", max_steps);
}

}  // namespace bgf::lamperti
