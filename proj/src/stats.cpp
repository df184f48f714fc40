#include "bgf/stats.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numeric>

#include "bgf/errors.hpp"

namespace bgf::stats {

std::string to_string(EstimateMethod m) {
    switch (m) {
        case EstimateMethod::iid_mean: return "iid-mean";
        case EstimateMethod::delta_log: return "delta-log";
        case EstimateMethod::batch_means: return "batch-means";
    }
    return "iid-mean";
}

bool EstimateWithCI::within(double target, double k_se, double budget) const {
    return std::abs(point - target) <= k_se * std_error + budget;
}

double mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0, c = 0.0;
    for (double x : xs) {
        const double y = x - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return acc / static_cast<double>(xs.size() - 1);
}

EstimateWithCI mean_estimate(std::span<const double> xs) {
    EstimateWithCI e;
    e.n = xs.size();
    e.point = mean(xs);
    e.std_error = xs.size() > 1 ? std::sqrt(variance(xs) / static_cast<double>(xs.size())) : 0.0;
    e.method = EstimateMethod::iid_mean;
    return e;
}

EstimateWithCI log_mean_estimate(std::span<const double> xs) {
    auto m = mean_estimate(xs);
    if (!(m.point > 0.0)) throw DomainError("log-mean estimate needs a positive sample mean");
    EstimateWithCI e;
    e.n = m.n;
    e.point = std::log(m.point);
    e.std_error = m.std_error / m.point;
    e.method = EstimateMethod::delta_log;
    return e;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw DomainError("KS statistic needs two nonempty samples");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(i / nx - j / ny));
    }
    return d;
}

double ks_critical_value(std::size_t n, double alpha) {
    return std::sqrt(-std::log(alpha / 2.0) / 2.0) / std::sqrt(static_cast<double>(n));
}

double quantile(std::vector<double> xs, double q) {
    if (xs.empty()) throw DomainError("quantile of an empty sample");
    std::sort(xs.begin(), xs.end());
    const double pos = q * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, xs.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return xs[lo] * (1.0 - w) + xs[hi] * w;
}

std::pair<double, double> least_squares(std::span<const double> x, std::span<const double> y) {
    const double mx = mean(x), my = mean(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw DomainError("least squares needs two distinct abscissae");
    const double b = sxy / sxx;
    return {my - b * mx, b};
}

double gamma_cdf(double x, double shape, double scale) {
    if (x <= 0.0) return 0.0;
    return boost::math::gamma_p(shape, x / scale);
}

}  // namespace bgf::stats
