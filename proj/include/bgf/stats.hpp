#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bgf/rng.hpp"

namespace bgf::stats {

enum class EstimateMethod { iid_mean, delta_log, batch_means };

std::string to_string(EstimateMethod m);

/// Monte Carlo estimate with standard error and seed provenance.
struct EstimateWithCI {
    double point = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
    EstimateMethod method = EstimateMethod::iid_mean;
    std::string seed;  ///< RngStream::describe() of the master stream

    double ci_half_width() const { return 1.96 * std_error; }
    /// |point - target| <= k * stderr + budget
    bool within(double target, double k_se, double budget = 0.0) const;
};

/// Sample mean with stderr = sd / sqrt(n).
EstimateWithCI mean_estimate(std::span<const double> xs);
/// log of the sample mean with the delta-method stderr sd / (mean sqrt(n)).
EstimateWithCI log_mean_estimate(std::span<const double> xs);

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);  ///< unbiased

/// Two-sample Kolmogorov–Smirnov statistic sup |F_a - F_b|.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

/// One-sample KS statistic against a continuous CDF.
template <class Cdf>
double ks_one_sample(std::vector<double> xs, Cdf cdf);

/// Asymptotic one-sample KS critical value sqrt(-log(alpha / 2) / 2) / sqrt(n).
double ks_critical_value(std::size_t n, double alpha);

/// Linear-interpolated empirical quantile, q in [0, 1].
double quantile(std::vector<double> xs, double q);

/// Ordinary least squares fit y = a + b x; returns {a, b}.
std::pair<double, double> least_squares(std::span<const double> x, std::span<const double> y);

/// Gamma(shape k, scale theta) CDF.
double gamma_cdf(double x, double shape, double scale);

// --- template implementation

template <class Cdf>
double ks_one_sample(std::vector<double> xs, Cdf cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, f - i / n, (i + 1) / n - f});
    }
    return d;
}

}  // namespace bgf::stats
