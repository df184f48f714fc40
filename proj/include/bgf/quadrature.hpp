#pragma once

#include <functional>

namespace bgf::quad {

struct Result {
    double value = 0.0;
    double error = 0.0;  ///< estimated absolute error
    int intervals = 0;
};

struct Options {
    double abs_tol = 1e-13;
    double rel_tol = 1e-13;
    int max_intervals = 4000;
    /// When false, a non-converged integral is returned as is instead of throwing.
    bool throw_on_failure = true;
};

/// Globally adaptive Gauss–Kronrod (7/15) integration over a finite interval.
/// Bisects the interval with the largest error estimate until the total
/// estimate is below max(abs_tol, rel_tol * |value|).
Result integrate(const std::function<double(double)>& f, double a, double b, const Options& opt = {});

/// Integral over [a, +inf) through the map x = a + t / (1 - t).
Result integrate_to_infinity(const std::function<double(double)>& f, double a, const Options& opt = {});

}  // namespace bgf::quad
