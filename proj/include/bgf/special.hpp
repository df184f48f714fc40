#pragma once

namespace bgf::special {

/// Euler gamma function. Lanczos approximation (g = 7, 9 terms) on x >= 1/2,
/// reflection formula below. Throws DomainError("gamma pole") at 0, -1, -2, ...
double gamma_fn(double x);

/// 1 / Gamma(x), equal to 0 at the poles.
double rgamma(double x);

/// sin(pi x) with exact argument reduction.
double sinpi(double x);

/// e^x - 1 - x, accurate for small |x|.
double expm1_minus_linear(double x);

/// (1 - u)^lambda - 1 + lambda u for u in [0, 1], accurate for small u.
double binomial_remainder(double lambda, double u);

/// (e^x - 1) / x, equal to 1 at x = 0.
double exprel(double x);

}  // namespace bgf::special
