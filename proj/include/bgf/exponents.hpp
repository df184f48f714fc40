#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include "bgf/quadrature.hpp"

namespace bgf::exponents {

/// sqrt(3 / (2 pi)), the normalising constant of every jump density below.
inline const double kAlpha = std::sqrt(3.0 / (2.0 * std::numbers::pi));
/// sqrt(8 / 3), the coefficient of the branching mechanism and of kappa.
inline const double kPhiCoef = std::sqrt(8.0 / 3.0);
/// Lower end of the finiteness domain of kappa.
inline constexpr double kKappaDomainLower = 1.5;
/// Roots of kappa.
inline constexpr double kOmegaMinus = 2.0;
inline constexpr double kOmegaPlus = 3.0;

/// A numerically evaluated quantity with its achieved absolute error bound.
struct Value {
    double value = 0.0;
    double error = 0.0;
};

/// Real number or +infinity, tagged explicitly.
struct ExtendedReal {
    bool infinite = false;
    double value = 0.0;

    static ExtendedReal plus_infinity() { return {true, std::numeric_limits<double>::infinity()}; }
    static ExtendedReal finite(double v) { return {false, v}; }
    bool is_finite() const { return !infinite; }
};

double gamma_fn(double x);

/// Jump density of the Eve Lévy process: alpha e^{-3y/2} (1 - e^y)^{-5/2} on (-log 2, 0).
double levy_density_eve(double y);
/// Jump density of the exit-process Lévy process: alpha e^{y/2} (1 - e^y)^{-5/2} on (-inf, 0).
double levy_density_circ(double y);

/// Laplace exponent of the Eve Lévy process, lambda >= 0.
Value psi_eve(double lambda);
/// Laplace exponent of the time-reversed exit process, lambda >= 0.
Value psi_circ(double lambda);

/// Cumulant function from its Gamma-ratio form: +inf on (0, 3/2], with 1/Gamma(pole) = 0.
ExtendedReal kappa_closed(double p);
/// Cumulant function as psi(p) + int (1 - e^y)^p pi(dy), p > 3/2.
Value kappa_integral(double p);

/// Laplace exponent of the conditioned Eve, kappa(3 + lambda), lambda > 0.
double psi_hat(double lambda);
/// Branching mechanism sqrt(8/3) lambda^{3/2}.
double phi(double lambda);

/// Which built-in process a triplet describes.
enum class TripletLabel { eve, circ, hat_piece_tilted, hat_piece_large, custom };
/// Compensation used in the sampler convention: `full` integrates
/// e^{lambda y} - 1 - lambda y 1{y >= -1}, `none` integrates e^{lambda y} - 1.
enum class Compensation { full, none };

std::string to_string(TripletLabel label);

/// Drift + jump-measure description of a spectrally negative Lévy process.
///
/// The exponent in "paper form" is
///   paper_drift * lambda + int (e^{lambda y} - 1 - lambda h_paper(y)) nu(dy),
/// where h_paper is whatever compensator the defining formula uses. Only the
/// difference `compensator_gap(y) = h_int(y) - h_paper(y)` is stored, with
/// h_int the compensator implied by `compensation`; the gap is supplied in a
/// cancellation-free form so that integrals near y = 0 stay accurate.
struct LevyTriplet {
    TripletLabel label = TripletLabel::custom;
    double paper_drift = 0.0;
    std::function<double(double)> density;  ///< empty => zero jump measure
    double support_lo = 0.0;
    double support_hi = 0.0;
    Compensation compensation = Compensation::full;
    std::function<double(double)> compensator_gap;

    bool has_jumps() const { return static_cast<bool>(density) && support_lo < support_hi; }
    bool singular_at_zero() const { return has_jumps() && support_hi == 0.0; }

    /// Compensator of the sampler convention.
    double h_internal(double y) const {
        return compensation == Compensation::full && y >= -1.0 ? y : 0.0;
    }

    /// int f(y) nu(dy) over the support intersected with [lo, hi].
    /// `f` must vanish at least like y^2 at 0 when the support reaches 0.
    Value integrate(const std::function<double(double)>& f, double lo = -std::numeric_limits<double>::infinity(),
                    double hi = 0.0, const quad::Options& opt = {}) const;

    /// Laplace exponent in paper form (see above).
    Value exponent(double lambda) const;

    /// Throws DomainError unless int (y^2 ^ 1) nu(dy) is finite and nu >= 0 on a probe grid.
    void validate() const;
};

LevyTriplet eve_triplet();
LevyTriplet circ_triplet();
/// Piece of the conditioned-Eve jump measure living on (-log 2, 0): e^{3y} times the Eve density.
LevyTriplet hat_tilted_triplet();
/// Piece of the conditioned-Eve jump measure living on (-inf, -log 2):
/// alpha e^{3j/2} (1 - e^j)^{-5/2}, the image of (1 - e^y)^3 pi(dy) under y -> log(1 - e^y).
LevyTriplet hat_large_triplet();
/// Pure drift, no jumps.
LevyTriplet drift_only_triplet(double drift);

}  // namespace bgf::exponents
