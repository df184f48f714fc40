#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "bgf/levy.hpp"
#include "bgf/rng.hpp"

namespace bgf::lamperti {

using levy::Jump;
using levy::LevyPathSkeleton;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr double kDefaultTailTolerance = 1e-6;

/// Positive self-similar Markov process of index 1/2 obtained from a Lévy
/// skeleton. Between knots sqrt(X) is affine in process time.
struct PssmpPath {
    std::vector<double> times;
    std::vector<double> values;
    std::vector<unsigned char> is_jump;
    double absorption_time = kInfinity;
    double z = 1.0;
    std::vector<Jump> jumps;  ///< (process time, X_t - X_{t-})

    bool absorbed() const { return absorption_time < kInfinity; }
    /// Right-continuous value; 0 from the absorption time on. Throws OutOfHorizon past the last knot
    /// of an unabsorbed path.
    double value_at(double r) const;
};

/// X_t = z exp(xi(chi(z^{-1/2} t))). The remainder of the exponential
/// functional beyond the skeleton horizon is replaced by its conditional
/// expectation e^{xi(T)/2} / |psi(1/2)|; HorizonInsufficient is thrown when
/// z^{1/2} times that remainder exceeds `tail_tol`. A nonnegative psi(1/2)
/// means the functional diverges and the path is never absorbed.
PssmpPath pssmp_from_levy(const LevyPathSkeleton& skeleton, double z, double tail_tol = kDefaultTailTolerance);

/// Same with psi(1/2) supplied explicitly (overrides skeleton.params.psi_half).
PssmpPath pssmp_from_levy(const LevyPathSkeleton& skeleton, double z, double psi_half, double tail_tol);

/// Process-time length of a Lévy segment of length ds with log-increment d,
/// started from mass x: ds sqrt(x) (e^{d/2} - 1) / (d/2).
double segment_clock(double x, double ds, double d);

/// Chambers–Mallows–Stuck variate of the spectrally positive 3/2-stable law
/// normalised so that E exp(-lambda S) = exp(phi(lambda)) for the unit-time increment.
double stable_unit(Random& rng);
/// Scale of a time-dt increment: dt^{2/3}.
inline double stable_scale(double dt) { return std::cbrt(dt * dt); }

/// Spectrally positive 3/2-stable Lévy path from 0 on a dt grid.
LevyPathSkeleton stable_spectrally_positive(double horizon, double dt, const RngStream& rng);

/// x plus a stable path, stopped at its first passage below 0 (linearly
/// interpolated inside the crossing step, final value exactly 0).
/// Throws BudgetExceeded if no passage occurs within max_time.
LevyPathSkeleton stopped_stable_path(double x, double dt, const RngStream& rng, double max_time = 1e4);

/// phi-CSBP path. Between knots Y is log-linear in time (the image of an
/// affine segment of U); after the last knot Y decays as
/// Y_last exp(-decay_rate (t - t_last)).
struct CsbpPath {
    std::vector<double> times;
    std::vector<double> values;
    std::vector<unsigned char> is_jump;
    double extinction_time = kInfinity;
    double x = 1.0;
    double decay_rate = 0.0;

    double value_at(double t) const;
};

/// Y_t = U(theta_t) with theta_t = inf{s : int_0^s du / U(u) > t}, for U started at x
/// and stopped at 0. Throws ContractViolation otherwise.
CsbpPath csbp_from_stable(const LevyPathSkeleton& u_path, double x);

/// U(s) = Y(gamma_s), gamma_s = inf{t : int_0^t Y > s}; inverse of csbp_from_stable.
LevyPathSkeleton csbp_inverse_timechange(const CsbpPath& y_path);

/// Streaming Y_t for the CSBP started at x (no path storage).
double csbp_value(double x, double t, double dt, Random& rng);

/// Streaming exit from (0, z) for the CSBP (equivalently U) started at x:
/// true when the running maximum reaches z before absorption.
bool csbp_exits_above(double x, double z, double dt, Random& rng, double max_time = 1e4);

}  // namespace bgf::lamperti
