#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "bgf/rng.hpp"
#include "bgf/stats.hpp"

namespace bgf::csbp {

/// Transition Laplace exponent of the phi-CSBP: (lambda^{-1/2} + t sqrt(2/3))^{-2}.
double u_t(double t, double lambda);

/// P_x(sup Y >= z) = 1 - sqrt((1 - x/z)^+).
double exit_prob(double x, double z);

enum class N0Kind { range_tail, Lz_mass, star_height_tail, local_time_const, frag_local_time_factor };

N0Kind parse_n0_kind(const std::string& name);

/// r -> 3/(2 r^2), z -> 1/(2 z), delta -> 2 c delta^{-3}; for the two constant
/// kinds the returned function ignores its argument.
std::function<double(double)> n0_constants(N0Kind kind);

/// c = (3/2) pi^{-3/2} Gamma(1/3)^3 Gamma(7/6)^3.
double local_time_constant();
/// 1 / sqrt(6 pi).
double frag_local_time_factor();

inline constexpr double kDefaultDt = 1e-3;
/// Discretisation error of the stable-grid samplers is taken to scale as dt^{2/3}.
inline constexpr double kGridOrder = 2.0 / 3.0;

/// Monte Carlo of E[exp(-lambda Y_t)] for Y started at x.
stats::EstimateWithCI csbp_mc_check(double x, double t, double lambda, std::size_t n, const RngStream& rng,
                                    double dt = kDefaultDt);

/// Monte Carlo of P_x(sup Y >= z).
stats::EstimateWithCI exit_prob_mc(double x, double z, std::size_t n, const RngStream& rng,
                                   double dt = kDefaultDt);

/// Estimate at dt, companion estimate at 2 dt (independent stream), the closed-form
/// target, and the discretisation budget |m(dt) - m(2dt)| / (2^{2/3} - 1).
struct BudgetedCheck {
    stats::EstimateWithCI fine;
    stats::EstimateWithCI coarse;
    double target = 0.0;
    double budget = 0.0;
    double dt = 0.0;

    double deviation() const;
    bool pass(double k_se = 3.0) const { return fine.within(target, k_se, budget); }
};

BudgetedCheck laplace_check(double x, double t, double lambda, std::size_t n, const RngStream& rng,
                            double dt = kDefaultDt);
BudgetedCheck exit_check(double x, double z, std::size_t n, const RngStream& rng, double dt = kDefaultDt);

/// Largest |u_{t+s}(l) - u_t(u_s(l))| relative to u_{t+s}(l) over the grid.
double flow_identity_error(const std::vector<double>& times, const std::vector<double>& lambdas);

}  // namespace bgf::csbp
