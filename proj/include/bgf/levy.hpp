#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "bgf/exponents.hpp"
#include "bgf/rng.hpp"
#include "bgf/stats.hpp"

namespace bgf::levy {

using exponents::LevyTriplet;

/// Built-in processes: Eve (psi), time-reversed exit process (psi-circ) and
/// conditioned Eve (psi-hat).
enum class Process { eve, circ, hat };

std::string to_string(Process p);
Process parse_process(const std::string& name);

inline constexpr double kDefaultDelta = 1e-3;
inline constexpr double kDefaultDt = 1e-3;
/// Jumps beyond this magnitude are dropped (their total intensity is below 1e-12).
inline constexpr double kMaxJumpMagnitude = 60.0;
/// Expected jump count above which sampling refuses to run.
inline constexpr double kMaxExpectedJumps = 2e9;

struct Jump {
    double time = 0.0;
    double size = 0.0;
};

struct PathParams {
    std::string label;
    double delta = 0.0;
    double dt = 0.0;
    double horizon = 0.0;
    std::string seed;
    /// Laplace exponent at 1/2 (drives the exponential-functional tail); NaN if unknown.
    double psi_half = std::numeric_limits<double>::quiet_NaN();
};

/// Discretised Lévy path. Every recorded jump occupies two consecutive
/// entries at the same time (pre-jump, then post-jump, the latter flagged).
struct LevyPathSkeleton {
    std::vector<double> times;
    std::vector<double> values;
    std::vector<unsigned char> is_jump;
    std::vector<Jump> jumps;
    PathParams params;

    std::size_t size() const { return times.size(); }
    double horizon() const { return times.empty() ? 0.0 : times.back(); }
    void push(double t, double v, bool jump = false) {
        times.push_back(t);
        values.push_back(v);
        is_jump.push_back(jump ? 1 : 0);
    }
};

/// Drift b of the triplet under the sampler convention
///   psi(lambda) = b lambda + int (e^{lambda y} - 1 - lambda h_int(y)) nu(dy).
/// Cached per built-in label.
double effective_drift(const LevyTriplet& triplet);

/// Laplace exponent evaluated in the sampler convention (cross-check of effective_drift).
double internal_exponent(const LevyTriplet& triplet, double lambda);

/// The two jump pieces of the conditioned Eve: (tilted Eve piece, large-jump piece).
std::pair<LevyTriplet, LevyTriplet> hat_triplet();

std::vector<LevyTriplet> pieces(Process p);

/// Truncated-jump table for one piece: geometric knots a_k in jump magnitude,
/// tail intensities N_k = nu(|y| >= a_k), and the small-jump moments needed for
/// the Gaussian correction. Sizes are drawn by inverting a monotone cubic
/// interpolant of log a against N.
class JumpTable {
public:
    JumpTable(const LevyTriplet& triplet, double delta_min, std::size_t knots = 4096);
    ~JumpTable();
    JumpTable(JumpTable&&) noexcept;
    JumpTable& operator=(JumpTable&&) noexcept;

    /// Largest knot index with a_k <= delta (0 if delta is below the table).
    std::size_t knot_for(double delta) const;
    double knot(std::size_t k) const { return a_[k]; }
    std::size_t knot_count() const { return a_.size(); }
    bool touches_zero() const { return touches_zero_; }

    double rate(std::size_t k) const { return tail_[k]; }
    /// int_{|y| < a_k} y^2 nu(dy)
    double small_variance(std::size_t k) const { return small_var_[k]; }
    /// int_{|y| >= a_k} h_int(y) nu(dy)
    double large_compensator(std::size_t k) const { return large_h_[k]; }
    /// Jump size (negative) given u uniform on (0, 1), conditioned on |y| >= a_k.
    double sample(std::size_t k, double u) const;

private:
    struct Interp;
    std::vector<double> a_;
    std::vector<double> tail_;
    std::vector<double> small_var_;
    std::vector<double> large_h_;
    // Direct-index inverse on a uniform grid in log N (cubic Hermite, exact slopes).
    std::vector<double> grid_log_a_;
    std::vector<double> grid_slope_;
    double grid_lo_ = 0.0;
    double grid_step_ = 0.0;
    double grid_v_min_ = 0.0;
    double a_cap_ = 0.0;
    bool touches_zero_ = false;
    std::unique_ptr<Interp> interp_;
};

/// Simulation parameters for one quantised cutoff.
struct CutoffLevel {
    double delta = 0.0;  ///< effective cutoff (a knot value)
    std::vector<std::size_t> knots;  ///< per piece
    double rate = 0.0;   ///< total intensity of simulated jumps
    double drift = 0.0;  ///< drift of the continuous part
    double sigma = 0.0;  ///< Gaussian small-jump standard deviation per unit time
};

/// One knot of a simulated step: the continuous increment accumulated since
/// the previous knot, followed by a jump (0 for the end-of-step knot).
struct StepKnot {
    double offset = 0.0;
    double continuous = 0.0;
    double jump = 0.0;
};

/// Compound-Poisson plus Gaussian approximation of a Lévy process given as a
/// sum of triplet pieces.
class LevySampler {
public:
    LevySampler(std::vector<LevyTriplet> pieces, double delta_min, bool gaussian_correction = true);
    static LevySampler for_process(Process p, double delta_min, bool gaussian_correction = true);

    const std::vector<LevyTriplet>& pieces() const { return pieces_; }
    std::string label() const;
    double drift() const { return drift_; }
    double psi_half() const { return psi_half_; }
    double delta_min() const { return delta_min_; }
    bool gaussian_correction() const { return gaussian_; }

    /// Exact Laplace exponent of the target process.
    double exponent(double lambda) const;
    /// psi(lambda) - psi_delta(lambda), where psi_delta is the exponent of the
    /// simulated approximation at cutoff `delta`.
    double small_jump_bias(double lambda, double delta) const;

    CutoffLevel level(double delta) const;
    /// Precomputed level at the knot nearest below delta (same result as level()).
    const CutoffLevel& cached_level(double delta) const;
    /// Index of that knot in the cached table.
    std::size_t level_index(double delta) const;
    const CutoffLevel& level_by_index(std::size_t k) const { return levels_[k]; }
    std::size_t level_count() const { return levels_.size(); }

    /// Appends the knots of a step of Lévy length dt (last knot has offset dt).
    void step(const CutoffLevel& lv, double dt, Random& rng, std::vector<StepKnot>& out) const;
    /// Increment over Lévy length t, without path storage.
    double increment(const CutoffLevel& lv, double t, Random& rng) const;
    /// Same, additionally reporting whether a jump of magnitude >= `threshold` occurred.
    double increment(const CutoffLevel& lv, double t, Random& rng, double threshold, bool& big_jump) const;

    LevyPathSkeleton sample_path(double horizon, double delta, double dt, const RngStream& stream) const;

private:
    double draw_jump(const CutoffLevel& lv, Random& rng) const;

    std::vector<LevyTriplet> pieces_;
    std::vector<JumpTable> tables_;
    std::vector<CutoffLevel> levels_;
    std::size_t lead_table_ = 0;
    double drift_ = 0.0;
    double psi_half_ = 0.0;
    double delta_min_ = 0.0;
    bool gaussian_ = true;
};

/// Path of the triplet on [0, horizon], jumps of magnitude >= delta explicit,
/// grid step dt.
LevyPathSkeleton sample_levy_path(const LevyTriplet& triplet, double horizon, double delta, double dt,
                                  const RngStream& rng);

/// Monte Carlo of log E[exp(lambda xi(t))] with delta-method standard error.
stats::EstimateWithCI mgf_mc(const LevySampler& sampler, double lambda, double t, std::size_t n,
                             const RngStream& rng, double delta = kDefaultDelta);
stats::EstimateWithCI mgf_mc(const LevyTriplet& triplet, double lambda, double t, std::size_t n,
                             const RngStream& rng, double delta = kDefaultDelta);

/// Samples of xi at the increasing times `at` (row-major: n rows of at.size()),
/// replicate i drawn from rng.child(i). When `big_jump_threshold` > 0, flags[i*m+j]
/// records whether a jump of at least that magnitude occurred before at[j].
struct MarginalSamples {
    std::vector<double> times;
    std::size_t n = 0;
    std::vector<double> values;
    std::vector<unsigned char> big_jump;
    double at(std::size_t i, std::size_t j) const { return values[i * times.size() + j]; }
};
MarginalSamples sample_marginals(const LevySampler& sampler, const std::vector<double>& at, std::size_t n,
                                 const RngStream& rng, double delta = kDefaultDelta,
                                 double big_jump_threshold = 0.0);

}  // namespace bgf::levy
