#pragma once

#include <cstddef>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "bgf/levy.hpp"
#include "bgf/rng.hpp"

namespace bgf::gf {

enum class EveKind { standard, conditioned };

std::string to_string(EveKind k);
EveKind parse_eve_kind(const std::string& name);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct GfConfig {
    double z = 1.0;
    double horizon = kInfinity;  ///< R
    double mass_floor = 1e-3;
    EveKind eve = EveKind::standard;
    double entrance_mass = 1e-4;  ///< x0, conditioned Eve only
    double levy_step = 0.02;      ///< Lévy-time step cap
    double delta_cap = 0.05;      ///< largest small-jump cutoff
    double delta_margin = 1.25;   ///< cutoff computed for mass * margin
    std::size_t max_cells = 5'000'000;
    bool record_paths = true;
    /// Sorted sample of the extinction level of a run started from mass 1. When set, the unsimulated
    /// subtree of a pruned or truncated cell of mass m ends at sqrt(m) times a draw from it;
    /// otherwise at the mean remaining Eve lifetime sqrt(m) / |psi(1/2)|.
    std::vector<double> extinction_law;
    /// Exponents q whose level integrals int ||Y(r)||_q dr are accumulated during the run.
    std::vector<double> norm_exponents{2.0};
};

struct Cell {
    std::size_t id = 0;
    std::size_t parent = 0;  ///< equals id for the root
    std::vector<std::uint32_t> index_path;
    double h = 0.0;           ///< birth level
    double birth_mass = 0.0;
    double beta = 0.0;        ///< lifetime (expected remainder added for truncated and pruned cells)
    double subtree_end = 0.0; ///< level where the unsimulated subtree of a truncated or pruned cell dies out
    bool pruned = false;      ///< leaf below the mass floor, not simulated
    bool truncated = false;   ///< own mass fell below the floor; lifetime tail estimated
    bool censored = false;    ///< still alive at the horizon
    bool conditioned = false; ///< driven by the conditioned-Eve law
    /// Mass path on the cell clock (process time since birth); sqrt(mass) is affine between knots.
    std::vector<double> clock;
    std::vector<double> mass;
    /// Split records: (clock, pre-jump mass, post-jump mass, child mass, child id or npos).
    struct Split {
        double clock;
        double pre;
        double post;
        double child;
        std::size_t child_id;
    };
    std::vector<Split> splits;
    std::vector<std::size_t> children;

    bool is_root() const { return parent == id; }
    double death_level() const { return h + beta; }
    double last_level() const { return std::max(death_level(), subtree_end); }
};

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

/// Per-exponent level-integral bookkeeping.
struct NormAccount {
    double q = 2.0;
    double value = 0.0;           ///< simulated part plus expected own tails of truncated cells
    double missing_moment = 0.0;  ///< sum of m^{q+1/2} over mass not simulated (pruned, unresolved, truncated descendants)
};

struct CellTree {
    std::vector<Cell> cells;
    std::size_t root = 0;
    GfConfig config;
    std::uint64_t seed = 0;
    std::string stream;
    bool censored = false;
    std::vector<NormAccount> norms;
    std::size_t simulated_cells = 0;
    std::size_t pruned_cells = 0;

    double extinction_time() const;
};

/// Summary of one run without cell storage.
struct GfSummary {
    double extinction_time = 0.0;
    bool censored = false;
    std::size_t simulated_cells = 0;
    std::size_t pruned_cells = 0;
    std::vector<NormAccount> norms;
};

struct RankedMasses {
    double r = 0.0;
    std::vector<double> masses;
    double truncated_mass_bound = 0.0;
};

/// Reusable simulator: jump tables and constants are built once per configuration.
class GfSimulator {
public:
    explicit GfSimulator(GfConfig config);
    ~GfSimulator();
    GfSimulator(GfSimulator&&) noexcept;

    const GfConfig& config() const { return config_; }
    CellTree simulate(const RngStream& stream) const;
    GfSummary summarize(const RngStream& stream) const;

    /// psi(s) and int (1 - e^y)^s pi(dy) of the standard Eve law.
    double psi_standard(double s) const;
    double jump_moment_standard(double s) const;

    struct Impl;

private:
    GfConfig config_;
    std::unique_ptr<Impl> impl_;
};

/// Sorted extinction levels of runs from mass 1 whose unsimulated subtrees draw from the previous
/// iterate; the first iterate uses mean Eve lifetimes.
std::vector<double> extinction_law_fixed_point(GfConfig config, std::size_t runs, std::size_t iterations,
                                               const RngStream& stream);

CellTree simulate_gf(double z, double horizon, double mass_floor, EveKind eve, const RngStream& rng);

RankedMasses masses_at(const CellTree& tree, double r);

struct NormValue {
    double value = 0.0;
    double bound = 0.0;  ///< contribution bound from masses below the floor
};
NormValue p_norm(const CellTree& tree, double r, double q);

struct IntegralNorm {
    double value = 0.0;
    double missing_moment = 0.0;
    /// Bias bound c_hat * missing_moment with c_hat the renewal-corrected constant value / (z^{q+1/2} - missing).
    double bias_bound = 0.0;
    bool censored = false;
};
/// int_0^infty ||Y(r)||_q dr, integrated exactly along every simulated mass path.
IntegralNorm integral_p_norm(const CellTree& tree, double q);

std::size_t frag_count(const CellTree& tree, double r, double eps);

/// Samples of the conditioned Eve mass at level r started from x0.
std::vector<double> hat_marginal(double r, std::size_t n, double x0, const RngStream& rng,
                                 double delta = levy::kDefaultDelta, double levy_step = 0.02);
/// Same, reusing a hat sampler.
std::vector<double> hat_marginal(const levy::LevySampler& hat, double r, std::size_t n, double x0,
                                 const RngStream& rng, double delta, double levy_step);

/// KS statistic of samples against Gamma(3/2, mean r^2).
double hat_marginal_ks(const std::vector<double>& samples, double r);

struct AuditReport {
    std::size_t splits_checked = 0;
    std::size_t conservation_failures = 0;
    std::size_t dominance_failures = 0;
    std::size_t lineage_failures = 0;
    std::string first_failure;

    bool ok() const { return conservation_failures == 0 && dominance_failures == 0 && lineage_failures == 0; }
};
AuditReport audit(const CellTree& tree);

}  // namespace bgf::gf
