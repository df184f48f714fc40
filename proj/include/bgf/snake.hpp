#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "bgf/cell_system.hpp"
#include "bgf/rng.hpp"

namespace bgf::snake {

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

/// Conversion from lattice units to continuum units.
struct Scale {
    double space = 1.0;  ///< label multiplier
    double mass = 1.0;   ///< volume of one contour step
};

/// Default scales for a contour of 2n steps: space (2n)^{-1/4}, mass 1/(2n).
Scale default_scale(std::size_t n);

/// Discrete snake on a plane tree with n edges.
/// contour[i], vertex[i], labels[i] for i = 0..2n; parent/depth/vertex_label per vertex (root = 0).
struct DiscreteSnake {
    std::size_t n = 0;
    std::vector<std::int32_t> contour;
    std::vector<double> labels;
    std::vector<std::uint32_t> vertex;
    std::vector<std::uint32_t> parent;  ///< parent[0] == 0
    std::vector<double> vertex_label;
    std::vector<std::uint32_t> visits;  ///< contour steps i < 2n at each vertex (volume weight)
    Scale scale;

    std::size_t vertex_count() const { return parent.size(); }
    double continuum_label(std::size_t v) const { return vertex_label[v] * scale.space; }
};

/// Uniform excursion of length 2n from the cycle lemma, independent N(0,1) edge increments.
DiscreteSnake sample_snake(std::size_t n, Random& rng);
DiscreteSnake sample_snake(std::size_t n, const RngStream& stream);

/// Rebuilds tree arrays from a contour and per-vertex labels in DFS order.
DiscreteSnake from_contour(const std::vector<std::int32_t>& contour, const std::vector<double>& vertex_label,
                           Scale scale);

/// Fresh edge increments on the same tree.
void resample_labels(DiscreteSnake& s, Random& rng);

/// Keeps vertices whose strict ancestors have not hit y; y is in continuum units.
DiscreteSnake truncate(const DiscreteSnake& s, double y);

struct SnakeAudit {
    bool excursion = true;
    bool snake_property = true;
    bool tree_consistent = true;
    bool ok() const { return excursion && snake_property && tree_consistent; }
};
SnakeAudit audit_snake(const DiscreteSnake& s);

struct LevelComponent {
    double r = 0.0;
    std::vector<std::uint32_t> vertices;
    std::uint32_t top = 0;             ///< member closest to the root
    std::size_t attachment = npos;     ///< parent of top, npos when top is the root
    double volume = 0.0;               ///< continuum units
    std::map<double, double> boundary_size_estimates;
};

/// Connected components of {v : label(v) > r}, r in continuum units; ordered by top vertex.
std::vector<LevelComponent> components_above(const DiscreteSnake& s, double r);

/// eps^{-2} vol{v in C : r < label(v) < r + eps}; also stored in the component.
double boundary_size_est(const DiscreteSnake& s, LevelComponent& c, double eps);

/// eps^{-2} vol{steps whose ancestral line stays above r and whose tip lies below r + eps}.
double exit_measure_est(const DiscreteSnake& s, double r, double eps);

/// (2 eps)^{-1} vol{v : |label(v) - x| < eps}.
double local_time_est(const DiscreteSnake& s, double x, double eps);

std::vector<gf::RankedMasses> ranked_boundary_process(const DiscreteSnake& s, const std::vector<double>& r_grid,
                                                      double eps);

struct NestingAudit {
    std::size_t components_checked = 0;
    std::size_t failures = 0;
    bool ok() const { return failures == 0; }
};
/// Every component at r_hi lies inside exactly one component at r_lo, and each component has a single top.
NestingAudit nesting_audit(const DiscreteSnake& s, double r_lo, double r_hi);

/// Space scale making the mean label variance at a uniform contour time equal to its continuum value sqrt(pi/8).
double calibrate_space_scale(std::size_t n, std::size_t samples, const RngStream& stream);

}  // namespace bgf::snake
