#include "bgf/snake.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bgf/errors.hpp"

namespace bgf::snake {

Scale default_scale(std::size_t n) {
    const double steps = 2.0 * static_cast<double>(std::max<std::size_t>(n, 1));
    return {std::pow(steps, -0.25), 1.0 / steps};
}

DiscreteSnake from_contour(const std::vector<std::int32_t>& contour, const std::vector<double>& vertex_label,
                           Scale scale) {
    if (contour.empty() || contour.size() % 2 == 0) throw DomainError("contour must have odd length 2n+1");
    DiscreteSnake s;
    s.n = contour.size() / 2;
    s.contour = contour;
    s.scale = scale;
    s.vertex.resize(contour.size());
    s.labels.resize(contour.size());
    s.parent.reserve(s.n + 1);
    s.parent.push_back(0);
    std::vector<std::uint32_t> stack{0};
    for (std::size_t i = 1; i < contour.size(); ++i) {
        const int step = contour[i] - contour[i - 1];
        if (step == 1) {
            const auto v = static_cast<std::uint32_t>(s.parent.size());
            s.parent.push_back(stack.back());
            stack.push_back(v);
        } else if (step == -1 && stack.size() > 1) {
            stack.pop_back();
        } else {
            throw DomainError("contour is not a nonnegative walk with unit steps");
        }
        s.vertex[i] = stack.back();
    }
    if (contour.front() != 0 || contour.back() != 0) throw DomainError("contour must start and end at 0");
    if (vertex_label.size() != s.parent.size()) throw DomainError("one label per vertex is required");
    s.vertex_label = vertex_label;
    s.visits.assign(s.parent.size(), 0);
    for (std::size_t i = 0; i < contour.size(); ++i) {
        s.labels[i] = vertex_label[s.vertex[i]];
        if (i + 1 < contour.size()) ++s.visits[s.vertex[i]];
    }
    return s;
}

DiscreteSnake sample_snake(std::size_t n, Random& rng) {
    if (n < 1) throw DomainError("snake needs n >= 1");
    std::vector<std::int8_t> steps(2 * n + 1, -1);
    std::fill(steps.begin(), steps.begin() + static_cast<std::ptrdiff_t>(n), 1);
    std::shuffle(steps.begin(), steps.end(), rng.engine());
    // cycle lemma: start right after the first minimum of the partial sums
    std::int64_t sum = 0, best = 1;
    std::size_t first_min = 0;
    for (std::size_t j = 0; j < steps.size(); ++j) {
        sum += steps[j];
        if (sum < best) {
            best = sum;
            first_min = j;
        }
    }
    std::vector<std::int32_t> contour(2 * n + 1);
    contour[0] = 0;
    for (std::size_t t = 1; t <= 2 * n; ++t)
        contour[t] = contour[t - 1] + steps[(first_min + t) % steps.size()];

    std::vector<double> label(n + 1, 0.0);
    DiscreteSnake s = from_contour(contour, label, default_scale(n));
    for (std::size_t v = 1; v < s.vertex_count(); ++v) s.vertex_label[v] = s.vertex_label[s.parent[v]] + rng.normal();
    for (std::size_t i = 0; i < s.labels.size(); ++i) s.labels[i] = s.vertex_label[s.vertex[i]];
    return s;
}

DiscreteSnake sample_snake(std::size_t n, const RngStream& stream) {
    Random rng = stream.random();
    return sample_snake(n, rng);
}

void resample_labels(DiscreteSnake& s, Random& rng) {
    s.vertex_label[0] = 0.0;
    for (std::size_t v = 1; v < s.vertex_count(); ++v) s.vertex_label[v] = s.vertex_label[s.parent[v]] + rng.normal();
    for (std::size_t i = 0; i < s.labels.size(); ++i) s.labels[i] = s.vertex_label[s.vertex[i]];
}

DiscreteSnake truncate(const DiscreteSnake& s, double y) {
    const double root = s.continuum_label(0);
    auto hit = [&](std::size_t v) {
        const double l = s.continuum_label(v);
        if (y < root) return l <= y;
        if (y > root) return l >= y;
        return true;
    };
    const std::size_t nv = s.vertex_count();
    std::vector<char> keep(nv, 1), blocked(nv, 0);
    for (std::size_t v = 1; v < nv; ++v) {
        const auto p = s.parent[v];
        blocked[v] = blocked[p] || hit(p);
        keep[v] = !blocked[v];
    }
    std::vector<std::int32_t> contour;
    std::vector<double> labels;
    contour.reserve(s.contour.size());
    for (std::size_t i = 0; i < s.contour.size(); ++i)
        if (keep[s.vertex[i]] && (i == 0 || keep[s.vertex[i - 1]])) contour.push_back(s.contour[i]);
    for (std::size_t v = 0; v < nv; ++v)
        if (keep[v]) labels.push_back(s.vertex_label[v]);
    return from_contour(contour, labels, s.scale);
}

SnakeAudit audit_snake(const DiscreteSnake& s) {
    SnakeAudit a;
    const auto& c = s.contour;
    if (c.size() != 2 * s.n + 1 || c.front() != 0 || c.back() != 0) a.excursion = false;
    for (std::size_t i = 1; i < c.size() && a.excursion; ++i)
        if (std::abs(c[i] - c[i - 1]) != 1 || c[i] < 0) a.excursion = false;
    if (!a.excursion) return a;

    std::vector<double> label_stack{s.labels[0]};
    std::vector<std::uint32_t> vertex_stack{s.vertex[0]};
    if (s.vertex[0] != 0) a.tree_consistent = false;
    for (std::size_t i = 1; i < c.size(); ++i) {
        if (c[i] > c[i - 1]) {
            label_stack.push_back(s.labels[i]);
            vertex_stack.push_back(s.vertex[i]);
            if (s.parent[s.vertex[i]] != vertex_stack[vertex_stack.size() - 2]) a.tree_consistent = false;
        } else {
            label_stack.pop_back();
            vertex_stack.pop_back();
            if (s.labels[i] != label_stack.back()) a.snake_property = false;
            if (s.vertex[i] != vertex_stack.back()) a.tree_consistent = false;
        }
        if (s.labels[i] != s.vertex_label[s.vertex[i]]) a.snake_property = false;
    }
    return a;
}

namespace {

// component id per vertex (npos when the label is <= r); parents precede children in DFS numbering
std::vector<std::size_t> component_ids(const DiscreteSnake& s, double r, std::vector<std::uint32_t>& tops) {
    const std::size_t nv = s.vertex_count();
    std::vector<std::size_t> id(nv, npos);
    for (std::size_t v = 0; v < nv; ++v) {
        if (!(s.continuum_label(v) > r)) continue;
        const std::size_t p = s.parent[v];
        if (v != 0 && id[p] != npos) {
            id[v] = id[p];
        } else {
            id[v] = tops.size();
            tops.push_back(static_cast<std::uint32_t>(v));
        }
    }
    return id;
}

}  // namespace

std::vector<LevelComponent> components_above(const DiscreteSnake& s, double r) {
    std::vector<std::uint32_t> tops;
    const auto id = component_ids(s, r, tops);
    std::vector<LevelComponent> out(tops.size());
    for (std::size_t k = 0; k < tops.size(); ++k) {
        out[k].r = r;
        out[k].top = tops[k];
        out[k].attachment = tops[k] == 0 ? npos : s.parent[tops[k]];
    }
    for (std::size_t v = 0; v < id.size(); ++v) {
        if (id[v] == npos) continue;
        out[id[v]].vertices.push_back(static_cast<std::uint32_t>(v));
        out[id[v]].volume += s.visits[v] * s.scale.mass;
    }
    return out;
}

double boundary_size_est(const DiscreteSnake& s, LevelComponent& c, double eps) {
    if (!(eps > 0.0)) throw DomainError("eps must be positive");
    double steps = 0.0;
    for (auto v : c.vertices) {
        const double l = s.continuum_label(v);
        if (c.r < l && l < c.r + eps) steps += s.visits[v];
    }
    const double est = steps * s.scale.mass / (eps * eps);
    c.boundary_size_estimates[eps] = est;
    return est;
}

double exit_measure_est(const DiscreteSnake& s, double r, double eps) {
    if (!(r < 0.0)) throw DomainError("exit level must be negative");
    if (!(eps > 0.0)) throw DomainError("eps must be positive");
    const std::size_t nv = s.vertex_count();
    std::vector<double> lowest(nv);
    double steps = 0.0;
    for (std::size_t v = 0; v < nv; ++v) {
        const double l = s.continuum_label(v);
        lowest[v] = v == 0 ? l : std::min(lowest[s.parent[v]], l);
        if (lowest[v] > r && l < r + eps) steps += s.visits[v];
    }
    return steps * s.scale.mass / (eps * eps);
}

double local_time_est(const DiscreteSnake& s, double x, double eps) {
    if (!(eps > 0.0)) throw DomainError("eps must be positive");
    double steps = 0.0;
    for (std::size_t v = 0; v < s.vertex_count(); ++v)
        if (std::abs(s.continuum_label(v) - x) < eps) steps += s.visits[v];
    return steps * s.scale.mass / (2.0 * eps);
}

std::vector<gf::RankedMasses> ranked_boundary_process(const DiscreteSnake& s, const std::vector<double>& r_grid,
                                                      double eps) {
    if (!std::is_sorted(r_grid.begin(), r_grid.end())) throw DomainError("level grid must be increasing");
    std::vector<gf::RankedMasses> out;
    for (double r : r_grid) {
        gf::RankedMasses m;
        m.r = r;
        for (auto& c : components_above(s, r)) m.masses.push_back(boundary_size_est(s, c, eps));
        std::sort(m.masses.begin(), m.masses.end(), std::greater<>());
        out.push_back(std::move(m));
    }
    return out;
}

NestingAudit nesting_audit(const DiscreteSnake& s, double r_lo, double r_hi) {
    if (r_hi < r_lo) std::swap(r_lo, r_hi);
    NestingAudit a;
    std::vector<std::uint32_t> tops_lo, tops_hi;
    const auto lo = component_ids(s, r_lo, tops_lo);
    const auto hi = component_ids(s, r_hi, tops_hi);
    std::vector<std::size_t> host(tops_hi.size(), npos);
    std::vector<std::size_t> top_count(tops_hi.size(), 0);
    for (std::size_t v = 0; v < hi.size(); ++v) {
        if (hi[v] == npos) continue;
        const std::size_t k = hi[v];
        if (lo[v] == npos || (host[k] != npos && host[k] != lo[v])) ++a.failures;
        host[k] = lo[v];
        if (v == 0 || hi[s.parent[v]] != k) ++top_count[k];
    }
    for (std::size_t k = 0; k < tops_hi.size(); ++k) {
        ++a.components_checked;
        if (top_count[k] != 1) ++a.failures;
    }
    return a;
}

double calibrate_space_scale(std::size_t n, std::size_t samples, const RngStream& stream) {
    if (samples == 0) throw DomainError("calibration needs samples");
    double second = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
        const auto s = sample_snake(n, stream.child(k));
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < s.labels.size(); ++i) acc += s.labels[i] * s.labels[i];
        second += acc / static_cast<double>(2 * n);
    }
    second /= static_cast<double>(samples);
    return std::sqrt(std::sqrt(std::numbers::pi / 8.0) / second);
}

}  // namespace bgf::snake
