#include "bgf/cell_system.hpp"

#include <algorithm>
#include <cmath>

#include "bgf/errors.hpp"
#include "bgf/exponents.hpp"
#include "bgf/parallel.hpp"
#include "bgf/special.hpp"
#include "bgf/stats.hpp"

namespace bgf::gf {

std::string to_string(EveKind k) { return k == EveKind::standard ? "standard" : "conditioned"; }

EveKind parse_eve_kind(const std::string& name) {
    if (name == "standard") return EveKind::standard;
    if (name == "conditioned") return EveKind::conditioned;
    throw DomainError("unknown Eve kind '" + name + "' (expected standard or conditioned)");
}

double CellTree::extinction_time() const {
    if (censored) return kInfinity;
    double t = 0.0;
    for (const auto& c : cells) t = std::max(t, c.last_level());
    return t;
}

namespace {

// int over a segment of sqrt(X) affine from sqrt(x0) to sqrt(x1), clock length dc, of X^q
double segment_power_integral(double x0, double x1, double dc, double q) {
    if (dc == 0.0) return 0.0;
    const double a = std::sqrt(x0);
    const double rho = (std::sqrt(x1) - a) / a;
    const double m = 2.0 * q + 1.0;
    const double shape = std::abs(rho) < 1e-8 ? 1.0 + q * rho : std::expm1(m * std::log1p(rho)) / (m * rho);
    return dc * std::pow(x0, q) * shape;
}

// Exact split of `pre` by a log-jump y: post + child == pre and pre - post == child in floating point.
void exact_split(double pre, double y, double& post, double& child) {
    const double e = std::exp(y);
    if (e >= 0.5) {
        post = pre * e;
        child = pre - post;
    } else {
        child = pre * -std::expm1(y);
        post = pre - child;
    }
}

double path_value(const std::vector<double>& clock, const std::vector<double>& mass, double t) {
    auto it = std::upper_bound(clock.begin(), clock.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - clock.begin()) - 1;
    if (i + 1 >= clock.size()) return mass.back();
    const double w = (t - clock[i]) / (clock[i + 1] - clock[i]);
    const double root = std::sqrt(mass[i]) + (std::sqrt(mass[i + 1]) - std::sqrt(mass[i])) * w;
    return root * root;
}

}  // namespace

struct GfSimulator::Impl {
    struct Exponent {
        double q = 0.0;
        double s = 0.0;          // q + 1/2
        double psi_s = 0.0;      // psi(s), standard law
        double jump_moment = 0.0;  // int (1 - e^y)^s pi(dy)
        std::vector<double> unresolved_eve;
        std::vector<double> unresolved_hat;
    };

    levy::LevySampler eve;
    std::unique_ptr<levy::LevySampler> hat;
    double psi_half = 0.0;
    std::vector<Exponent> exps;

    static std::vector<double> unresolved_table(const levy::LevySampler& s, double power) {
        // J_k = int_{|y| < a_k} (1 - e^y)^power nu(dy), summed over pieces reaching 0
        std::vector<double> j(s.level_count(), 0.0);
        auto f = [power](double y) { return std::pow(-std::expm1(y), power); };
        for (const auto& piece : s.pieces()) {
            if (!piece.singular_at_zero()) continue;
            double acc = piece.integrate(f, -s.level_by_index(0).delta, 0.0).value;
            j[0] += acc;
            for (std::size_t k = 1; k < j.size(); ++k) {
                acc += piece.integrate(f, -s.level_by_index(k).delta, -s.level_by_index(k - 1).delta).value;
                j[k] += acc;
            }
        }
        return j;
    }

    explicit Impl(const GfConfig& c)
        : eve(levy::LevySampler::for_process(levy::Process::eve, delta_min(c))) {
        if (c.eve == EveKind::conditioned)
            hat = std::make_unique<levy::LevySampler>(levy::LevySampler::for_process(levy::Process::hat, delta_min(c)));
        psi_half = exponents::psi_eve(0.5).value;
        for (double q : c.norm_exponents) {
            if (q < 1.0) throw DomainError("norm exponent must be at least 1");
            Exponent e;
            e.q = q;
            e.s = q + 0.5;
            e.psi_s = exponents::psi_eve(e.s).value;
            const auto kappa = exponents::kappa_closed(e.s);
            e.jump_moment = kappa.infinite ? kInfinity : kappa.value - e.psi_s;
            e.unresolved_eve = unresolved_table(eve, e.s);
            if (hat) e.unresolved_hat = unresolved_table(*hat, e.s);
            exps.push_back(std::move(e));
        }
    }

    static double delta_min(const GfConfig& c) { return std::min(1e-4, 0.25 * c.mass_floor); }
};

GfSimulator::GfSimulator(GfConfig config) : config_(std::move(config)) {
    if (!(config_.mass_floor > 0.0)) throw DomainError("mass floor must be positive");
    if (!(config_.z > 0.0)) throw DomainError("initial mass must be positive");
    if (config_.eve == EveKind::standard && !(config_.mass_floor < config_.z))
        throw DomainError("mass floor must lie below the initial mass");
    if (config_.eve == EveKind::conditioned && !(config_.horizon < kInfinity))
        throw DomainError("the conditioned Eve needs a finite horizon");
    if (!(config_.horizon >= 0.0)) throw DomainError("horizon must be nonnegative");
    if (!(config_.levy_step > 0.0) || !(config_.delta_cap > 0.0) || !(config_.delta_margin >= 1.0))
        throw DomainError("invalid step or cutoff parameters");
    impl_ = std::make_unique<Impl>(config_);
}

GfSimulator::~GfSimulator() = default;
GfSimulator::GfSimulator(GfSimulator&&) noexcept = default;

double GfSimulator::psi_standard(double s) const { return exponents::psi_eve(s).value; }

double GfSimulator::jump_moment_standard(double s) const {
    const auto k = exponents::kappa_closed(s);
    return k.infinite ? kInfinity : k.value - psi_standard(s);
}

namespace {

struct Pending {
    double mass;
    double h;
    std::vector<std::uint32_t> path;
    std::size_t id;
    bool conditioned;
};

struct RunState {
    GfSummary summary;
    CellTree* tree = nullptr;
};

}  // namespace

static void run_tree(const GfConfig& cfg, const GfSimulator::Impl& impl, const RngStream& stream, RunState& st);

CellTree GfSimulator::simulate(const RngStream& stream) const {
    CellTree tree;
    tree.config = config_;
    tree.seed = stream.master_seed();
    tree.stream = stream.describe();
    RunState st;
    st.tree = &tree;
    run_tree(config_, *impl_, stream, st);
    tree.censored = st.summary.censored;
    tree.norms = st.summary.norms;
    tree.simulated_cells = st.summary.simulated_cells;
    tree.pruned_cells = st.summary.pruned_cells;
    return tree;
}

GfSummary GfSimulator::summarize(const RngStream& stream) const {
    RunState st;
    run_tree(config_, *impl_, stream, st);
    return st.summary;
}

static void run_tree(const GfConfig& cfg, const GfSimulator::Impl& impl, const RngStream& stream, RunState& st) {
    auto& sum = st.summary;
    CellTree* tree = st.tree;
    const bool record = tree != nullptr && cfg.record_paths;
    for (const auto& e : impl.exps) sum.norms.push_back({e.q, 0.0, 0.0});

    const bool conditioned_root = cfg.eve == EveKind::conditioned;
    std::vector<Pending> stack;
    stack.push_back({conditioned_root ? cfg.entrance_mass : cfg.z, 0.0, {}, 0, conditioned_root});
    if (tree) {
        Cell root;
        root.id = root.parent = 0;
        root.birth_mass = stack.back().mass;
        root.conditioned = conditioned_root;
        tree->cells.push_back(std::move(root));
    }
    const double floor = cfg.mass_floor;
    const double r_max = cfg.horizon;
    const double abs_psi_half = -impl.psi_half;
    std::vector<levy::StepKnot> knots;
    double extinction = 0.0;
    const auto& law = cfg.extinction_law;
    auto subtree_height = [&](double mass, Random& rng) {
        if (law.empty()) return std::sqrt(mass) / abs_psi_half;
        const double u = rng.uniform() * static_cast<double>(law.size() - 1);
        const auto k = static_cast<std::size_t>(u);
        const double w = u - static_cast<double>(k);
        const double m = k + 1 < law.size() ? law[k] + w * (law[k + 1] - law[k]) : law[k];
        return std::sqrt(mass) * m;
    };

    while (!stack.empty()) {
        Pending p = std::move(stack.back());
        stack.pop_back();
        if (++sum.simulated_cells > cfg.max_cells)
            throw BudgetExceeded("growth-fragmentation run exceeded the cell budget", sum.simulated_cells - 1);

        const levy::LevySampler& sampler = p.conditioned ? *impl.hat : impl.eve;
        const std::vector<std::uint64_t> wide(p.path.begin(), p.path.end());
        Random rng = stream.child(wide).random();
        double x = p.mass, clock = 0.0;
        std::uint32_t jump_index = 0;
        bool truncated = false, censored = false;
        std::vector<double> path_clock, path_mass;
        std::vector<Cell::Split> splits;
        std::vector<std::size_t> children;
        if (record) {
            path_clock.push_back(0.0);
            path_mass.push_back(x);
        }

        for (;;) {
            if (!p.conditioned && x < floor) {
                truncated = true;
                break;
            }
            if (p.h + clock >= r_max) {
                censored = true;
                break;
            }
            const double ratio = floor / (x * cfg.delta_margin);
            const double delta = ratio < 1.0 ? std::min(-std::log1p(-ratio), cfg.delta_cap) : cfg.delta_cap;
            const std::size_t k = sampler.level_index(delta);
            const auto& lv = sampler.level_by_index(k);
            knots.clear();
            sampler.step(lv, cfg.levy_step, rng, knots);
            double last = 0.0;
            for (const auto& kn : knots) {
                const double seg = kn.offset - last;
                last = kn.offset;
                const double x1 = x * std::exp(kn.continuous);
                const double dc = seg * std::sqrt(x) * special::exprel(0.5 * kn.continuous);
                for (std::size_t e = 0; e < impl.exps.size(); ++e) {
                    const auto& ex = impl.exps[e];
                    sum.norms[e].value += segment_power_integral(x, x1, dc, ex.q);
                    const auto& j = p.conditioned ? ex.unresolved_hat : ex.unresolved_eve;
                    sum.norms[e].missing_moment += std::pow(x, ex.s) * seg * j[k];
                }
                clock += dc;
                x = x1;
                if (record) {
                    path_clock.push_back(clock);
                    path_mass.push_back(x);
                }
                if (kn.jump == 0.0) continue;

                ++jump_index;
                double post = 0.0, child = 0.0;
                exact_split(x, kn.jump, post, child);
                const double birth = p.h + clock;
                std::size_t child_id = npos;
                if (child > floor) {
                    if (birth <= r_max) {
                        auto path = p.path;
                        path.push_back(jump_index);
                        if (tree) {
                            child_id = tree->cells.size();
                            Cell c;
                            c.id = child_id;
                            c.parent = p.id;
                            c.index_path = path;
                            c.h = birth;
                            c.birth_mass = child;
                            tree->cells.push_back(std::move(c));
                            children.push_back(child_id);
                        }
                        stack.push_back({child, birth, std::move(path), child_id, false});
                    }
                } else if (birth <= r_max) {
                    ++sum.pruned_cells;
                    for (std::size_t e = 0; e < impl.exps.size(); ++e)
                        sum.norms[e].missing_moment += std::pow(child, impl.exps[e].s);
                    const double life = subtree_height(child, rng);
                    extinction = std::max(extinction, birth + life);
                    if (tree) {
                        child_id = tree->cells.size();
                        Cell c;
                        c.id = child_id;
                        c.parent = p.id;
                        c.index_path = p.path;
                        c.index_path.push_back(jump_index);
                        c.h = birth;
                        c.birth_mass = child;
                        c.beta = life;
                        c.subtree_end = birth + life;
                        c.pruned = true;
                        tree->cells.push_back(std::move(c));
                        children.push_back(child_id);
                    }
                }
                if (tree) splits.push_back({clock, x, post, child, child_id});
                x = post;
                if (record) {
                    path_clock.push_back(clock);
                    path_mass.push_back(x);
                }
            }
        }

        double beta = clock, subtree_end = 0.0;
        if (truncated) {
            beta = clock + std::sqrt(x) / abs_psi_half;
            subtree_end = law.empty() ? p.h + beta : p.h + clock + subtree_height(x, rng);
            extinction = std::max(extinction, subtree_end);
            for (std::size_t e = 0; e < impl.exps.size(); ++e) {
                const auto& ex = impl.exps[e];
                const double own = std::pow(x, ex.s) / -ex.psi_s;
                sum.norms[e].value += own;
                sum.norms[e].missing_moment += own * ex.jump_moment;
            }
            if (record) {
                path_clock.push_back(beta);
                path_mass.push_back(0.0);
            }
        }
        if (censored) {
            sum.censored = true;
            beta = kInfinity;
        }
        extinction = std::max(extinction, p.h + beta);
        if (tree) {
            Cell& c = tree->cells[p.id];
            c.index_path = p.path;
            c.h = p.h;
            c.beta = beta;
            c.subtree_end = subtree_end;
            c.truncated = truncated;
            c.censored = censored;
            c.conditioned = p.conditioned;
            c.clock = std::move(path_clock);
            c.mass = std::move(path_mass);
            c.splits = std::move(splits);
            c.children = std::move(children);
        }
    }
    sum.extinction_time = sum.censored ? kInfinity : extinction;
}

std::vector<double> extinction_law_fixed_point(GfConfig config, std::size_t runs, std::size_t iterations,
                                               const RngStream& stream) {
    if (runs < 2) throw DomainError("fixed point needs at least two runs");
    config.z = 1.0;
    config.horizon = kInfinity;
    config.eve = EveKind::standard;
    config.record_paths = false;
    config.extinction_law.clear();
    std::vector<double> law;
    for (std::size_t it = 0; it <= iterations; ++it) {
        const GfSimulator sim(config);
        std::vector<double> next(runs);
        const RngStream round = stream.child(it);
        parallel_for(runs, [&](std::size_t i) { next[i] = sim.summarize(round.child(i)).extinction_time; });
        std::sort(next.begin(), next.end());
        law = std::move(next);
        config.extinction_law = law;
    }
    return law;
}

CellTree simulate_gf(double z, double horizon, double mass_floor, EveKind eve, const RngStream& rng) {
    GfConfig c;
    c.z = z;
    c.horizon = horizon;
    c.mass_floor = mass_floor;
    c.eve = eve;
    return GfSimulator(c).simulate(rng);
}

namespace {

void collect_masses(const CellTree& tree, double r, std::vector<double>& big, std::vector<double>& small) {
    if (r < 0.0) throw DomainError("negative level");
    if (r > tree.config.horizon) throw OutOfHorizon("level beyond the simulated horizon");
    if (!tree.config.record_paths) throw DomainError("mass paths were not recorded");
    const double floor = tree.config.mass_floor;
    for (const auto& c : tree.cells) {
        if (!(c.h <= r && r < c.death_level())) continue;
        if (c.pruned) {
            small.push_back(c.birth_mass);
            continue;
        }
        const double m = path_value(c.clock, c.mass, r - c.h);
        if (m > floor || (c.conditioned && m > 0.0))
            big.push_back(m);
        else if (m > 0.0)
            small.push_back(m);
    }
}

}  // namespace

RankedMasses masses_at(const CellTree& tree, double r) {
    RankedMasses out;
    out.r = r;
    std::vector<double> small;
    collect_masses(tree, r, out.masses, small);
    std::sort(out.masses.begin(), out.masses.end(), std::greater<>());
    for (double m : small) out.truncated_mass_bound += m;
    return out;
}

NormValue p_norm(const CellTree& tree, double r, double q) {
    if (q < 1.0) throw DomainError("p_norm requires q >= 1");
    std::vector<double> big, small;
    collect_masses(tree, r, big, small);
    NormValue v;
    for (double m : big) v.value += std::pow(m, q);
    for (double m : small) v.bound += std::pow(m, q);
    return v;
}

IntegralNorm integral_p_norm(const CellTree& tree, double q) {
    if (q < 1.0) throw DomainError("integral_p_norm requires q >= 1");
    IntegralNorm out;
    out.censored = tree.censored;
    const double s = q + 0.5;
    bool found = false;
    for (const auto& n : tree.norms)
        if (std::abs(n.q - q) < 1e-12) {
            out.value = n.value;
            out.missing_moment = n.missing_moment;
            found = true;
        }
    if (!found) {
        if (!tree.config.record_paths) throw DomainError("exponent not accumulated and paths not recorded");
        const double psi_s = exponents::psi_eve(s).value;
        const auto kappa = exponents::kappa_closed(s);
        const double jump_moment = kappa.infinite ? kInfinity : kappa.value - psi_s;
        for (const auto& c : tree.cells) {
            if (c.pruned) {
                out.missing_moment += std::pow(c.birth_mass, s);
                continue;
            }
            const std::size_t end = c.truncated ? c.clock.size() - 1 : c.clock.size();
            for (std::size_t i = 1; i < end; ++i)
                out.value += segment_power_integral(c.mass[i - 1], c.mass[i], c.clock[i] - c.clock[i - 1], q);
            if (c.truncated) {
                const double x = c.mass[end - 1];
                const double own = std::pow(x, s) / -psi_s;
                out.value += own;
                out.missing_moment += own * jump_moment;
            }
        }
    }
    const double scale = std::pow(tree.cells.empty() ? tree.config.z : tree.cells[tree.root].birth_mass, s);
    const double denom = scale - out.missing_moment;
    out.bias_bound = denom > 0.0 ? out.value / denom * out.missing_moment : kInfinity;
    return out;
}

std::size_t frag_count(const CellTree& tree, double r, double eps) {
    if (!(eps > tree.config.mass_floor)) throw DomainError("below pruning resolution");
    std::vector<double> big, small;
    collect_masses(tree, r, big, small);
    return static_cast<std::size_t>(std::count_if(big.begin(), big.end(), [eps](double m) { return m > eps; }));
}

std::vector<double> hat_marginal(const levy::LevySampler& hat, double r, std::size_t n, double x0,
                                 const RngStream& rng, double delta, double levy_step) {
    if (!(r > 0.0) || !(x0 > 0.0)) throw DomainError("hat_marginal needs r > 0 and x0 > 0");
    const auto& lv = hat.cached_level(delta);
    std::vector<double> out(n);
    parallel_for(n, [&](std::size_t i) {
        Random g = rng.child(i).random();
        std::vector<levy::StepKnot> knots;
        double x = x0, clock = 0.0;
        for (;;) {
            knots.clear();
            hat.step(lv, levy_step, g, knots);
            double last = 0.0;
            for (const auto& kn : knots) {
                const double seg = kn.offset - last;
                last = kn.offset;
                const double x1 = x * std::exp(kn.continuous);
                const double dc = seg * std::sqrt(x) * special::exprel(0.5 * kn.continuous);
                if (clock + dc >= r) {
                    const double w = (r - clock) / dc;
                    const double root = std::sqrt(x) + (std::sqrt(x1) - std::sqrt(x)) * w;
                    out[i] = root * root;
                    return;
                }
                clock += dc;
                x = x1 * std::exp(kn.jump);
            }
        }
    });
    return out;
}

std::vector<double> hat_marginal(double r, std::size_t n, double x0, const RngStream& rng, double delta,
                                 double levy_step) {
    const auto hat = levy::LevySampler::for_process(levy::Process::hat, std::min(delta, 1e-3));
    return hat_marginal(hat, r, n, x0, rng, delta, levy_step);
}

double hat_marginal_ks(const std::vector<double>& samples, double r) {
    const double scale = 2.0 * r * r / 3.0;
    return stats::ks_one_sample(samples, [scale](double x) { return stats::gamma_cdf(x, 1.5, scale); });
}

AuditReport audit(const CellTree& tree) {
    AuditReport rep;
    auto fail = [&rep](std::size_t& counter, const std::string& what) {
        ++counter;
        if (rep.first_failure.empty()) rep.first_failure = what;
    };
    for (const auto& c : tree.cells) {
        const std::string tag = "cell " + std::to_string(c.id);
        if (c.is_root()) {
            if (!c.index_path.empty() || c.id != tree.root) fail(rep.lineage_failures, tag + ": malformed root");
        } else {
            if (c.parent >= tree.cells.size()) {
                fail(rep.lineage_failures, tag + ": dangling parent");
                continue;
            }
            const Cell& par = tree.cells[c.parent];
            const auto& pp = par.index_path;
            if (c.index_path.size() != pp.size() + 1 || !std::equal(pp.begin(), pp.end(), c.index_path.begin()))
                fail(rep.lineage_failures, tag + ": index path does not extend the parent's");
            if (std::find(par.children.begin(), par.children.end(), c.id) == par.children.end())
                fail(rep.lineage_failures, tag + ": missing from the parent's children");
            if (!(c.h >= par.h) || !(c.h <= par.death_level()))
                fail(rep.lineage_failures, tag + ": birth level outside the parent's lifetime");
        }
        if (c.pruned) {
            if (!(c.birth_mass <= tree.config.mass_floor)) fail(rep.lineage_failures, tag + ": pruned above floor");
            continue;
        }
        if (!c.is_root() && !(c.birth_mass > tree.config.mass_floor))
            fail(rep.lineage_failures, tag + ": simulated below floor");
        for (std::size_t i = 0; i < c.splits.size(); ++i) {
            const auto& s = c.splits[i];
            ++rep.splits_checked;
            if (!(s.pre - s.post == s.child && s.post + s.child == s.pre))
                fail(rep.conservation_failures, tag + ": split not conservative");
            if (!c.conditioned && !(s.post > s.child)) fail(rep.dominance_failures, tag + ": jump dominance violated");
            if (s.child_id != npos) {
                const Cell& ch = tree.cells[s.child_id];
                if (ch.birth_mass != s.child) fail(rep.lineage_failures, tag + ": child mass differs from the jump");
                if (ch.h != c.h + s.clock) fail(rep.lineage_failures, tag + ": child level differs from the jump level");
                if (ch.parent != c.id) fail(rep.lineage_failures, tag + ": child points to another parent");
            }
        }
        for (std::size_t i = 0; i + 1 < c.clock.size(); ++i) {
            if (!(c.mass[i] > 0.0)) fail(rep.lineage_failures, tag + ": nonpositive mass before death");
            if (c.clock[i + 1] < c.clock[i]) fail(rep.lineage_failures, tag + ": clock decreases");
        }
    }
    return rep;
}

}  // namespace bgf::gf
