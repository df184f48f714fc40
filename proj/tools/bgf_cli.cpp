#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "bgf/cell_system.hpp"
#include "bgf/config.hpp"
#include "bgf/csbp.hpp"
#include "bgf/errors.hpp"
#include "bgf/experiments.hpp"
#include "bgf/exponents.hpp"
#include "bgf/lamperti.hpp"
#include "bgf/levy.hpp"
#include "bgf/snake.hpp"

using namespace bgf;
namespace fs = std::filesystem;
namespace ex = bgf::exponents;
using experiments::json;

namespace {

std::string num(double x) { return config::format_real(x); }

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write " + path.string());
    return f;
}

fs::path default_dir(const std::string& out_dir, const std::string& name) {
    return out_dir.empty() ? experiments::output_root() / name : fs::path(out_dir);
}

void write_path_csv(const fs::path& path, const std::vector<double>& t, const std::vector<double>& v,
                    const std::vector<unsigned char>& jump) {
    auto f = open_out(path);
    f << "time,value,is_jump\n";
    for (std::size_t i = 0; i < t.size(); ++i) f << num(t[i]) << ',' << num(v[i]) << ',' << int(jump[i]) << '\n';
}

std::uint64_t fresh_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

int cmd_exponents(const std::string& fn, double arg) {
    ex::Value v;
    if (fn == "psi") {
        v = ex::psi_eve(arg);
    } else if (fn == "psi-circ") {
        v = ex::psi_circ(arg);
    } else if (fn == "psi-hat") {
        v = {ex::psi_hat(arg), 0.0};
    } else if (fn == "kappa") {
        const auto k = ex::kappa_closed(arg);
        if (!k.is_finite()) {
            std::cout << "value inf\nerror 0\n";
            return 0;
        }
        v = {k.value, 0.0};
        if (arg > ex::kKappaDomainLower) v.error = ex::kappa_integral(arg).error;
    } else {
        v = {ex::phi(arg), 0.0};
    }
    std::cout << "value " << num(v.value) << "\nerror " << num(v.error) << "\n";
    return 0;
}

int cmd_levy(const std::string& process, double horizon, double delta, double dt, std::uint64_t seed,
             const std::string& out) {
    const auto p = levy::parse_process(process);
    const auto sampler = levy::LevySampler::for_process(p, delta);
    const auto path = sampler.sample_path(horizon, delta, dt, RngStream(seed));
    const fs::path target = out.empty() ? experiments::output_root() / "levy" / (process + ".csv") : fs::path(out);
    write_path_csv(target, path.times, path.values, path.is_jump);
    std::cout << "wrote " << target.string() << " (" << path.size() << " knots, " << path.jumps.size()
              << " jumps)\n";
    return 0;
}

int cmd_lamperti(double z, double horizon, double hat_horizon, double delta, double dt, double x0, std::uint64_t seed,
                 const std::string& out_dir) {
    const fs::path dir = default_dir(out_dir, "lamperti");
    const RngStream stream(seed);
    const auto eve = levy::LevySampler::for_process(levy::Process::eve, delta);
    const auto circ = levy::LevySampler::for_process(levy::Process::circ, delta);
    const auto hat = levy::LevySampler::for_process(levy::Process::hat, delta);
    const auto x = lamperti::pssmp_from_levy(eve.sample_path(horizon, delta, dt, stream.child(0)), z, 1e-3);
    const auto xc = lamperti::pssmp_from_levy(circ.sample_path(horizon, delta, dt, stream.child(1)), z, 1e-3);
    const auto xh = lamperti::pssmp_from_levy(hat.sample_path(hat_horizon, delta, dt, stream.child(2)), x0, 1e-3);
    const auto u = lamperti::stopped_stable_path(z, dt, stream.child(3));
    const auto y = lamperti::csbp_from_stable(u, z);
    write_path_csv(dir / "X.csv", x.times, x.values, x.is_jump);
    write_path_csv(dir / "X_circ.csv", xc.times, xc.values, xc.is_jump);
    write_path_csv(dir / "X_hat.csv", xh.times, xh.values, xh.is_jump);
    write_path_csv(dir / "Y.csv", y.times, y.values, y.is_jump);
    std::cout << "X absorbed at " << num(x.absorption_time) << "\nX_circ absorbed at " << num(xc.absorption_time)
              << "\nX_hat final value " << num(xh.values.back()) << "\nY last knot at " << num(y.times.back())
              << "\nwrote " << dir.string() << "\n";
    return 0;
}

std::string index_string(const std::vector<std::uint32_t>& path) {
    std::string s;
    for (std::size_t i = 0; i < path.size(); ++i) s += (i ? "." : "") + std::to_string(path[i]);
    return s;
}

int cmd_gf(double z, double horizon, double floor, const std::string& eve, std::size_t replicates,
           std::uint64_t seed, const std::vector<double>& levels, const std::string& out_dir) {
    const fs::path dir = default_dir(out_dir, "gf");
    gf::GfConfig g;
    g.z = z;
    g.horizon = horizon;
    g.mass_floor = floor;
    g.eve = gf::parse_eve_kind(eve);
    const gf::GfSimulator sim(g);
    const RngStream stream(seed);
    json runs = json::array();
    for (std::size_t k = 0; k < replicates; ++k) {
        const auto tree = sim.simulate(stream.child(k));
        const fs::path rd = replicates == 1 ? dir : dir / ("run_" + std::to_string(k));
        auto cells = open_out(rd / "cells.csv");
        cells << "id,parent,index_path,h,beta,birth_mass,pruned,truncated,censored\n";
        for (const auto& c : tree.cells)
            cells << c.id << ',' << c.parent << ',' << index_string(c.index_path) << ',' << num(c.h) << ','
                  << num(c.beta) << ',' << num(c.birth_mass) << ',' << c.pruned << ',' << c.truncated << ','
                  << c.censored << '\n';
        json ranked = json::array();
        for (double r : levels) {
            if (r > horizon) continue;
            const auto m = gf::masses_at(tree, r);
            auto f = open_out(rd / ("ranked_r" + num(r) + ".csv"));
            f << "rank,mass\n";
            for (std::size_t i = 0; i < m.masses.size(); ++i) f << i + 1 << ',' << num(m.masses[i]) << '\n';
            ranked.push_back({{"r", r}, {"count", m.masses.size()}, {"truncated_mass_bound", m.truncated_mass_bound}});
        }
        json norms = json::array();
        for (const auto& n : tree.norms) {
            const auto in = gf::integral_p_norm(tree, n.q);
            norms.push_back({{"q", n.q},
                             {"value", in.value},
                             {"missing_moment", in.missing_moment},
                             {"bias_bound", in.bias_bound},
                             {"censored", in.censored}});
        }
        runs.push_back({{"stream", stream.child(k).describe()},
                        {"extinction_time", tree.censored ? json(nullptr) : json(tree.extinction_time())},
                        {"censored", tree.censored},
                        {"simulated_cells", tree.simulated_cells},
                        {"pruned_cells", tree.pruned_cells},
                        {"level_integrals", norms},
                        {"ranked", ranked}});
    }
    json summary = {{"z", z},
                    {"horizon", std::isinf(horizon) ? json("inf") : json(horizon)},
                    {"mass_floor", floor},
                    {"eve", eve},
                    {"seed", seed},
                    {"runs", runs}};
    open_out(dir / "summary.json") << summary.dump(2) << '\n';
    std::cout << "wrote " << dir.string() << "\n";
    return 0;
}

int cmd_csbp(std::size_t replicates, double dt, std::uint64_t seed, const std::string& out_dir) {
    const fs::path dir = default_dir(out_dir, "csbp");
    json reports = json::array();
    bool ok = true;
    for (const char* id : {"csbp-transition", "csbp-exit"}) {
        auto c = experiments::default_config(id);
        c.replicates = replicates;
        c.master_seed = seed;
        c.params["dt"] = dt;
        const auto rep = experiments::execute(c);
        for (const auto& g : rep.gates)
            std::cout << (g.passed ? "pass " : "FAIL ") << g.name << ": " << num(g.value) << " vs " << num(g.target)
                      << " +- " << num(g.tolerance) << "\n";
        ok = ok && rep.passed();
        reports.push_back(rep.to_json());
    }
    json constants = {{"range_tail_at_1", csbp::n0_constants(csbp::N0Kind::range_tail)(1.0)},
                      {"Lz_mass_at_1", csbp::n0_constants(csbp::N0Kind::Lz_mass)(1.0)},
                      {"local_time_constant", csbp::local_time_constant()},
                      {"frag_local_time_factor", csbp::frag_local_time_factor()}};
    open_out(dir / "csbp_report.json") << json{{"reports", reports}, {"constants", constants}}.dump(2) << '\n';
    std::cout << "wrote " << (dir / "csbp_report.json").string() << "\n";
    return ok ? 0 : 1;
}

int cmd_snake(std::size_t n, std::size_t replicates, const std::vector<double>& levels,
              const std::vector<double>& eps, std::uint64_t seed, const std::string& out_dir) {
    const fs::path dir = default_dir(out_dir, "snake");
    const RngStream stream(seed);
    std::vector<std::vector<double>> counts(levels.size()), largest(levels.size() * eps.size());
    for (std::size_t k = 0; k < replicates; ++k) {
        const auto s = snake::sample_snake(n, stream.child(k));
        auto f = open_out(dir / ("snake_" + std::to_string(k) + "_components.csv"));
        f << "level,component,top,attachment,vertices,volume,eps,boundary_size\n";
        for (std::size_t i = 0; i < levels.size(); ++i) {
            auto comps = snake::components_above(s, levels[i]);
            counts[i].push_back(static_cast<double>(comps.size()));
            for (std::size_t j = 0; j < eps.size(); ++j) {
                double best = 0.0;
                for (std::size_t c = 0; c < comps.size(); ++c) {
                    const double b = snake::boundary_size_est(s, comps[c], eps[j]);
                    best = std::max(best, b);
                    f << num(levels[i]) << ',' << c << ',' << comps[c].top << ','
                      << (comps[c].attachment == snake::npos ? std::string("") : std::to_string(comps[c].attachment))
                      << ',' << comps[c].vertices.size() << ',' << num(comps[c].volume) << ',' << num(eps[j]) << ','
                      << num(b) << '\n';
                }
                largest[i * eps.size() + j].push_back(best);
            }
        }
    }
    json agg = json::array();
    for (std::size_t i = 0; i < levels.size(); ++i) {
        json per_eps = json::array();
        for (std::size_t j = 0; j < eps.size(); ++j)
            per_eps.push_back({{"eps", eps[j]},
                               {"mean_largest_boundary_size", stats::mean(largest[i * eps.size() + j])}});
        agg.push_back({{"level", levels[i]}, {"mean_components", stats::mean(counts[i])}, {"boundary", per_eps}});
    }
    json out = {{"n", n},
                {"replicates", replicates},
                {"seed", seed},
                {"space_scale", snake::default_scale(n).space},
                {"mass_scale", snake::default_scale(n).mass},
                {"levels", agg}};
    open_out(dir / "aggregate.json") << out.dump(2) << '\n';
    std::cout << "wrote " << dir.string() << "\n";
    return 0;
}

int cmd_experiment_run(const std::string& id, const std::string& config_path, bool fresh, long long replicates,
                       const std::string& out_dir) {
    auto c = config_path.empty() ? experiments::default_config(id)
                                 : experiments::load_config(config::read_file(config_path));
    if (c.id != id) throw ConfigError("config is for '" + c.id + "', not '" + id + "'");
    if (fresh) {
        c.master_seed = fresh_seed();
        std::cout << "fresh seed " << c.master_seed << "\n";
    }
    if (replicates > 0) c.replicates = static_cast<std::size_t>(replicates);
    if (!out_dir.empty()) c.output_dir = out_dir;
    experiments::Report rep;
    const int code = experiments::run_experiment(c, &rep);
    for (const auto& g : rep.gates)
        std::cout << (g.passed ? "pass " : "FAIL ") << g.name << ": " << num(g.value) << " vs " << num(g.target)
                  << " +- " << num(g.tolerance) << (g.detail.empty() ? "" : "  (" + g.detail + ")") << "\n";
    std::cout << (rep.informational ? "informational" : (code == 0 ? "PASS" : "FAIL")) << " " << id << " in "
              << num(rep.wall_seconds) << " s; report in " << experiments::output_dir(c).string() << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Brownian growth-fragmentation toolkit"};
    app.require_subcommand(1);

    auto* exps = app.add_subcommand("exponents", "Laplace exponents and the cumulant function");
    auto* eval = exps->add_subcommand("eval", "evaluate one function");
    std::string fn = "psi";
    double arg = 1.0;
    eval->add_option("--fn", fn)->check(CLI::IsMember({"psi", "psi-circ", "psi-hat", "kappa", "phi"}));
    eval->add_option("--arg", arg)->required();
    exps->require_subcommand(1);

    auto* lev = app.add_subcommand("levy", "Lévy paths");
    auto* sample = lev->add_subcommand("sample", "sample one path");
    std::string process = "eve", out;
    double horizon = 1.0, delta = levy::kDefaultDelta, dt = levy::kDefaultDt;
    std::uint64_t seed = 1;
    sample->add_option("--process", process)->check(CLI::IsMember({"eve", "circ", "hat"}));
    sample->add_option("--horizon", horizon);
    sample->add_option("--delta", delta);
    sample->add_option("--dt", dt);
    sample->add_option("--seed", seed);
    sample->add_option("--out", out, "CSV path");
    lev->require_subcommand(1);

    auto* lam = app.add_subcommand("lamperti", "Lamperti transforms");
    auto* demo = lam->add_subcommand("demo", "paths of X, X_circ, X_hat and Y");
    double z = 1.0, lam_horizon = 40.0, hat_horizon = 5.0, x0 = 1e-4;
    std::string out_dir;
    demo->add_option("--z", z);
    demo->add_option("--horizon", lam_horizon, "Lévy horizon of X and X_circ");
    demo->add_option("--hat-horizon", hat_horizon, "Lévy horizon of X_hat");
    demo->add_option("--delta", delta);
    demo->add_option("--dt", dt);
    demo->add_option("--x0", x0, "entrance mass of the conditioned Eve");
    demo->add_option("--seed", seed);
    demo->add_option("--out-dir", out_dir);
    lam->require_subcommand(1);

    auto* gfc = app.add_subcommand("gf", "growth-fragmentation cell system");
    auto* gfrun = gfc->add_subcommand("run", "simulate trees");
    double gf_horizon = gf::kInfinity, floor = 1e-2;
    std::string eve = "standard";
    std::size_t replicates = 1;
    std::vector<double> levels{0.25, 0.5, 1.0};
    gfrun->add_option("--z", z);
    gfrun->add_option("--horizon", gf_horizon);
    gfrun->add_option("--mass-floor", floor);
    gfrun->add_option("--eve", eve)->check(CLI::IsMember({"standard", "conditioned"}));
    gfrun->add_option("--replicates", replicates);
    gfrun->add_option("--seed", seed);
    gfrun->add_option("--levels", levels, "levels of the ranked mass files")->delimiter(',');
    gfrun->add_option("--out-dir", out_dir);
    gfc->require_subcommand(1);

    auto* cs = app.add_subcommand("csbp", "continuous-state branching process");
    auto* check = cs->add_subcommand("check", "oracle battery");
    std::size_t cs_reps = 20000;
    double cs_dt = csbp::kDefaultDt;
    check->add_option("--replicates", cs_reps);
    check->add_option("--dt", cs_dt);
    check->add_option("--seed", seed);
    check->add_option("--out-dir", out_dir);
    cs->require_subcommand(1);

    auto* sn = app.add_subcommand("snake", "discrete Brownian snake");
    auto* snrun = sn->add_subcommand("run", "sample snakes and level components");
    std::size_t n = 10000, sn_reps = 1;
    std::vector<double> sn_levels{0.0, 0.2}, eps{0.05};
    snrun->add_option("--n", n);
    snrun->add_option("--replicates", sn_reps);
    snrun->add_option("--levels", sn_levels)->delimiter(',');
    snrun->add_option("--eps", eps)->delimiter(',');
    snrun->add_option("--seed", seed);
    snrun->add_option("--out-dir", out_dir);
    sn->require_subcommand(1);

    auto* exp = app.add_subcommand("experiment", "registered experiments");
    auto* run = exp->add_subcommand("run", "run one experiment");
    std::string id, config_path;
    bool fresh = false;
    long long exp_reps = 0;
    run->add_option("id", id)->required();
    run->add_option("--config", config_path);
    run->add_flag("--fresh-seed", fresh, "replace the configured seed by a random one (exploration only)");
    run->add_option("--replicates", exp_reps, "override the replicate count");
    run->add_option("--out-dir", out_dir);
    auto* lst = exp->add_subcommand("list", "list registered experiments");
    auto* show = exp->add_subcommand("config", "print the default config of an experiment");
    show->add_option("id", id)->required();
    exp->require_subcommand(1);

    CLI11_PARSE(app, argc, argv);
    try {
        if (eval->parsed()) return cmd_exponents(fn, arg);
        if (sample->parsed()) return cmd_levy(process, horizon, delta, dt, seed, out);
        if (demo->parsed()) return cmd_lamperti(z, lam_horizon, hat_horizon, delta, dt, x0, seed, out_dir);
        if (gfrun->parsed()) return cmd_gf(z, gf_horizon, floor, eve, replicates, seed, levels, out_dir);
        if (check->parsed()) return cmd_csbp(cs_reps, cs_dt, seed, out_dir);
        if (snrun->parsed()) return cmd_snake(n, sn_reps, sn_levels, eps, seed, out_dir);
        if (run->parsed()) return cmd_experiment_run(id, config_path, fresh, exp_reps, out_dir);
        if (lst->parsed()) {
            for (const auto& s : experiments::registry())
                std::cout << s.id << (s.criterion ? "  [criterion " + std::to_string(s.criterion) + "]" : "")
                          << "  " << s.description << "\n";
            return 0;
        }
        if (show->parsed()) {
            std::cout << config::to_text(experiments::default_config(id), experiments::find_experiment(id).params);
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
