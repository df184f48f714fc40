#include "bgf/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "bgf/cell_system.hpp"
#include "bgf/csbp.hpp"
#include "bgf/errors.hpp"
#include "bgf/exponents.hpp"
#include "bgf/lamperti.hpp"
#include "bgf/levy.hpp"
#include "bgf/parallel.hpp"
#include "bgf/rng.hpp"
#include "bgf/snake.hpp"
#include "bgf/stats.hpp"

namespace bgf::experiments {

namespace ex = bgf::exponents;
using config::ExperimentConfig;
using config::ParamSpec;
using config::ParamType;

namespace {

class Csv {
public:
    explicit Csv(const std::vector<std::string>& columns) {
        for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
        out_ << "\n";
    }
    template <class... Ts>
    void row(const Ts&... xs) {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(xs), first = false), ...);
        out_ << "\n";
    }
    std::string str() const { return out_.str(); }

private:
    static std::string cell(double x) { return config::format_real(x); }
    static std::string cell(int x) { return std::to_string(x); }
    static std::string cell(std::size_t x) { return std::to_string(x); }
    static std::string cell(bool x) { return x ? "1" : "0"; }
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }
    std::ostringstream out_;
};

json estimate_json(const stats::EstimateWithCI& e) {
    return {{"point", e.point},
            {"std_error", e.std_error},
            {"ci_half_width", e.ci_half_width()},
            {"n", e.n},
            {"method", stats::to_string(e.method)},
            {"seed", e.seed}};
}

json value_json(const config::Value& v) {
    if (auto d = std::get_if<double>(&v)) return *d;
    if (auto n = std::get_if<std::uint64_t>(&v)) return *n;
    if (auto s = std::get_if<std::string>(&v)) return *s;
    return std::get<std::vector<double>>(v);
}

json config_json(const ExperimentConfig& c) {
    json params = json::object();
    for (const auto& [k, v] : c.params) params[k] = value_json(v);
    return {{"id", c.id}, {"seed", c.master_seed}, {"replicates", c.replicates}, {"params", params}};
}

ParamSpec real(const std::string& name, const std::string& def, const std::string& help) {
    return {name, ParamType::real, def, {}, help};
}
ParamSpec count(const std::string& name, const std::string& def, const std::string& help) {
    return {name, ParamType::count, def, {}, help};
}
ParamSpec list(const std::string& name, const std::string& def, const std::string& help) {
    return {name, ParamType::real_list, def, {}, help};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- criterion 1

void run_kappa_identity(const ExperimentConfig& c, Report& rep) {
    const auto t0 = std::chrono::steady_clock::now();
    const double rel = c.real("rel_tol");
    const double root_tol = c.real("root_tol");
    Csv csv({"p", "kappa_closed", "kappa_integral", "quadrature_error", "abs_diff"});
    json rows = json::array();
    for (double p : c.reals("p_grid")) {
        const double closed = ex::kappa_closed(p).value;
        const auto integral = ex::kappa_integral(p);
        const double diff = std::abs(integral.value - closed);
        rep.gate("kappa p=" + config::format_real(p), integral.value, closed, rel * (1.0 + std::abs(closed)),
                 "integral form vs Gamma-ratio form");
        csv.row(p, closed, integral.value, integral.error, diff);
        rows.push_back({{"p", p}, {"closed", closed}, {"integral", integral.value}, {"error_bound", integral.error}});
    }
    for (double root : {ex::kOmegaMinus, ex::kOmegaPlus}) {
        rep.gate("closed root " + config::format_real(root), ex::kappa_closed(root).value, 0.0, root_tol);
        rep.gate("integral root " + config::format_real(root), ex::kappa_integral(root).value, 0.0, root_tol);
    }
    rep.outputs["kappa"] = rows;
    rep.csv["kappa.csv"] = csv.str();
    rep.timing_gate("runtime", seconds_since(t0), c.real("max_seconds"));
}

// ---- criterion 2

void run_psi_hat(const ExperimentConfig& c, Report& rep) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto hat = levy::LevySampler::for_process(levy::Process::hat, levy::kDefaultDelta);
    Csv csv({"lambda", "psi_hat", "kappa_closed", "kappa_integral", "jump_pieces"});
    for (double l : c.reals("lambdas")) {
        const double v = ex::psi_hat(l);
        const double k = ex::kappa_closed(3.0 + l).value;
        const double ki = ex::kappa_integral(3.0 + l).value;
        const double pieces = hat.exponent(l);
        rep.gate("psi_hat lambda=" + config::format_real(l), v, k, c.real("tol"), "kappa(3 + lambda), closed form");
        rep.gate("pieces lambda=" + config::format_real(l), pieces, v, c.real("pieces_rel_tol") * (1.0 + std::abs(v)),
                 "exponent of the two conditioned jump pieces");
        csv.row(l, v, k, ki, pieces);
    }
    rep.csv["psi_hat.csv"] = csv.str();
    rep.timing_gate("runtime", seconds_since(t0), c.real("max_seconds"));
}

// ---- criterion 3

double exact_exponent(levy::Process p, double lambda) {
    switch (p) {
        case levy::Process::eve: return ex::psi_eve(lambda).value;
        case levy::Process::circ: return ex::psi_circ(lambda).value;
        case levy::Process::hat: return ex::psi_hat(lambda);
    }
    return 0.0;
}

void run_levy_mgf(const ExperimentConfig& c, Report& rep) {
    const std::size_t n = c.replicates;
    const double delta = c.real("delta");
    const double k = c.real("k_se");
    const auto& times = c.reals("times");
    const RngStream master(c.master_seed);
    Csv csv({"process", "lambda", "t", "estimate", "std_error", "target", "budget", "passed"});
    json rows = json::array();
    const std::vector<std::pair<levy::Process, std::string>> cases{
        {levy::Process::eve, "eve_lambdas"}, {levy::Process::circ, "circ_lambdas"}, {levy::Process::hat, "hat_lambdas"}};
    for (std::size_t pi = 0; pi < cases.size(); ++pi) {
        const auto [proc, key] = cases[pi];
        const auto sampler = levy::LevySampler::for_process(proc, delta);
        const auto stream = master.child(pi);
        const auto samples = levy::sample_marginals(sampler, times, n, stream, delta);
        for (double l : c.reals(key)) {
            for (std::size_t j = 0; j < times.size(); ++j) {
                const double t = times[j];
                std::vector<double> w(n);
                for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(l * samples.at(i, j));
                auto e = stats::log_mean_estimate(w);
                e.seed = stream.describe();
                const double target = t * exact_exponent(proc, l);
                const double budget = t * std::abs(sampler.small_jump_bias(l, delta));
                const std::string name = levy::to_string(proc) + " lambda=" + config::format_real(l) +
                                         " t=" + config::format_real(t);
                const bool ok = rep.gate(name, e.point, target, k * e.std_error + budget,
                                         "log-mgf within k SE + small-jump budget");
                if (proc == levy::Process::circ && l == 1.0)
                    rep.gate("circ brackets 0 at t=" + config::format_real(t), e.point, 0.0,
                             k * e.std_error + budget, "psi-circ(1) = 0");
                csv.row(levy::to_string(proc), l, t, e.point, e.std_error, target, budget, ok);
                rows.push_back({{"process", levy::to_string(proc)}, {"lambda", l}, {"t", t},
                                {"estimate", estimate_json(e)}, {"target", target}, {"budget", budget}});
            }
        }
    }
    rep.outputs["mgf"] = rows;
    rep.csv["levy_mgf.csv"] = csv.str();
}

// ---- criterion 4

void run_martingale_tilt(const ExperimentConfig& c, Report& rep) {
    const std::size_t n = c.replicates;
    const double delta = c.real("delta");
    const double k = c.real("k_se");
    const double lambda = c.real("lambda");
    const auto& times = c.reals("times");
    const RngStream stream(c.master_seed);
    const auto circ = levy::LevySampler::for_process(levy::Process::circ, delta);
    const auto s = levy::sample_marginals(circ, times, n, stream, delta, std::log(2.0));
    Csv csv({"quantity", "v", "estimate", "std_error", "target", "budget"});
    json rows = json::array();
    for (std::size_t j = 0; j < times.size(); ++j) {
        const double v = times[j];
        std::vector<double> m(n), tilt(n);
        std::size_t killed = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool big = s.big_jump[i * times.size() + j] != 0;
            killed += big;
            const double x = s.at(i, j);
            m[i] = big ? 0.0 : std::exp(-2.0 * x);
            tilt[i] = big ? 0.0 : std::exp((lambda - 2.0) * x);
        }
        auto em = stats::mean_estimate(m);
        auto et = stats::mean_estimate(tilt);
        em.seed = et.seed = stream.describe();
        const double bm = std::abs(std::expm1(v * std::abs(circ.small_jump_bias(-2.0, delta))));
        const double target_t = std::exp(v * ex::psi_eve(lambda).value);
        const double bt = target_t * std::abs(std::expm1(v * std::abs(circ.small_jump_bias(lambda - 2.0, delta))));
        rep.gate("E[M] v=" + config::format_real(v), em.point, 1.0, k * em.std_error + bm);
        rep.gate("tilt lambda=" + config::format_real(lambda) + " v=" + config::format_real(v), et.point, target_t,
                 k * et.std_error + bt, "E[M e^{lambda xi-circ}] vs e^{v psi(lambda)}");
        csv.row("M", v, em.point, em.std_error, 1.0, bm);
        csv.row("tilt", v, et.point, et.std_error, target_t, bt);
        rows.push_back({{"v", v},
                        {"martingale", estimate_json(em)},
                        {"tilt", estimate_json(et)},
                        {"tilt_target", target_t},
                        {"killed_fraction", static_cast<double>(killed) / static_cast<double>(n)},
                        {"killed_fraction_exact", -std::expm1(-8.0 / 3.0 * ex::kAlpha * v)}});
    }
    rep.outputs["tilt"] = rows;
    rep.csv["martingale_tilt.csv"] = csv.str();
}

// ---- criteria 5 and 6

json budgeted_json(const csbp::BudgetedCheck& b) {
    return {{"fine", estimate_json(b.fine)},
            {"coarse", estimate_json(b.coarse)},
            {"target", b.target},
            {"budget", b.budget},
            {"dt", b.dt}};
}

void run_csbp_transition(const ExperimentConfig& c, Report& rep) {
    const auto& xs = c.reals("x");
    const auto& ts = c.reals("t");
    const auto& ls = c.reals("lambda");
    if (xs.size() != ts.size() || xs.size() != ls.size()) throw ConfigError("x, t and lambda must have equal length");
    const double k = c.real("k_se");
    const RngStream master(c.master_seed);
    Csv csv({"x", "t", "lambda", "estimate", "std_error", "coarse", "target", "budget"});
    json rows = json::array();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        auto b = csbp::laplace_check(xs[i], ts[i], ls[i], c.replicates, master.child(i), c.real("dt"));
        rep.gate("laplace x=" + config::format_real(xs[i]) + " t=" + config::format_real(ts[i]) +
                     " lambda=" + config::format_real(ls[i]),
                 b.fine.point, b.target, k * b.fine.std_error + b.budget, "exp(-x u_t(lambda)), k SE + dt budget");
        csv.row(xs[i], ts[i], ls[i], b.fine.point, b.fine.std_error, b.coarse.point, b.target, b.budget);
        rows.push_back(budgeted_json(b));
    }
    const double flow = csbp::flow_identity_error(c.reals("flow_times"), c.reals("flow_lambdas"));
    rep.gate("flow identity", flow, 0.0, c.real("flow_tol"), "max relative |u_{t+s} - u_t o u_s|");
    rep.outputs["laplace"] = rows;
    rep.outputs["flow_identity_error"] = flow;
    rep.csv["csbp_transition.csv"] = csv.str();
}

void run_csbp_exit(const ExperimentConfig& c, Report& rep) {
    const double x = c.real("x"), z = c.real("z");
    const auto b = csbp::exit_check(x, z, c.replicates, RngStream(c.master_seed), c.real("dt"));
    rep.gate("exit probability", b.fine.point, b.target, c.real("k_se") * b.fine.std_error + b.budget,
             "1 - sqrt(1 - x/z), k SE + overshoot budget");
    rep.outputs["exit"] = budgeted_json(b);
    Csv csv({"x", "z", "estimate", "std_error", "coarse", "target", "budget"});
    csv.row(x, z, b.fine.point, b.fine.std_error, b.coarse.point, b.target, b.budget);
    rep.csv["csbp_exit.csv"] = csv.str();
}

// ---- criterion 7

void run_gf_cumulant(const ExperimentConfig& c, Report& rep) {
    const double p = c.real("p");
    const std::size_t runs = c.replicates;
    gf::GfConfig g;
    g.z = 1.0;
    g.mass_floor = c.real("mass_floor");
    g.record_paths = false;
    g.norm_exponents = {p - 0.5};
    g.max_cells = c.count("max_cells");
    const gf::GfSimulator sim(g);
    const RngStream stream(c.master_seed);
    std::vector<double> a(runs), b(runs);
    std::vector<std::size_t> cells(runs);
    parallel_for(runs, [&](std::size_t i) {
        const auto s = sim.summarize(stream.child(i));
        a[i] = s.norms[0].value;
        b[i] = s.norms[0].missing_moment;
        cells[i] = s.simulated_cells;
    });
    auto ea = stats::mean_estimate(a);
    ea.seed = stream.describe();
    const auto eb = stats::mean_estimate(b);
    const double target = -1.0 / ex::kappa_closed(p).value;
    const double renewal = ea.point / (1.0 - eb.point);
    const double bias = renewal * eb.point;
    const double rel = c.real("rel_tol");
    rep.gate("mean level integral", ea.point, target, rel * target + bias,
             "relative tolerance plus pruning bias bound (renewal constant x missing moment)");

    const std::size_t tail_k = std::max<std::size_t>(10, static_cast<std::size_t>(c.real("tail_fraction") * runs));
    const double hill = hill_index(a, tail_k);
    std::vector<double> sorted = a;
    std::sort(sorted.begin(), sorted.end());
    const double u = sorted[runs - tail_k - 1];
    double bulk = 0.0;
    for (std::size_t i = 0; i + tail_k < runs; ++i) bulk += sorted[i];
    const double frac = static_cast<double>(tail_k) / static_cast<double>(runs);
    const double tail_mean = hill > 1.0 ? u * hill / (hill - 1.0) : std::numeric_limits<double>::infinity();
    const double corrected = bulk / static_cast<double>(runs) + frac * tail_mean;
    rep.outputs = {{"target", target},
                   {"level_integral", estimate_json(ea)},
                   {"missing_moment", estimate_json(eb)},
                   {"renewal_constant", renewal},
                   {"bias_bound", bias},
                   {"mean_cells", std::accumulate(cells.begin(), cells.end(), 0.0) / static_cast<double>(runs)},
                   {"tail",
                    {{"hill_index", hill},
                     {"order_statistics", tail_k},
                     {"threshold", u},
                     {"pareto_corrected_mean", corrected},
                     {"pareto_corrected_with_bias", corrected + renewal * eb.point},
                     {"note", "tail index below 2 means infinite variance; the plain mean is the gated quantity"}}}};
    Csv csv({"run", "level_integral", "missing_moment", "cells"});
    for (std::size_t i = 0; i < runs; ++i) csv.row(i, a[i], b[i], cells[i]);
    rep.csv["gf_cumulant_runs.csv"] = csv.str();
}

// ---- criterion 8

void run_extinction_tail(const ExperimentConfig& c, Report& rep) {
    gf::GfConfig g;
    g.mass_floor = c.real("mass_floor");
    const RngStream stream(c.master_seed);
    const auto law = gf::extinction_law_fixed_point(g, c.replicates, c.count("iterations"), stream);
    const double r_lo = c.real("r_lo"), r_hi = c.real("r_hi");
    const auto fit = fit_tail_slope(law, r_lo, r_hi, c.count("grid"), c.count("bootstrap"), c.master_seed);
    const double lo = c.real("slope_lo"), hi = c.real("slope_hi");
    rep.gate("survival slope", fit.slope, 0.5 * (lo + hi), 0.5 * (hi - lo),
             "least-squares log-log slope on [r_lo, r_hi]");
    double m1 = 0.0, m3 = 0.0;
    for (double x : law) {
        m1 += x;
        m3 += x * x * x;
    }
    m1 /= static_cast<double>(law.size());
    m3 /= static_cast<double>(law.size());
    json late = json::object();
    try {
        const auto f2 = fit_tail_slope(law, r_hi, c.real("late_r_hi"), c.count("grid"), c.count("bootstrap"),
                                       c.master_seed);
        late = {{"r_lo", r_hi}, {"r_hi", c.real("late_r_hi")}, {"slope", f2.slope}, {"std_error", f2.std_error},
                {"tail_count", f2.tail_count}};
    } catch (const DomainError& e) {
        late = {{"error", e.what()}};
    }
    rep.outputs = {{"slope", fit.slope},
                   {"std_error", fit.std_error},
                   {"tail_count", fit.tail_count},
                   {"runs", law.size()},
                   {"mean", m1},
                   {"third_moment", m3},
                   {"third_moment_reference", 3.0 * csbp::local_time_constant() / ex::kAlpha},
                   {"late_fit", late}};
    Csv fcsv({"r", "survival", "fitted"});
    for (std::size_t i = 0; i < fit.r.size(); ++i)
        fcsv.row(fit.r[i], fit.survival[i], std::exp(fit.intercept + fit.slope * std::log(fit.r[i])));
    rep.csv["extinction_survival.csv"] = fcsv.str();
    Csv scsv({"extinction_time"});
    for (double x : law) scsv.row(x);
    rep.csv["extinction_samples.csv"] = scsv.str();
}

// ---- criterion 9

void run_hat_marginal(const ExperimentConfig& c, Report& rep) {
    const std::size_t n = c.replicates;
    const double x0 = c.real("x0"), delta = c.real("delta"), step = c.real("levy_step");
    const double k = c.real("k_se");
    const auto hat = levy::LevySampler::for_process(levy::Process::hat, std::min(delta, 1e-3));
    const RngStream stream(c.master_seed);
    const double r = c.real("ks_level");
    const auto xs = gf::hat_marginal(hat, r, n, x0, stream.child(0), delta, step);
    const auto half = gf::hat_marginal(hat, r, n, x0 / 2.0, stream.child(0), delta, step);
    const double d = gf::hat_marginal_ks(xs, r);
    const double d_half = gf::hat_marginal_ks(half, r);
    const double allowance = std::abs(d - d_half) / (1.0 - std::sqrt(0.5));
    const double crit = stats::ks_critical_value(n, c.real("alpha"));
    rep.gate("KS r=" + config::format_real(r), d, 0.0, crit + allowance,
             "critical value plus entrance allowance from the x0-halving study");
    Csv csv({"r", "x0", "sample"});
    json means = json::array();
    const double mean_x0 = c.real("mean_x0");
    for (double level : c.reals("mean_levels")) {
        const auto ys = gf::hat_marginal(hat, level, n, mean_x0,
                                         stream.child(1).child(static_cast<std::uint64_t>(level * 1000)), delta,
                                         step);
        auto e = stats::mean_estimate(ys);
        e.seed = stream.describe();
        rep.gate("mean r=" + config::format_real(level), e.point, level * level, k * e.std_error);
        means.push_back({{"r", level}, {"mean", estimate_json(e)}, {"target", level * level}});
        for (double y : ys) csv.row(level, mean_x0, y);
    }
    for (double y : xs) csv.row(r, x0, y);
    for (double y : half) csv.row(r, x0 / 2.0, y);
    rep.outputs = {{"ks", d},
                   {"ks_half_entrance", d_half},
                   {"entrance_allowance", allowance},
                   {"critical_value", crit},
                   {"means", means}};
    rep.csv["hat_marginal.csv"] = csv.str();
}

// ---- criterion 10

void run_lamperti_determinism(const ExperimentConfig& c, Report& rep) {
    double sup = 0.0, abs_time = 0.0;
    Csv csv({"c", "z", "sup_error", "absorption_error"});
    for (double rate : c.reals("drifts")) {
        for (double z : c.reals("masses")) {
            const auto sk = levy::sample_levy_path(ex::drift_only_triplet(-rate), 60.0 / rate, 1e-3, c.real("dt"),
                                                   RngStream(c.master_seed));
            const auto x = lamperti::pssmp_from_levy(sk, z);
            double e = 0.0;
            for (std::size_t i = 0; i < x.times.size(); ++i) {
                const double w = std::max(0.0, 1.0 - rate * x.times[i] / (2.0 * std::sqrt(z)));
                e = std::max(e, std::abs(x.values[i] - z * w * w));
            }
            const double ea = std::abs(x.absorption_time - 2.0 * std::sqrt(z) / rate);
            sup = std::max(sup, e);
            abs_time = std::max(abs_time, ea);
            csv.row(rate, z, e, ea);
        }
    }
    rep.gate("drift-only sup error", sup, 0.0, c.real("tol"), "X_t = z (1 - c t / (2 sqrt z))^2");
    rep.gate("drift-only absorption time", abs_time, 0.0, c.real("tol"));

    std::size_t mismatches = 0, checked = 0;
    const RngStream stream(c.master_seed);
    for (std::size_t k = 0; k < c.replicates; ++k) {
        const auto sk = levy::sample_levy_path(ex::eve_triplet(), 30.0, 1e-2, 1e-2, stream.child(k));
        const double z = 0.7;
        const auto base = lamperti::pssmp_from_levy(sk, z);
        for (double scale : c.reals("scales")) {
            const auto s = lamperti::pssmp_from_levy(sk, scale * z, 1.0);
            const double rc = std::sqrt(scale);
            ++checked;
            bool exact = s.times.size() == base.times.size() && s.absorption_time / rc == base.absorption_time;
            for (std::size_t i = 0; exact && i < base.times.size(); ++i)
                exact = s.values[i] / scale == base.values[i] && s.times[i] / rc == base.times[i];
            mismatches += !exact;
        }
    }
    rep.gate("self-similarity mismatches", static_cast<double>(mismatches), 0.0, 0.0,
             "X under mass c z equals c X(t / sqrt c) bit for bit, c a power of 4");
    rep.outputs = {{"sup_error", sup}, {"absorption_error", abs_time}, {"scaling_paths_checked", checked},
                   {"scaling_mismatches", mismatches}};
    rep.csv["lamperti_drift.csv"] = csv.str();
}

// ---- criterion 11

void run_structural(const ExperimentConfig& c, Report& rep) {
    const std::size_t runs = c.replicates;
    const RngStream stream(c.master_seed);
    struct Outcome {
        std::size_t splits = 0, conservation = 0, dominance = 0, lineage = 0;
        bool snake_ok = true, trunc_ok = true, nesting_ok = true;
        std::size_t cells = 0;
        std::string note;
    };
    std::vector<Outcome> out(runs);
    const double floor = c.real("mass_floor");
    const auto max_n = c.count("max_snake_size");
    parallel_for(runs, [&](std::size_t i) {
        Random rng = stream.child(i).child(0).random();
        const bool conditioned = rng.uniform() < 0.25;
        const double z = conditioned ? 1.0 : 0.5 + 1.5 * rng.uniform();
        const double horizon = conditioned ? 0.3 + rng.uniform() : (rng.uniform() < 0.5 ? gf::kInfinity
                                                                                         : 0.2 + 2.0 * rng.uniform());
        gf::GfConfig g;
        g.z = z;
        g.horizon = horizon;
        g.mass_floor = floor;
        g.eve = conditioned ? gf::EveKind::conditioned : gf::EveKind::standard;
        const auto tree = gf::GfSimulator(g).simulate(stream.child(i).child(1));
        const auto a = gf::audit(tree);
        auto& o = out[i];
        o.splits = a.splits_checked;
        o.conservation = a.conservation_failures;
        o.dominance = a.dominance_failures;
        o.lineage = a.lineage_failures;
        o.cells = tree.cells.size();
        o.note = a.first_failure;

        const std::size_t n = 20 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(max_n));
        const auto s = snake::sample_snake(n, stream.child(i).child(2));
        o.snake_ok = snake::audit_snake(s).ok();
        const double y = 0.5 * rng.normal();
        const auto t = snake::truncate(s, y);
        const auto t2 = snake::truncate(t, y);
        o.trunc_ok = snake::audit_snake(t).ok() && t2.contour == t.contour && t2.labels == t.labels;
        const double r1 = 0.5 * rng.normal();
        const double r2 = r1 + 0.3 * rng.uniform();
        o.nesting_ok = snake::nesting_audit(s, r1, r2).ok();
    });
    std::size_t splits = 0, cons = 0, dom = 0, lin = 0, snk = 0, trn = 0, nst = 0, cells = 0;
    std::string first;
    Csv csv({"run", "cells", "splits", "conservation_failures", "dominance_failures", "lineage_failures", "snake_ok",
             "truncation_ok", "nesting_ok"});
    for (std::size_t i = 0; i < runs; ++i) {
        const auto& o = out[i];
        splits += o.splits;
        cons += o.conservation;
        dom += o.dominance;
        lin += o.lineage;
        snk += !o.snake_ok;
        trn += !o.trunc_ok;
        nst += !o.nesting_ok;
        cells += o.cells;
        if (first.empty() && !o.note.empty()) first = "run " + std::to_string(i) + ": " + o.note;
        csv.row(i, o.cells, o.splits, o.conservation, o.dominance, o.lineage, o.snake_ok, o.trunc_ok, o.nesting_ok);
    }
    rep.gate("split conservation failures", static_cast<double>(cons), 0.0, 0.0, first);
    rep.gate("jump dominance failures", static_cast<double>(dom), 0.0, 0.0);
    rep.gate("lineage failures", static_cast<double>(lin), 0.0, 0.0);
    rep.gate("snake property failures", static_cast<double>(snk), 0.0, 0.0);
    rep.gate("truncation idempotence failures", static_cast<double>(trn), 0.0, 0.0);
    rep.gate("component nesting failures", static_cast<double>(nst), 0.0, 0.0);
    rep.outputs = {{"runs", runs}, {"splits_checked", splits}, {"cells", cells}};
    rep.csv["structural.csv"] = csv.str();
}

// ---- criterion 12

void run_snake_crosscheck(const ExperimentConfig& c, Report& rep) {
    const RngStream stream(c.master_seed);
    const std::size_t n = c.count("snake_size");
    const std::size_t snakes = c.replicates;
    const double calibrated = snake::calibrate_space_scale(n, c.count("calibration_samples"), stream.child(0));
    const double default_space = snake::default_scale(n).space;
    const double level = c.real("level");
    const double eps_b = c.real("boundary_eps");
    const auto& thresholds = c.reals("count_thresholds");
    const double factor = csbp::frag_local_time_factor();

    std::vector<double> snake_share;
    std::vector<std::vector<double>> ratios(thresholds.size());
    Csv csv({"snake", "threshold", "scaled_count", "scaled_local_time"});
    for (std::size_t k = 0; k < snakes; ++k) {
        auto s = snake::sample_snake(n, stream.child(1).child(k));
        s.scale.space = calibrated;
        auto comps = snake::components_above(s, level);
        std::vector<double> sizes;
        for (auto& comp : comps) sizes.push_back(snake::boundary_size_est(s, comp, eps_b));
        const double total = std::accumulate(sizes.begin(), sizes.end(), 0.0);
        if (total > 0.0) snake_share.push_back(*std::max_element(sizes.begin(), sizes.end()) / total);
        const double lt = factor * snake::local_time_est(s, level, eps_b);
        for (std::size_t j = 0; j < thresholds.size(); ++j) {
            const double th = thresholds[j];
            const auto big = std::count_if(sizes.begin(), sizes.end(), [&](double b) { return b > th; });
            const double scaled = std::pow(th, 1.5) * static_cast<double>(big);
            csv.row(k, th, scaled, lt);
            if (lt > 0.0) ratios[j].push_back(scaled / lt);
        }
    }

    std::vector<double> gf_share;
    gf::GfConfig g;
    g.mass_floor = c.real("gf_mass_floor");
    g.horizon = c.real("gf_level");
    const gf::GfSimulator sim(g);
    for (std::size_t k = 0; k < c.count("gf_runs"); ++k) {
        const auto tree = sim.simulate(stream.child(2).child(k));
        const auto m = gf::masses_at(tree, g.horizon);
        const double total = std::accumulate(m.masses.begin(), m.masses.end(), 0.0);
        if (total > 0.0) gf_share.push_back(m.masses.front() / total);
    }

    json bands = json::array();
    for (std::size_t j = 0; j < thresholds.size(); ++j) {
        if (ratios[j].empty()) continue;
        bands.push_back({{"threshold", thresholds[j]},
                         {"samples", ratios[j].size()},
                         {"median_ratio", stats::quantile(ratios[j], 0.5)},
                         {"q10", stats::quantile(ratios[j], 0.1)},
                         {"q90", stats::quantile(ratios[j], 0.9)}});
    }
    json share = json::object();
    if (!snake_share.empty() && !gf_share.empty())
        share = two_sample_report(snake_share, gf_share, c.count("permutations"), c.master_seed).to_json();
    rep.outputs = {{"calibrated_space_scale", calibrated},
                   {"default_space_scale", default_space},
                   {"calibration_ratio", calibrated / default_space},
                   {"frag_count_over_local_time", bands},
                   {"largest_share_snake_vs_gf", share},
                   {"snake_samples", snake_share.size()},
                   {"gf_samples", gf_share.size()},
                   {"note", "exploratory: desk-scale discretisations, not expected to match the continuum limit"}};
    rep.csv["snake_crosscheck.csv"] = csv.str();
}

// ---- branching self-consistency

void run_branching_consistency(const ExperimentConfig& c, Report& rep) {
    gf::GfConfig g;
    g.mass_floor = c.real("mass_floor");
    g.record_paths = false;
    const double min_mass = c.real("min_child_mass");
    const RngStream stream(c.master_seed);
    std::vector<double> child_ratio, fresh_ratio;
    for (std::size_t k = 0; k < c.replicates; ++k) {
        const auto tree = gf::GfSimulator(g).simulate(stream.child(0).child(k));
        const auto& root = tree.cells[tree.root];
        for (auto id : root.children) {
            const auto& ch = tree.cells[id];
            if (ch.pruned || ch.birth_mass < min_mass) continue;
            child_ratio.push_back(ch.beta / std::sqrt(ch.birth_mass));
            gf::GfConfig f = g;
            f.z = ch.birth_mass;
            const auto fresh = gf::GfSimulator(f).simulate(stream.child(1).child(fresh_ratio.size()));
            fresh_ratio.push_back(fresh.cells[fresh.root].beta / std::sqrt(ch.birth_mass));
        }
    }
    if (child_ratio.empty()) throw DomainError("no depth-one children above the mass threshold");
    const auto r = two_sample_report(child_ratio, fresh_ratio, c.count("permutations"), c.master_seed);
    rep.gate("permutation p-value", r.p_value, 1.0, 1.0 - c.real("alpha"),
             "depth-one lifetimes / sqrt(mass) vs fresh runs from the same masses");
    rep.outputs = {{"pairs", child_ratio.size()}, {"two_sample", r.to_json()}};
    Csv csv({"child_ratio", "fresh_ratio"});
    for (std::size_t i = 0; i < child_ratio.size(); ++i) csv.row(child_ratio[i], fresh_ratio[i]);
    rep.csv["branching.csv"] = csv.str();
}

std::vector<ExperimentSpec> build_registry() {
    std::vector<ExperimentSpec> r;
    r.push_back({"kappa-identity", 1, "cumulant function, closed and integral forms",
                 "kappa_integral vs kappa_closed on the standard grid and the roots 2 and 3",
                 {list("p_grid", "1.6, 1.8, 2, 2.2, 2.5, 3, 3.5, 4, 5", "evaluation points"),
                  real("rel_tol", "1e-8", "tolerance factor on (1 + |kappa|)"),
                  real("root_tol", "1e-10", "tolerance at the roots"),
                  real("max_seconds", "1", "runtime limit")},
                 1, 1, false, run_kappa_identity});
    r.push_back({"psi-hat", 2, "conditioned Eve exponent psi_hat(lambda) = kappa(3 + lambda)",
                 "psi_hat against the cumulant function and against its two jump pieces",
                 {list("lambdas", "0.5, 1, 2, 5", "evaluation points"),
                  real("tol", "1e-12", "absolute tolerance against kappa(3 + lambda)"),
                  real("pieces_rel_tol", "1e-8", "tolerance factor for the jump-piece exponent"),
                  real("max_seconds", "1", "runtime limit")},
                 1, 1, false, run_psi_hat});
    r.push_back({"levy-mgf", 3, "Laplace exponents of the Eve, exit and conditioned Lévy processes",
                 "Monte Carlo log-mgf of the truncated samplers against t psi(lambda)",
                 {list("eve_lambdas", "1, 2, 3", "lambdas for the Eve process"),
                  list("circ_lambdas", "1, 2", "lambdas for the exit process"),
                  list("hat_lambdas", "1", "lambdas for the conditioned Eve"),
                  list("times", "0.5, 1", "Lévy times"),
                  real("delta", "1e-3", "small-jump cutoff"),
                  real("k_se", "3", "standard errors allowed")},
                 3, 100000, false, run_levy_mgf});
    r.push_back({"martingale-tilt", 4, "exponential tilt linking the exit process to the Eve process",
                 "E[M_v] = 1 and E[M_v e^{lambda xi-circ(v)}] = e^{v psi(lambda)}",
                 {list("times", "0.5, 1", "values of v"), real("lambda", "1", "tilt test exponent"),
                  real("delta", "1e-3", "small-jump cutoff"), real("k_se", "3", "standard errors allowed")},
                 4, 100000, false, run_martingale_tilt});
    r.push_back({"csbp-transition", 5, "Laplace transform of the CSBP transition",
                 "Monte Carlo E exp(-lambda Y_t) against exp(-x u_t(lambda)) and the flow identity",
                 {list("x", "1, 2", "initial masses"), list("t", "0.5, 1", "times"),
                  list("lambda", "1, 0.5", "Laplace arguments"), real("dt", "1e-3", "stable grid step"),
                  real("k_se", "3", "standard errors allowed"),
                  list("flow_times", "0.1, 0.3, 0.5, 1, 2", "flow identity times"),
                  list("flow_lambdas", "0.1, 0.5, 1, 2, 5", "flow identity arguments"),
                  real("flow_tol", "1e-12", "flow identity tolerance")},
                 5, 100000, false, run_csbp_transition});
    r.push_back({"csbp-exit", 6, "two-sided exit probability of the CSBP",
                 "Monte Carlo P_x(sup Y >= z) against 1 - sqrt(1 - x/z)",
                 {real("x", "1", "initial mass"), real("z", "2", "exit level"), real("dt", "1e-3", "stable grid step"),
                  real("k_se", "3", "standard errors allowed")},
                 6, 100000, false, run_csbp_exit});
    r.push_back({"gf-cumulant", 7, "level integral of the p-norm equals -1/kappa(p)",
                 "mean of int ||Y(r)||_{p-1/2} dr over independent growth-fragmentations from mass 1",
                 {real("p", "2.5", "cumulant argument"), real("mass_floor", "1e-2", "pruning floor"),
                  real("rel_tol", "0.1", "relative tolerance"),
                  real("tail_fraction", "0.02", "share of order statistics in the Hill estimate"),
                  count("max_cells", "1e8", "cell budget of one run")},
                 7, 20000, false, run_gf_cumulant});
    r.push_back({"extinction-tail", 8, "extinction time survival decays as r^{-6}",
                 "log-log slope of the empirical survival of the extinction level",
                 {real("mass_floor", "3e-2", "pruning floor"),
                  count("iterations", "3", "fixed-point iterations of the unsimulated-subtree law"),
                  real("r_lo", "1.5", "fit window start"), real("r_hi", "3", "fit window end"),
                  real("late_r_hi", "4.5", "end of the reported late window"),
                  count("grid", "16", "fit grid points"), count("bootstrap", "200", "bootstrap resamples"),
                  real("slope_lo", "-6.7", "accepted slope lower end"),
                  real("slope_hi", "-5.3", "accepted slope upper end")},
                 8, 10000, false, run_extinction_tail});
    r.push_back({"hat-marginal", 9, "conditioned Eve at level r is Gamma(3/2) with mean r^2",
                 "KS distance and sample means of the conditioned Eve started near 0",
                 {real("x0", "1e-4", "entrance mass of the KS sample"),
                  real("mean_x0", "1e-6", "entrance mass of the mean samples"), real("ks_level", "1", "level of the KS test"),
                  list("mean_levels", "1, 2", "levels of the mean checks"), real("delta", "1e-3", "small-jump cutoff"),
                  real("levy_step", "0.02", "Lévy time step"), real("alpha", "0.01", "KS level"),
                  real("k_se", "3", "standard errors allowed")},
                 9, 10000, false, run_hat_marginal});
    r.push_back({"lamperti-determinism", 10, "Lamperti time change of a deterministic path and exact scaling",
                 "drift-only closed form and bit-exact self-similarity of the construction",
                 {list("drifts", "0.5, 1, 3", "drift magnitudes c"), list("masses", "1, 4, 0.3", "initial masses"),
                  real("dt", "0.01", "grid step"), real("tol", "1e-6", "sup-norm tolerance"),
                  list("scales", "4, 16, 0.25, 0.015625", "mass scalings")},
                 10, 20, false, run_lamperti_determinism});
    r.push_back({"structural-invariants", 11, "cell-system and snake invariants",
                 "audits of random growth-fragmentations and snakes",
                 {real("mass_floor", "5e-2", "pruning floor"), count("max_snake_size", "2000", "largest snake size")},
                 11, 1000, false, run_structural});
    r.push_back({"snake-crosscheck", 12, "boundary sizes from the snake against the cell system",
                 "calibration, largest-share marginals and the fragment-count/local-time band",
                 {count("snake_size", "20000", "edges per snake"),
                  count("calibration_samples", "100", "snakes used for the scale calibration"),
                  real("level", "0.2", "label level"), real("boundary_eps", "0.05", "slab width"),
                  list("count_thresholds", "0.1, 0.2, 0.4", "boundary-size thresholds"),
                  count("gf_runs", "200", "growth-fragmentation runs"), real("gf_level", "0.5", "GF level"),
                  real("gf_mass_floor", "1e-2", "GF pruning floor"), count("permutations", "999", "permutations")},
                 12, 200, true, run_snake_crosscheck});
    r.push_back({"branching-consistency", 0, "branching property of the cell system",
                 "depth-one subtree lifetimes against fresh runs from the same masses",
                 {real("mass_floor", "1e-2", "pruning floor"), real("min_child_mass", "0.05", "child mass threshold"),
                  real("alpha", "0.01", "test level"), count("permutations", "999", "permutations")},
                 13, 2000, false, run_branching_consistency});
    return r;
}

}  // namespace

bool Report::passed() const {
    if (informational) return true;
    return std::all_of(gates.begin(), gates.end(), [](const Gate& g) { return g.passed; });
}

bool Report::gate(const std::string& name, double value, double target, double tolerance, const std::string& detail) {
    const bool ok = std::abs(value - target) <= tolerance;
    gates.push_back({name, value, target, tolerance, ok, detail});
    return ok;
}

bool Report::timing_gate(const std::string& name, double seconds, double limit) {
    const bool ok = seconds < limit;
    gates.push_back({name, seconds, 0.0, limit, ok, "wall time"});
    return ok;
}

json Report::to_json(bool include_timing) const {
    json g = json::array();
    for (const auto& x : gates) {
        if (!include_timing && x.detail == "wall time") continue;
        g.push_back({{"name", x.name},
                     {"value", x.value},
                     {"target", x.target},
                     {"tolerance", x.tolerance},
                     {"passed", x.passed},
                     {"detail", x.detail}});
    }
    json j = {{"id", id},
              {"criterion", criterion},
              {"anchor", anchor},
              {"description", description},
              {"informational", informational},
              {"config", config_json(config)},
              {"inputs", inputs},
              {"outputs", outputs},
              {"gates", g},
              {"passed", passed()}};
    if (include_timing) j["wall_seconds"] = wall_seconds;
    return j;
}

const std::vector<ExperimentSpec>& registry() {
    static const std::vector<ExperimentSpec> r = build_registry();
    return r;
}

const ExperimentSpec& find_experiment(const std::string& id) {
    for (const auto& s : registry())
        if (s.id == id) return s;
    std::string ids;
    for (const auto& s : registry()) ids += (ids.empty() ? "" : ", ") + s.id;
    throw ConfigError("unknown experiment '" + id + "'; registered: " + ids);
}

ExperimentConfig default_config(const std::string& id) {
    const auto& s = find_experiment(id);
    return config::defaults(id, s.params, s.default_seed, s.default_replicates);
}

ExperimentConfig load_config(const std::string& text) {
    const auto& s = find_experiment(config::peek_id(text));
    auto c = config::parse_config(text, s.params);
    const auto sections = config::parse_sections(text);
    const auto& e = sections.at("experiment");
    if (!e.count("seed")) c.master_seed = s.default_seed;
    if (!e.count("replicates")) c.replicates = s.default_replicates;
    return c;
}

Report execute(const ExperimentConfig& c) {
    const auto& s = find_experiment(c.id);
    for (const auto& p : s.params)
        if (!c.params.count(p.name)) throw ConfigError("parameter '" + p.name + "' missing for " + c.id);
    Report rep;
    rep.id = s.id;
    rep.criterion = s.criterion;
    rep.anchor = s.anchor;
    rep.description = s.description;
    rep.informational = s.informational;
    rep.config = c;
    rep.inputs = config_json(c);
    const auto t0 = std::chrono::steady_clock::now();
    s.run(c, rep);
    rep.wall_seconds = seconds_since(t0);
    return rep;
}

std::filesystem::path output_root() {
    if (const char* env = std::getenv("BGF_OUTPUT_ROOT"); env && *env) return env;
    return "out";
}

std::filesystem::path output_dir(const ExperimentConfig& c) {
    return c.output_dir.empty() ? output_root() / c.id : std::filesystem::path(c.output_dir);
}

int run_experiment(const ExperimentConfig& c, Report* out) {
    Report rep = execute(c);
    const auto dir = output_dir(c);
    std::filesystem::create_directories(dir);
    auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream f(dir / name);
        if (!f) throw ConfigError("cannot write " + (dir / name).string());
        f << text;
    };
    write("report.json", rep.to_json().dump(2) + "\n");
    write("config.ini", config::to_text(c, find_experiment(c.id).params));
    for (const auto& [name, text] : rep.csv) write(name, text);
    const int code = rep.passed() ? 0 : 1;
    if (out) *out = std::move(rep);
    return code;
}

TailFit fit_tail_slope(const std::vector<double>& samples, double r_lo, double r_hi, std::size_t grid,
                       std::size_t bootstrap, std::uint64_t seed) {
    if (!(r_lo > 0.0 && r_hi > r_lo)) throw DomainError("fit window must satisfy 0 < r_lo < r_hi");
    if (grid < 2) throw DomainError("fit needs at least two grid points");
    std::vector<double> xs = samples;
    std::sort(xs.begin(), xs.end());
    const auto above = static_cast<std::size_t>(xs.end() - std::upper_bound(xs.begin(), xs.end(), r_lo));
    if (above < 100)
        throw DomainError("insufficient tail mass: " + std::to_string(above) + " samples above r_lo, 100 needed");
    std::vector<double> rs(grid), lr(grid);
    for (std::size_t i = 0; i < grid; ++i) {
        lr[i] = std::log(r_lo) + (std::log(r_hi) - std::log(r_lo)) * static_cast<double>(i) / (grid - 1);
        rs[i] = std::exp(lr[i]);
    }
    auto fit = [&](const std::vector<double>& sorted, std::vector<double>* surv) {
        std::vector<double> x, y;
        const double n = static_cast<double>(sorted.size());
        for (std::size_t i = 0; i < grid; ++i) {
            const auto k = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), rs[i]);
            if (surv) surv->push_back(k / n);
            if (k == 0) continue;
            x.push_back(lr[i]);
            y.push_back(std::log(k / n));
        }
        if (x.size() < 2) throw DomainError("survival vanishes on the fit window");
        return stats::least_squares(x, y);
    };
    TailFit out;
    out.tail_count = above;
    out.r = rs;
    const auto [a, b] = fit(xs, &out.survival);
    out.intercept = a;
    out.slope = b;
    if (bootstrap > 1) {
        Random rng = RngStream(seed).child(0x7a11).random();
        std::vector<double> slopes;
        std::vector<double> re(xs.size());
        for (std::size_t k = 0; k < bootstrap; ++k) {
            for (auto& v : re) v = xs[static_cast<std::size_t>(rng.uniform() * xs.size())];
            std::sort(re.begin(), re.end());
            try {
                slopes.push_back(fit(re, nullptr).second);
            } catch (const DomainError&) {
            }
        }
        if (slopes.size() > 1) out.std_error = std::sqrt(stats::variance(slopes));
    }
    return out;
}

json TwoSampleReport::to_json() const {
    return {{"ks", ks},
            {"p_value", p_value},
            {"permutations", permutations},
            {"probabilities", probabilities},
            {"quantiles_a", quantiles_a},
            {"quantiles_b", quantiles_b}};
}

TwoSampleReport two_sample_report(const std::vector<double>& a, const std::vector<double>& b,
                                  std::size_t permutations, std::uint64_t seed) {
    if (a.empty() || b.empty()) throw DomainError("two-sample report needs two nonempty samples");
    TwoSampleReport r;
    r.ks = stats::ks_two_sample(a, b);
    r.permutations = permutations;
    std::vector<double> pool = a;
    pool.insert(pool.end(), b.begin(), b.end());
    Random rng = RngStream(seed).child(0x9e57).random();
    std::size_t hits = 0;
    const auto na = static_cast<std::ptrdiff_t>(a.size());
    for (std::size_t k = 0; k < permutations; ++k) {
        std::shuffle(pool.begin(), pool.end(), rng.engine());
        const double d = stats::ks_two_sample(std::span<const double>(pool.data(), a.size()),
                                              std::span<const double>(pool.data() + na, b.size()));
        hits += d >= r.ks - 1e-12;
    }
    r.p_value = static_cast<double>(1 + hits) / static_cast<double>(1 + permutations);
    r.probabilities = {0.05, 0.25, 0.5, 0.75, 0.95};
    for (double q : r.probabilities) {
        r.quantiles_a.push_back(stats::quantile(a, q));
        r.quantiles_b.push_back(stats::quantile(b, q));
    }
    return r;
}

double hill_index(std::vector<double> samples, std::size_t k) {
    if (k < 1 || k >= samples.size()) throw DomainError("Hill estimate needs 1 <= k < n");
    std::sort(samples.begin(), samples.end(), std::greater<>());
    const double u = samples[k];
    if (!(u > 0.0)) throw DomainError("Hill estimate needs positive order statistics");
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += std::log(samples[i] / u);
    return static_cast<double>(k) / s;
}

}  // namespace bgf::experiments
