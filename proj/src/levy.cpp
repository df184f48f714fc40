#include "bgf/levy.hpp"

#include <algorithm>
#include <cmath>

// Boost 1.74's pchip calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <map>
#include <mutex>
#include <random>

#include "bgf/errors.hpp"
#include "bgf/parallel.hpp"
#include "bgf/quadrature.hpp"
#include "bgf/special.hpp"

namespace bgf::levy {

using exponents::Compensation;
using exponents::TripletLabel;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

quad::Options table_options() {
    quad::Options o;
    o.abs_tol = 0.0;
    o.rel_tol = 1e-12;
    o.max_intervals = 200;
    o.throw_on_failure = false;
    return o;
}

double third_order_remainder(double x) {
    if (std::abs(x) < 0.1) {
        double term = x * x * x / 6.0, sum = 0.0;
        for (int k = 4; k < 14; ++k) {
            sum += term;
            term *= x / k;
        }
        return sum;
    }
    return std::expm1(x) - x - 0.5 * x * x;
}

// int f d(nu) over the support, split at y = -1 where h_int may jump.
double integrate_split(const LevyTriplet& tr, const std::function<double(double)>& f) {
    double total = tr.integrate(f, -kInf, -1.0).value;
    total += tr.integrate(f, -1.0, 0.0).value;
    return total;
}

}  // namespace

std::string to_string(Process p) {
    switch (p) {
        case Process::eve: return "eve";
        case Process::circ: return "circ";
        case Process::hat: return "hat";
    }
    return "eve";
}

Process parse_process(const std::string& name) {
    if (name == "eve") return Process::eve;
    if (name == "circ") return Process::circ;
    if (name == "hat") return Process::hat;
    throw DomainError("unknown process '" + name + "' (expected eve, circ or hat)");
}

double effective_drift(const LevyTriplet& triplet) {
    static std::mutex mutex;
    static std::map<TripletLabel, double> cache;
    const bool cacheable = triplet.label != TripletLabel::custom;
    if (cacheable) {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(triplet.label); it != cache.end()) return it->second;
    }
    double b = triplet.paper_drift;
    if (triplet.has_jumps() && triplet.compensator_gap) b += integrate_split(triplet, triplet.compensator_gap);
    if (cacheable) {
        std::lock_guard lock(mutex);
        cache.emplace(triplet.label, b);
    }
    return b;
}

double internal_exponent(const LevyTriplet& triplet, double lambda) {
    double v = effective_drift(triplet) * lambda;
    if (!triplet.has_jumps()) return v;
    auto f = [&](double y) {
        return triplet.h_internal(y) != 0.0 ? special::expm1_minus_linear(lambda * y) : std::expm1(lambda * y);
    };
    return v + integrate_split(triplet, f);
}

std::pair<LevyTriplet, LevyTriplet> hat_triplet() {
    return {exponents::hat_tilted_triplet(), exponents::hat_large_triplet()};
}

std::vector<LevyTriplet> pieces(Process p) {
    switch (p) {
        case Process::eve: return {exponents::eve_triplet()};
        case Process::circ: return {exponents::circ_triplet()};
        case Process::hat: {
            auto [a, b] = hat_triplet();
            return {a, b};
        }
    }
    return {};
}

// ---------------------------------------------------------------- JumpTable

struct JumpTable::Interp {
    boost::math::interpolators::pchip<std::vector<double>> spline;
};

JumpTable::~JumpTable() = default;
JumpTable::JumpTable(JumpTable&&) noexcept = default;
JumpTable& JumpTable::operator=(JumpTable&&) noexcept = default;

JumpTable::JumpTable(const LevyTriplet& tr, double delta_min, std::size_t knots) {
    if (!tr.has_jumps()) throw DomainError("jump table needs a nonzero jump measure");
    if (knots < 8) throw DomainError("jump table needs at least 8 knots");
    touches_zero_ = tr.singular_at_zero();
    const double a_lo = touches_zero_ ? delta_min : -tr.support_hi;
    const double a_hi = std::min(kMaxJumpMagnitude, -tr.support_lo);
    if (!(a_lo > 0.0) || !(a_lo < a_hi)) throw DomainError("small-jump cutoff outside the support scale");
    a_cap_ = std::isinf(tr.support_lo) ? a_hi : a_hi * (1.0 - 1e-9);

    a_.resize(knots + 1);
    const double ratio = std::log(a_hi / a_lo);
    for (std::size_t k = 0; k <= knots; ++k) a_[k] = a_lo * std::exp(ratio * static_cast<double>(k) / knots);
    a_.front() = a_lo;
    a_.back() = a_hi;

    const auto opt = table_options();
    auto piece = [&](auto&& g, double lo, double hi) {
        if (lo < 1.0 && 1.0 < hi)
            return quad::integrate(g, lo, 1.0, opt).value + quad::integrate(g, 1.0, hi, opt).value;
        return quad::integrate(g, lo, hi, opt).value;
    };
    auto nu = [&](double a) { return tr.density(-a); };
    auto nu_sq = [&](double a) { return a * a * tr.density(-a); };
    auto nu_h = [&](double a) { return tr.h_internal(-a) * tr.density(-a); };

    std::vector<double> mass(knots), var(knots), hmom(knots);
    for (std::size_t k = 0; k < knots; ++k) {
        mass[k] = piece(nu, a_[k], a_[k + 1]);
        var[k] = piece(nu_sq, a_[k], a_[k + 1]);
        hmom[k] = piece(nu_h, a_[k], a_[k + 1]);
    }
    tail_.assign(knots + 1, 0.0);
    large_h_.assign(knots + 1, 0.0);
    for (std::size_t k = knots; k-- > 0;) {
        tail_[k] = tail_[k + 1] + mass[k];
        large_h_[k] = large_h_[k + 1] + hmom[k];
    }
    small_var_.assign(knots + 1, 0.0);
    if (touches_zero_) small_var_[0] = tr.integrate([](double y) { return y * y; }, -a_lo, 0.0).value;
    for (std::size_t k = 0; k < knots; ++k) small_var_[k + 1] = small_var_[k] + var[k];

    std::vector<double> x(knots + 1), y(knots + 1);
    for (std::size_t k = 0; k <= knots; ++k) {
        x[k] = -tail_[k];
        y[k] = std::log(a_[k]);
    }
    interp_ = std::make_unique<Interp>(Interp{{std::move(x), std::move(y)}});

    constexpr std::size_t grid_points = 16384;
    const double s_hi = std::log(tail_[0]);
    const double s_lo = std::log(tail_[knots - 8]);
    grid_lo_ = s_lo;
    grid_step_ = (s_hi - s_lo) / (grid_points - 1);
    grid_v_min_ = tail_[knots - 8];
    grid_log_a_.resize(grid_points);
    grid_slope_.resize(grid_points);
    for (std::size_t i = 0; i < grid_points; ++i) {
        const double s = i + 1 == grid_points ? s_hi : s_lo + grid_step_ * static_cast<double>(i);
        const double v = std::clamp(std::exp(s), tail_[knots - 8], tail_[0]);
        const double la = std::clamp(interp_->spline(-v), std::log(a_.front()), std::log(a_.back()));
        const double a = std::exp(la);
        const double a_in = std::clamp(a, a_lo * (1.0 + 1e-12), a_cap_);
        grid_log_a_[i] = la;
        // d log a / d log N = -N / (a nu(-a))
        grid_slope_[i] = -v / (a_in * tr.density(-a_in));
    }
}

std::size_t JumpTable::knot_for(double delta) const {
    if (!touches_zero_) return 0;
    auto it = std::upper_bound(a_.begin(), a_.end(), delta * (1.0 + 1e-12));
    if (it == a_.begin()) return 0;
    return std::min<std::size_t>(static_cast<std::size_t>(it - a_.begin()) - 1, a_.size() - 2);
}

double JumpTable::sample(std::size_t k, double u) const {
    const double v = u * tail_[k];
    double la;
    if (v >= grid_v_min_) {
        const double pos = (std::log(v) - grid_lo_) / grid_step_;
        const auto i = std::min(static_cast<std::size_t>(pos), grid_log_a_.size() - 2);
        const double t = pos - static_cast<double>(i);
        const double t2 = t * t, t3 = t2 * t;
        la = (2 * t3 - 3 * t2 + 1) * grid_log_a_[i] + (t3 - 2 * t2 + t) * grid_step_ * grid_slope_[i] +
             (3 * t2 - 2 * t3) * grid_log_a_[i + 1] + (t3 - t2) * grid_step_ * grid_slope_[i + 1];
    } else {
        la = interp_->spline(-v);
    }
    return -std::clamp(std::exp(la), a_[k], a_cap_);
}

// ---------------------------------------------------------------- LevySampler

LevySampler::LevySampler(std::vector<LevyTriplet> pieces, double delta_min, bool gaussian_correction)
    : pieces_(std::move(pieces)), delta_min_(delta_min), gaussian_(gaussian_correction) {
    if (!(delta_min > 0.0)) throw DomainError("small-jump cutoff must be positive");
    for (const auto& p : pieces_) {
        drift_ += effective_drift(p);
        if (p.has_jumps()) tables_.emplace_back(p, delta_min);
    }
    psi_half_ = exponent(0.5);
    lead_table_ = tables_.size();
    for (std::size_t i = 0; i < tables_.size(); ++i)
        if (tables_[i].touches_zero()) {
            lead_table_ = i;
            break;
        }
    if (lead_table_ < tables_.size()) {
        const auto& lead = tables_[lead_table_];
        for (std::size_t k = 0; k + 1 < lead.knot_count(); ++k) levels_.push_back(level(lead.knot(k)));
    } else {
        levels_.push_back(level(delta_min));
    }
}

std::size_t LevySampler::level_index(double delta) const {
    if (lead_table_ >= tables_.size()) return 0;
    return tables_[lead_table_].knot_for(delta);
}

const CutoffLevel& LevySampler::cached_level(double delta) const { return levels_[level_index(delta)]; }

LevySampler LevySampler::for_process(Process p, double delta_min, bool gaussian_correction) {
    return LevySampler(levy::pieces(p), delta_min, gaussian_correction);
}

std::string LevySampler::label() const {
    if (pieces_.size() == 2 && pieces_[0].label == TripletLabel::hat_piece_tilted) return "hat";
    if (pieces_.size() == 1) return exponents::to_string(pieces_[0].label);
    return "custom";
}

double LevySampler::exponent(double lambda) const {
    double v = 0.0;
    for (const auto& p : pieces_) v += internal_exponent(p, lambda);
    return v;
}

double LevySampler::small_jump_bias(double lambda, double delta) const {
    double bias = 0.0;
    std::size_t t = 0;
    for (const auto& p : pieces_) {
        if (!p.has_jumps()) continue;
        const auto& table = tables_[t++];
        if (!table.touches_zero()) continue;
        const double a = table.knot(table.knot_for(delta));
        auto f = [&](double y) {
            return gaussian_ ? third_order_remainder(lambda * y) : special::expm1_minus_linear(lambda * y);
        };
        bias += p.integrate(f, -a, 0.0).value;
    }
    return bias;
}

CutoffLevel LevySampler::level(double delta) const {
    CutoffLevel lv;
    lv.drift = drift_;
    double var = 0.0;
    for (const auto& table : tables_) {
        const std::size_t k = table.knot_for(delta);
        lv.knots.push_back(k);
        lv.rate += table.rate(k);
        lv.drift -= table.large_compensator(k);
        var += table.small_variance(k);
        if (table.touches_zero() && lv.delta == 0.0) lv.delta = table.knot(k);
    }
    lv.sigma = gaussian_ ? std::sqrt(var) : 0.0;
    return lv;
}

double LevySampler::draw_jump(const CutoffLevel& lv, Random& rng) const {
    if (tables_.size() == 1) return tables_[0].sample(lv.knots[0], rng.uniform());
    double pick = rng.uniform() * lv.rate;
    for (std::size_t i = 0; i + 1 < tables_.size(); ++i) {
        const double r = tables_[i].rate(lv.knots[i]);
        if (pick < r) return tables_[i].sample(lv.knots[i], pick / r);
        pick -= r;
    }
    const std::size_t last = tables_.size() - 1;
    const double r = tables_[last].rate(lv.knots[last]);
    return tables_[last].sample(lv.knots[last], std::clamp(pick / r, 0x1.0p-54, 1.0 - 0x1.0p-54));
}

void LevySampler::step(const CutoffLevel& lv, double dt, Random& rng, std::vector<StepKnot>& out) const {
    double last = 0.0;
    auto continuous = [&](double w) {
        return lv.sigma > 0.0 ? lv.drift * w + lv.sigma * std::sqrt(w) * rng.normal() : lv.drift * w;
    };
    if (lv.rate > 0.0) {
        double t = rng.exponential() / lv.rate;
        while (t < dt) {
            const double c = continuous(t - last);
            out.push_back({t, c, draw_jump(lv, rng)});
            last = t;
            t += rng.exponential() / lv.rate;
        }
    }
    out.push_back({dt, continuous(dt - last), 0.0});
}

double LevySampler::increment(const CutoffLevel& lv, double t, Random& rng) const {
    bool unused = false;
    return increment(lv, t, rng, 0.0, unused);
}

double LevySampler::increment(const CutoffLevel& lv, double t, Random& rng, double threshold,
                              bool& big_jump) const {
    double x = lv.drift * t;
    if (lv.sigma > 0.0) x += lv.sigma * std::sqrt(t) * rng.normal();
    if (lv.rate > 0.0 && t > 0.0) {
        std::poisson_distribution<long long> count(lv.rate * t);
        const long long n = count(rng.engine());
        for (long long i = 0; i < n; ++i) {
            const double j = draw_jump(lv, rng);
            if (threshold > 0.0 && j <= -threshold) big_jump = true;
            x += j;
        }
    }
    return x;
}

LevyPathSkeleton LevySampler::sample_path(double horizon, double delta, double dt, const RngStream& stream) const {
    if (!(horizon > 0.0) || !(delta > 0.0) || !(dt > 0.0))
        throw DomainError("horizon, delta and dt must be positive");
    const CutoffLevel lv = level(delta);
    if (lv.rate * horizon > kMaxExpectedJumps)
        throw RateOverflow("jump intensity too large for the requested cutoff", lv.rate);

    LevyPathSkeleton path;
    path.params = {label(), lv.delta > 0.0 ? lv.delta : delta, dt, horizon, stream.describe(), psi_half_};
    Random rng = stream.random();
    path.push(0.0, 0.0);
    const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
    std::vector<StepKnot> knots;
    double value = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
        const double t0 = static_cast<double>(s) * dt;
        const double t1 = s + 1 == steps ? horizon : static_cast<double>(s + 1) * dt;
        knots.clear();
        step(lv, t1 - t0, rng, knots);
        for (const auto& k : knots) {
            value += k.continuous;
            if (k.jump != 0.0) {
                const double time = std::min(t0 + k.offset, t1);
                const double pre = value;
                path.push(time, pre);
                value += k.jump;
                path.push(time, value, true);
                path.jumps.push_back({time, value - pre});
            } else {
                path.push(t1, value);
            }
        }
    }
    return path;
}

LevyPathSkeleton sample_levy_path(const LevyTriplet& triplet, double horizon, double delta, double dt,
                                  const RngStream& rng) {
    triplet.validate();
    if (!triplet.has_jumps()) return LevySampler({triplet}, 1.0).sample_path(horizon, delta, dt, rng);
    return LevySampler({triplet}, delta).sample_path(horizon, delta, dt, rng);
}

MarginalSamples sample_marginals(const LevySampler& sampler, const std::vector<double>& at, std::size_t n,
                                 const RngStream& rng, double delta, double big_jump_threshold) {
    if (!std::is_sorted(at.begin(), at.end()) || (!at.empty() && at.front() < 0.0))
        throw DomainError("marginal times must be nonnegative and increasing");
    const CutoffLevel lv = sampler.level(delta);
    if (!at.empty() && lv.rate * at.back() > kMaxExpectedJumps)
        throw RateOverflow("jump intensity too large for the requested cutoff", lv.rate);
    MarginalSamples out;
    out.times = at;
    out.n = n;
    const std::size_t m = at.size();
    out.values.assign(n * m, 0.0);
    out.big_jump.assign(n * m, 0);
    parallel_for(n, [&](std::size_t i) {
        Random r = rng.child(i).random();
        double x = 0.0, prev = 0.0;
        bool big = false;
        for (std::size_t j = 0; j < m; ++j) {
            x += sampler.increment(lv, at[j] - prev, r, big_jump_threshold, big);
            prev = at[j];
            out.values[i * m + j] = x;
            out.big_jump[i * m + j] = big ? 1 : 0;
        }
    });
    return out;
}

namespace {

stats::EstimateWithCI log_mgf(const std::vector<double>& exponents_sample, const RngStream& rng) {
    const double shift = *std::max_element(exponents_sample.begin(), exponents_sample.end());
    std::vector<double> w(exponents_sample.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(exponents_sample[i] - shift);
    auto e = stats::log_mean_estimate(w);
    e.point += shift;
    e.seed = rng.describe();
    return e;
}

}  // namespace

stats::EstimateWithCI mgf_mc(const LevySampler& sampler, double lambda, double t, std::size_t n,
                             const RngStream& rng, double delta) {
    if (n == 0) throw DomainError("mgf_mc needs at least one replicate");
    auto s = sample_marginals(sampler, {t}, n, rng, delta);
    for (auto& v : s.values) v *= lambda;
    return log_mgf(s.values, rng);
}

stats::EstimateWithCI mgf_mc(const LevyTriplet& triplet, double lambda, double t, std::size_t n,
                             const RngStream& rng, double delta) {
    triplet.validate();
    const double table_delta = triplet.singular_at_zero() ? delta : 1.0;
    return mgf_mc(LevySampler({triplet}, table_delta), lambda, t, n, rng, delta);
}

}  // namespace bgf::levy
