#include "pil/cce.hpp"

#include "pil/error.hpp"
#include "pil/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

namespace pil {

int classify_basin(const EncodingSpace& space, const Vec& p, double control) {
    if (!space.classify) fail(ErrorKind::InvalidConfig, "encoding space has no classifier");
    const auto label = space.classify(p, control);
    if (!label) fail(ErrorKind::BoundaryState, "state lies in the basin boundary band");
    return *label;
}

EncodingSpace sign_space(int index, double band, double alpha) {
    EncodingSpace s;
    s.labels = 2;
    s.alpha = alpha;
    s.priors = {0.5, 0.5};
    s.classify = [index, band](const Vec& p, double) -> std::optional<int> {
        const double v = p[index];
        if (std::abs(v) < band) return std::nullopt;
        return v > 0.0 ? 1 : 0;
    };
    return s;
}

double DoubleWellParams::well_position() const { return std::sqrt(b / (2.0 * a)); }

void validate(const DoubleWellParams& p) {
    if (!(p.a > 0 && p.b > 0 && p.c > 0 && p.gamma > 0 && p.D > 0 && p.dt > 0))
        fail(ErrorKind::InvalidConfig, "double well needs a, b, c, gamma, D, dt > 0");
    if (p.C_max < 0) fail(ErrorKind::InvalidConfig, "C_max must be >= 0");
    if (p.hist_bins < 2 || p.checkpoints < 1)
        fail(ErrorKind::InvalidConfig, "hist_bins >= 2 and checkpoints >= 1 required");
    if (p.t_return <= 0) fail(ErrorKind::InvalidConfig, "t_return must be positive");
}

namespace {

// Real roots of 4a p^3 - 2b p - cC = 0, ascending.
std::vector<double> stationary_points(const DoubleWellParams& w, double C) {
    // Depressed cubic p^3 + P p + Q = 0.
    const double P = -2.0 * w.b / (4.0 * w.a);
    const double Q = -w.c * C / (4.0 * w.a);
    const double disc = -(4.0 * P * P * P + 27.0 * Q * Q);
    std::vector<double> roots;
    if (disc > 0.0) {
        const double m = 2.0 * std::sqrt(-P / 3.0);
        const double th = std::acos(std::clamp(3.0 * Q / (P * m), -1.0, 1.0)) / 3.0;
        for (int k = 0; k < 3; ++k) roots.push_back(m * std::cos(th - 2.0 * M_PI * k / 3.0));
        std::sort(roots.begin(), roots.end());
    } else {
        const double s = std::sqrt(std::max(0.0, Q * Q / 4.0 + P * P * P / 27.0));
        roots.push_back(std::cbrt(-Q / 2.0 + s) + std::cbrt(-Q / 2.0 - s));
    }
    return roots;
}

} // namespace

EncodingSpace double_well_space(const DoubleWellParams& params) {
    EncodingSpace s;
    s.labels = 2;
    s.alpha = 1.0;
    s.priors = {0.5, 0.5};
    s.classify = [params](const Vec& p, double C) -> std::optional<int> {
        const auto r = stationary_points(params, C);
        double centre = 0.0;
        double sep = 2.0 * params.well_position();
        if (r.size() == 3) {
            centre = r[1];
            sep = r[2] - r[0];
        }
        const double v = p[0] - centre;
        if (std::abs(v) < params.band_frac * sep) return std::nullopt;
        return v > 0.0 ? 1 : 0;
    };
    return s;
}

const char* to_string(LedgerKind k) {
    switch (k) {
    case LedgerKind::Merge: return "merge";
    case LedgerKind::Jump: return "jump";
    case LedgerKind::Export: return "export";
    }
    return "unknown";
}

double merge_entropy(const std::vector<double>& probs, double alpha) {
    double total = 0.0;
    for (double p : probs) {
        if (p < 0.0 || !std::isfinite(p)) fail(ErrorKind::InvalidConfig, "probabilities must be >= 0");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) fail(ErrorKind::InvalidConfig, "probabilities must sum to 1");
    double h = 0.0;
    for (double p : probs)
        if (p > 0.0) h -= p * std::log(p);
    return alpha * std::max(0.0, h);
}

void IrreversibilityLedger::push(LedgerEntry e) {
    if (!entries_.empty() && e.time < entries_.back().time)
        fail(ErrorKind::InternalLogic, "ledger entries must be time-ordered");
    entries_.push_back(std::move(e));
}

void IrreversibilityLedger::add_merge(double time, std::vector<int> merged,
                                      const std::vector<double>& weights, int into, double alpha) {
    if (merged.size() != weights.size())
        fail(ErrorKind::InvalidConfig, "merge needs one weight per merged label");
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<double> probs;
    for (double w : weights) probs.push_back(total > 0.0 ? w / total : 0.0);
    LedgerEntry e;
    e.time = time;
    e.kind = LedgerKind::Merge;
    e.entropy_nats = total > 0.0 ? merge_entropy(probs, alpha) : 0.0;
    e.labels_before = std::move(merged);
    e.labels_after = {into};
    push(std::move(e));
}

void IrreversibilityLedger::add_jump(double time, int from, int to) {
    LedgerEntry e;
    e.time = time;
    e.kind = LedgerKind::Jump;
    e.labels_before = {from};
    e.labels_after = {to};
    push(std::move(e));
}

void IrreversibilityLedger::add_export(double time, double nats) {
    if (nats < 0.0) fail(ErrorKind::InvalidConfig, "exported entropy must be >= 0");
    LedgerEntry e;
    e.time = time;
    e.kind = LedgerKind::Export;
    e.entropy_nats = nats;
    push(std::move(e));
}

double IrreversibilityLedger::total_entropy() const {
    double s = 0.0;
    for (const auto& e : entries_) s += e.entropy_nats;
    return s;
}

std::size_t IrreversibilityLedger::count(LedgerKind kind) const {
    return static_cast<std::size_t>(std::count_if(
        entries_.begin(), entries_.end(), [kind](const LedgerEntry& e) { return e.kind == kind; }));
}

void IrreversibilityLedger::append(const IrreversibilityLedger& other) {
    for (const auto& e : other.entries_) push(e);
}

PathLength encoding_path_length(const Trajectory& traj, const EncodingSpace& space,
                                const std::vector<double>& controls) {
    if (traj.size() == 0) fail(ErrorKind::InvalidConfig, "trajectory is empty");
    if (!controls.empty() && controls.size() != traj.size())
        fail(ErrorKind::InvalidConfig, "controls must match trajectory length");
    std::vector<std::optional<int>> raw(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i)
        raw[i] = space.classify(traj.states[i], controls.empty() ? 0.0 : controls[i]);

    PathLength out;
    std::optional<int> held;
    for (const auto& r : raw)
        if (r) {
            held = r;
            break;
        }
    if (!held) return out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (!raw[i] || *raw[i] == *held) continue;
        out.ledger.add_jump(traj.times[i], *held, *raw[i]);
        held = raw[i];
        ++out.count;
    }
    return out;
}

double preserved_information(const IrreversibilityLedger& ledger, const EncodingSpace& space,
                             double t0, double t1) {
    if (space.priors.size() != static_cast<std::size_t>(space.labels))
        fail(ErrorKind::InvalidConfig, "priors must have one entry per label");
    std::set<int> merged;
    for (const auto& e : ledger.entries()) {
        if (e.kind != LedgerKind::Merge || e.time < t0 || e.time > t1) continue;
        merged.insert(e.labels_before.begin(), e.labels_before.end());
    }
    double mass = 0.0;
    for (int l = 0; l < space.labels; ++l)
        if (!merged.count(l)) mass += space.priors[static_cast<std::size_t>(l)];
    if (mass <= 0.0) return 0.0;
    double h = 0.0;
    for (int l = 0; l < space.labels; ++l) {
        const double p = space.priors[static_cast<std::size_t>(l)];
        if (merged.count(l) || p <= 0.0) continue;
        h -= (p / mass) * std::log(p / mass);
    }
    return space.alpha * h;
}

double binary_entropy(double p) {
    double h = 0.0;
    if (p > 0.0) h -= p * std::log(p);
    if (p < 1.0) h -= (1.0 - p) * std::log(1.0 - p);
    return h;
}

namespace {

double grid_span(const DoubleWellParams& w) { return 3.0 * std::max(1.0, w.well_position()) + 1.0; }

// Inverse-CDF sampler of exp(-U(p, C)/kT) restricted to the convex core of
// one well (beyond the inflection point on the given side). States between
// the inflection point and the barrier top are uncommitted and would split
// between basins within a few relaxation times.
class GibbsSampler {
public:
    GibbsSampler(const DoubleWellParams& w, double C, int side) {
        const double core = std::sqrt(w.b / (6.0 * w.a));
        const double L = grid_span(w);
        const int n = 8001;
        xs_.resize(n);
        cdf_.assign(n, 0.0);
        double umin = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            xs_[i] = -L + 2.0 * L * i / (n - 1);
            umin = std::min(umin, w.potential(xs_[i], C));
        }
        auto dens = [&](double x) {
            if ((side < 0 && x > -core) || (side > 0 && x < core)) return 0.0;
            return std::exp(-(w.potential(x, C) - umin) / w.kT());
        };
        for (int i = 1; i < n; ++i)
            cdf_[i] = cdf_[i - 1] + 0.5 * (dens(xs_[i - 1]) + dens(xs_[i])) * (xs_[i] - xs_[i - 1]);
        const double total = cdf_.back();
        if (!(total > 0.0)) fail(ErrorKind::InvalidConfig, "Gibbs density has no mass on the requested side");
        for (double& v : cdf_) v /= total;
    }

    double sample(SeededRng& rng) const {
        const double u = rng.uniform();
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        const std::size_t i = std::clamp<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), 1, cdf_.size() - 1);
        const double c0 = cdf_[i - 1], c1 = cdf_[i];
        const double f = c1 > c0 ? (u - c0) / (c1 - c0) : 0.5;
        return xs_[i - 1] + f * (xs_[i] - xs_[i - 1]);
    }

private:
    std::vector<double> xs_;
    std::vector<double> cdf_;
};

double histogram_entropy(const std::vector<double>& xs, int bins) {
    const auto [lo_it, hi_it] = std::minmax_element(xs.begin(), xs.end());
    const double lo = *lo_it, hi = *hi_it;
    if (!(hi > lo)) return 0.0;
    const double width = (hi - lo) / bins;
    std::vector<long> counts(static_cast<std::size_t>(bins), 0);
    for (double x : xs) {
        const int k = std::min(bins - 1, static_cast<int>((x - lo) / width));
        ++counts[static_cast<std::size_t>(k)];
    }
    const double n = static_cast<double>(xs.size());
    double h = 0.0;
    for (long c : counts)
        if (c > 0) {
            const double p = c / n;
            h -= p * std::log(p / width);
        }
    return h;
}

struct Stat {
    double mean = 0.0;
    double se = 0.0;
};

Stat stat_of(const std::vector<double>& v) {
    Stat s;
    s.mean = mean(v);
    s.se = v.size() > 1 ? std::sqrt(variance(v) / static_cast<double>(v.size())) : 0.0;
    return s;
}

using Schedule = std::function<double(double)>;
using Initializer = std::function<double(long trial, SeededRng&)>;

BitFlipReport run_protocol(const DoubleWellParams& w, double T_total, int trials,
                           const SeededRng& rng, const Schedule& C, const Initializer& init,
                           double T_protocol) {
    validate(w);
    if (trials <= 0) fail(ErrorKind::InvalidConfig, "trials must be positive");
    if (!(T_total > 0.0)) fail(ErrorKind::InvalidConfig, "protocol duration must be positive");
    const long steps = std::max(1L, std::lround(T_total / w.dt));
    const double dt = T_total / static_cast<double>(steps);
    const int K = static_cast<int>(std::min<long>(w.checkpoints, steps));
    std::vector<long> ck(static_cast<std::size_t>(K) + 1);
    for (int j = 0; j <= K; ++j) ck[static_cast<std::size_t>(j)] = (steps * j) / K;

    const std::size_t nck = ck.size();
    const std::size_t N = static_cast<std::size_t>(trials);
    // [trial][checkpoint]
    std::vector<double> P(N * nck), Wc(N * nck), Qc(N * nck), Uc(N * nck);
    const double noise = std::sqrt(2.0 * w.D * dt);

    parallel_for(trials, w.threads, [&](long i) {
        SeededRng r = rng.derive(static_cast<std::uint64_t>(i));
        double p = init(i, r);
        double W = 0.0, Q = 0.0;
        std::size_t next = 0;
        auto store = [&](long k) {
            const std::size_t idx = static_cast<std::size_t>(i) * nck + next;
            P[idx] = p;
            Wc[idx] = W;
            Qc[idx] = Q;
            Uc[idx] = w.potential(p, C(static_cast<double>(k) * dt));
            ++next;
        };
        store(0);
        for (long k = 0; k < steps; ++k) {
            const double C0 = C(static_cast<double>(k) * dt);
            const double C1 = C(static_cast<double>(k + 1) * dt);
            W += w.potential(p, C1) - w.potential(p, C0);
            const double pn = p + w.force(p, C1) / w.gamma * dt + noise * r.gaussian();
            // Heat as the line integral of the force along the step; Simpson's
            // rule is exact for the cubic force, so no discretization bias
            // accumulates in the first-law balance.
            Q += (w.force(p, C1) + 4.0 * w.force(0.5 * (p + pn), C1) + w.force(pn, C1)) / 6.0 *
                 (pn - p);
            p = pn;
            if (!std::isfinite(p)) throw DivergedError(k + 1, "Langevin trial diverged");
            if (next < nck && k + 1 == ck[next]) store(k + 1);
        }
    });

    BitFlipReport rep;
    rep.trials = trials;
    rep.T_protocol = T_protocol;
    rep.kT = w.kT();

    std::vector<double> col(N);
    for (std::size_t j = 0; j < nck; ++j) {
        ThermoCheckpoint c;
        c.t = static_cast<double>(ck[j]) * dt;
        c.control = C(c.t);
        double sw = 0, sq = 0, su = 0;
        long ones = 0;
        for (std::size_t i = 0; i < N; ++i) {
            const std::size_t idx = i * nck + j;
            sw += Wc[idx];
            sq += Qc[idx];
            su += Uc[idx];
            col[i] = P[idx];
            if (P[idx] > 0.0) ++ones;
        }
        c.work = sw / N;
        c.heat = sq / N;
        c.energy = su / N;
        c.entropy = histogram_entropy(col, w.hist_bins);
        c.occupancy1 = static_cast<double>(ones) / N;
        c.label_entropy = binary_entropy(c.occupancy1);
        rep.series.push_back(c);
    }

    std::vector<double> work(N), heat(N), resid(N);
    for (std::size_t i = 0; i < N; ++i) {
        const std::size_t a = i * nck, z = i * nck + nck - 1;
        work[i] = Wc[z];
        heat[i] = Qc[z];
        resid[i] = Wc[z] - (Uc[z] - Uc[a]) - Qc[z];
    }
    for (std::size_t j = 1; j < nck; ++j) {
        for (std::size_t i = 0; i < N; ++i) {
            const std::size_t a = i * nck + j - 1, b = i * nck + j;
            col[i] = (Wc[b] - Wc[a]) - (Uc[b] - Uc[a]) - (Qc[b] - Qc[a]);
        }
        rep.interval_residual_se.push_back(stat_of(col).se);
        for (std::size_t i = 0; i < N; ++i) col[i] = Wc[i * nck + j] - Wc[i * nck + j - 1];
        rep.interval_work_se.push_back(stat_of(col).se);
    }
    const Stat sw = stat_of(work), sh = stat_of(heat), sr = stat_of(resid);
    rep.work_total = sw.mean;
    rep.work_se = sw.se;
    rep.heat_env = sh.mean;
    rep.heat_se = sh.se;
    rep.first_law_residual = sr.mean;
    rep.first_law_se = sr.se;
    rep.dU_sys = rep.series.back().energy - rep.series.front().energy;
    rep.dS_sys = rep.series.back().entropy - rep.series.front().entropy;
    rep.dF_eq = equilibrium_free_energy(w, rep.series.back().control) -
                equilibrium_free_energy(w, rep.series.front().control);
    rep.dissipated_work = rep.work_total - rep.dF_eq;
    rep.label_entropy_initial = rep.series.front().label_entropy;
    rep.label_entropy_final = rep.series.back().label_entropy;
    rep.success_prob = rep.series.back().occupancy1;
    return rep;
}

} // namespace

double equilibrium_free_energy(const DoubleWellParams& w, double C) {
    const double L = grid_span(w);
    const int n = 8000; // even, composite Simpson
    const double h = 2.0 * L / n;
    double umin = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i) umin = std::min(umin, w.potential(-L + i * h, C));
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double f = std::exp(-(w.potential(-L + i * h, C) - umin) / w.kT());
        s += f * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
    }
    const double Z = s * h / 3.0;
    return umin - w.kT() * std::log(Z);
}

BitFlipReport simulate_bitflip(const DoubleWellParams& params, double T_protocol, int trials,
                               const SeededRng& rng) {
    if (trials <= 0) fail(ErrorKind::InvalidConfig, "trials must be positive");
    validate(params);
    const double Cm = params.C_max;
    const double T = T_protocol;
    const Schedule C = [Cm, T](double t) { return Cm * std::sin(M_PI * t / T - M_PI / 2.0); };
    const GibbsSampler start(params, C(0.0), -1);
    return run_protocol(params, T, trials, rng, C,
                        [&start](long, SeededRng& r) { return start.sample(r); }, T);
}

BitFlipReport simulate_erasure(const DoubleWellParams& params, double T_protocol, int trials,
                               const SeededRng& rng, ErasureStart start) {
    if (trials <= 0) fail(ErrorKind::InvalidConfig, "trials must be positive");
    validate(params);
    const double Cm = params.C_max;
    const double T = T_protocol;
    const double tr = params.t_return;
    const Schedule C = [Cm, T, tr](double t) {
        if (t <= T) return Cm * std::sin(M_PI * t / (2.0 * T));
        return Cm * std::cos(M_PI * std::min(t - T, tr) / (2.0 * tr));
    };
    const GibbsSampler left(params, 0.0, -1), right(params, 0.0, +1);
    const Initializer init = [&](long i, SeededRng& r) {
        switch (start) {
        case ErasureStart::Basin0: return left.sample(r);
        case ErasureStart::Basin1: return right.sample(r);
        case ErasureStart::Equiprobable: break;
        }
        return (i % 2 == 0) ? left.sample(r) : right.sample(r);
    };
    return run_protocol(params, T + tr, trials, rng, C, init, T);
}

double landauer_bound(const BitFlipReport& rep) {
    return rep.kT * (rep.label_entropy_initial - rep.label_entropy_final);
}

} // namespace pil
