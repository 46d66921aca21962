#include "pil/metrics.hpp"

#include "pil/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pil {

double intelligence(double W_goal, double I_irr) {
    if (I_irr < 0.0) fail(ErrorKind::InvalidConfig, "I_irr must be nonnegative");
    if (I_irr == 0.0)
        fail(ErrorKind::UndefinedMetric, "intelligence is undefined without irreversible information");
    return W_goal / I_irr;
}

double cumulative_intelligence(const std::vector<double>& work_rate,
                               const std::vector<double>& irr_rate, double dt) {
    if (work_rate.size() != irr_rate.size())
        fail(ErrorKind::InvalidConfig, "flux series must have equal length");
    double W = 0.0, I = 0.0;
    for (std::size_t i = 0; i < work_rate.size(); ++i) {
        W += work_rate[i] * dt;
        I += irr_rate[i] * dt;
    }
    return intelligence(W, I);
}

double consciousness(double W_goal, double I_preserved) {
    if (I_preserved < 0.0) fail(ErrorKind::InvalidConfig, "I_preserved must be nonnegative");
    if (I_preserved == 0.0)
        fail(ErrorKind::UndefinedMetric, "consciousness is undefined without preserved information");
    return W_goal / I_preserved;
}

double emergence_index(double chi_coupled, double chi_separable) {
    if (!(chi_separable > 0.0))
        fail(ErrorKind::UndefinedMetric, "emergence index needs a positive separable baseline");
    return (chi_coupled - chi_separable) / chi_separable;
}

namespace {

double tur_lhs(const std::vector<double>& v, bool& infinite) {
    const double m = mean(v);
    const double var = variance(v);
    infinite = std::abs(m) <= 1e-12 * std::max(1.0, std::sqrt(var));
    return infinite ? std::numeric_limits<double>::infinity() : var / (m * m);
}

} // namespace

TurResult tur_check(const std::vector<double>& currents, double sigma_T, double alpha,
                    std::uint64_t seed, int bootstrap) {
    if (currents.size() < 100) fail(ErrorKind::InsufficientData, "TUR check needs >= 100 samples");
    if (sigma_T < 0.0 || !(alpha > 0.0))
        fail(ErrorKind::InvalidConfig, "TUR needs Sigma >= 0 and alpha > 0");
    TurResult r;
    r.check.name = "tur";
    r.check.seed = seed;
    r.check.rhs = sigma_T > 0.0 ? 2.0 * alpha / sigma_T : std::numeric_limits<double>::infinity();
    r.check.lhs = tur_lhs(currents, r.lhs_infinite);
    if (sigma_T == 0.0 && !r.lhs_infinite) {
        // No entropy production admits no net current. A sample mean within
        // three standard errors of zero is read as E[J] = 0.
        const double se = std::sqrt(variance(currents) / static_cast<double>(currents.size()));
        if (std::abs(mean(currents)) <= 3.0 * se) {
            r.lhs_infinite = true;
            r.check.lhs = std::numeric_limits<double>::infinity();
        }
    }
    if (r.lhs_infinite) {
        r.check.satisfied = true;
        r.check.slack = std::numeric_limits<double>::infinity();
        r.check.detail = "mean current is zero; bound holds vacuously";
        return r;
    }
    SeededRng rng(seed, 0x7475);
    std::vector<double> boot(static_cast<std::size_t>(bootstrap));
    std::vector<double> resample(currents.size());
    for (int b = 0; b < bootstrap; ++b) {
        for (auto& x : resample) x = currents[rng.below(currents.size())];
        bool inf = false;
        boot[static_cast<std::size_t>(b)] = tur_lhs(resample, inf);
        if (inf) boot[static_cast<std::size_t>(b)] = r.check.lhs;
    }
    r.eps_stat = 2.0 * std::sqrt(variance(boot)) / r.check.lhs;
    r.check.satisfied = r.check.lhs >= r.check.rhs * (1.0 - r.eps_stat);
    r.check.slack = r.check.lhs - r.check.rhs;
    return r;
}

std::vector<double> biased_walk_currents(double p, double q, long N, int M, SeededRng& rng) {
    if (p < 0 || q < 0 || p + q > 1.0) fail(ErrorKind::InvalidConfig, "walk needs p, q >= 0 and p + q <= 1");
    std::vector<double> out(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) {
        long j = 0;
        for (long k = 0; k < N; ++k) {
            const double u = rng.uniform();
            if (u < p) ++j;
            else if (u < p + q) --j;
        }
        out[static_cast<std::size_t>(m)] = static_cast<double>(j);
    }
    return out;
}

double ScalarChannel::density(double y, double z) const {
    const double d = (y - mean(z)) / sigma;
    return std::exp(-0.5 * d * d) / (sigma * std::sqrt(2.0 * M_PI));
}

double ScalarChannel::score(double y, double z) const {
    return score_scale * (y - mean(z)) / (sigma * sigma) * dmean(z);
}

ScalarChannel linear_gaussian_channel(double sigma) {
    ScalarChannel c;
    c.name = "linear_gaussian";
    c.mean = [](double z) { return z; };
    c.dmean = [](double) { return 1.0; };
    c.sigma = sigma;
    return c;
}

ScalarChannel logistic_channel(double amplitude, double slope, double centre, double sigma) {
    ScalarChannel c;
    c.name = "logistic";
    c.mean = [=](double z) { return amplitude / (1.0 + std::exp(-slope * (z - centre))); };
    c.dmean = [=](double z) {
        const double s = 1.0 / (1.0 + std::exp(-slope * (z - centre)));
        return amplitude * slope * s * (1.0 - s);
    };
    c.sigma = sigma;
    return c;
}

ScalarChannel corrupted_channel(ScalarChannel base, double score_scale) {
    base.name += "_corrupted";
    base.score_scale = score_scale;
    return base;
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    Mat T = Mat::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        T(k, k - 1) = T(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(T);
    x.resize(static_cast<std::size_t>(n));
    w.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        x[static_cast<std::size_t>(i)] = es.eigenvalues()[i];
        const double v = es.eigenvectors()(0, i);
        w[static_cast<std::size_t>(i)] = 2.0 * v * v;
    }
}

DiscretePrior gaussian_prior(double tau, int nodes) {
    DiscretePrior p;
    if (tau == 0.0 || nodes == 1) {
        p.z = {0.0};
        p.w = {1.0};
        return p;
    }
    // Probabilists' Hermite recurrence: off-diagonal sqrt(k).
    Mat T = Mat::Zero(nodes, nodes);
    for (int k = 1; k < nodes; ++k) T(k, k - 1) = T(k - 1, k) = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Mat> es(T);
    for (int i = 0; i < nodes; ++i) {
        p.z.push_back(tau * es.eigenvalues()[i]);
        const double v = es.eigenvectors()(0, i);
        p.w.push_back(v * v);
    }
    return p;
}

namespace {

// Composite Gauss-Legendre over [a, b].
template <class F>
double integrate(F&& f, double a, double b, int panels, int order = 16) {
    static thread_local std::vector<double> gx, gw;
    static thread_local int cached = 0;
    if (cached != order) {
        gauss_legendre(order, gx, gw);
        cached = order;
    }
    const double h = (b - a) / panels;
    double s = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        for (int i = 0; i < order; ++i)
            s += gw[static_cast<std::size_t>(i)] * f(lo + 0.5 * h * (gx[static_cast<std::size_t>(i)] + 1.0));
    }
    return 0.5 * h * s;
}

} // namespace

double fisher_information(const ScalarChannel& ch, double z) {
    const double m = ch.mean(z);
    const double L = 12.0 * ch.sigma;
    const double F = integrate([&](double y) {
        const double s = ch.score(y, z);
        return ch.density(y, z) * s * s;
    }, m - L, m + L, 24);
    if (!std::isfinite(F)) fail(ErrorKind::ChannelIrregular, "Fisher information is not finite");
    return F;
}

double mutual_information(const ScalarChannel& ch, const DiscretePrior& prior) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double z : prior.z) {
        lo = std::min(lo, ch.mean(z));
        hi = std::max(hi, ch.mean(z));
    }
    lo -= 12.0 * ch.sigma;
    hi += 12.0 * ch.sigma;
    const int panels = std::max(8, static_cast<int>(std::ceil((hi - lo) / (0.5 * ch.sigma))));
    const std::size_t n = prior.z.size();
    std::vector<double> mz(n);
    for (std::size_t j = 0; j < n; ++j) mz[j] = ch.mean(prior.z[j]);
    const double norm = 1.0 / (ch.sigma * std::sqrt(2.0 * M_PI));
    std::vector<double> dens(n);
    const double I = integrate([&](double y) {
        double py = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = (y - mz[j]) / ch.sigma;
            dens[j] = norm * std::exp(-0.5 * d * d);
            py += prior.w[j] * dens[j];
        }
        if (py <= 0.0) return 0.0;
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (dens[j] > 0.0) s += prior.w[j] * dens[j] * std::log(dens[j] / py);
        return s;
    }, lo, hi, panels);
    return std::max(0.0, I);
}

TraceBoundResult trace_bound_check(const ScalarChannel& ch, const DiscretePrior& prior) {
    if (prior.z.size() != prior.w.size() || prior.z.empty())
        fail(ErrorKind::InvalidConfig, "prior needs matching support points and weights");
    std::vector<double> sx, sw;
    gauss_legendre(16, sx, sw);
    TraceBoundResult r;
    double G = 0.0;
    const std::size_t n = prior.z.size();
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t l = j + 1; l < n; ++l) {
            const double dz = prior.z[l] - prior.z[j];
            if (dz == 0.0) continue;
            double Fbar = 0.0;
            for (std::size_t k = 0; k < sx.size(); ++k) {
                const double s = 0.5 * (sx[k] + 1.0);
                Fbar += 0.5 * sw[k] * fisher_information(ch, prior.z[j] + s * dz);
            }
            // Ordered pairs (j, l) and (l, j) contribute equally.
            G += 2.0 * prior.w[j] * prior.w[l] * dz * dz * Fbar;
        }
    if (!std::isfinite(G)) fail(ErrorKind::ChannelIrregular, "trace integral is not finite");
    r.c_t = mutual_information(ch, prior);
    r.half_trace_G = 0.5 * G;
    r.spread_fisher = 0.25 * G;
    r.tightness = r.spread_fisher > 0.0 ? r.c_t / r.spread_fisher : 0.0;
    // Quadrature is deterministic, so the Monte Carlo term of eps_num is zero.
    r.eps_num = 1e-6;
    r.satisfied = r.c_t <= r.half_trace_G + r.eps_num;
    return r;
}

PowerBoundResult power_bound_check(const std::vector<PowerSample>& series, double T_env) {
    if (series.empty()) fail(ErrorKind::InsufficientData, "power bound needs a time-resolved series");
    PowerBoundResult r;
    double span = 0.0;
    r.min_slack = std::numeric_limits<double>::infinity();
    for (const auto& s : series) {
        const double rhs = T_env * s.I_dot - s.F_dot - T_env * s.S_dot;
        const double slack = rhs - s.W_dot + s.tol;
        r.min_slack = std::min(r.min_slack, slack);
        if (slack < 0.0) ++r.violations;
        r.lhs_power += s.W_dot * s.dt;
        r.rhs_power += rhs * s.dt;
        span += s.dt;
    }
    if (span > 0.0) {
        r.lhs_power /= span;
        r.rhs_power /= span;
    }
    r.satisfied = r.violations == 0;
    return r;
}

std::vector<PowerSample> power_series(const BitFlipReport& rep, double T_env, double I_irr) {
    const auto& s = rep.series;
    if (s.size() < 2 || rep.interval_work_se.size() + 1 != s.size())
        fail(ErrorKind::InsufficientData, "report lacks time-resolved work/entropy channels");
    double total_drop = 0.0;
    for (std::size_t j = 1; j < s.size(); ++j)
        total_drop += std::max(0.0, s[j - 1].label_entropy - s[j].label_entropy);
    std::vector<PowerSample> out;
    for (std::size_t j = 1; j < s.size(); ++j) {
        PowerSample p;
        p.t = s[j].t;
        p.dt = s[j].t - s[j - 1].t;
        if (!(p.dt > 0.0)) continue;
        const double share = total_drop > 0.0
                                 ? std::max(0.0, s[j - 1].label_entropy - s[j].label_entropy) / total_drop
                                 : 1.0 / static_cast<double>(s.size() - 1);
        const double dW = s[j].work - s[j - 1].work;
        const double dU = s[j].energy - s[j - 1].energy;
        const double dS = s[j].entropy - s[j - 1].entropy;
        const double dQ = s[j].heat - s[j - 1].heat;
        p.W_dot = -dW / p.dt;
        p.I_dot = I_irr * share / p.dt;
        p.F_dot = (dU - T_env * dS) / p.dt;
        p.S_dot = (dS + dQ / T_env) / p.dt;
        // Three standard errors of the interval work, plus roundoff headroom.
        p.tol = (3.0 * rep.interval_work_se[j - 1] +
                 1e-12 * (std::abs(dW) + std::abs(dU) + std::abs(dQ) + T_env * std::abs(dS))) /
                p.dt;
        out.push_back(p);
    }
    return out;
}

PowerBoundResult classical_bound_check(const BitFlipReport& rep, double T_env, double I_irr) {
    return power_bound_check(power_series(rep, T_env, I_irr), T_env);
}

void validate(const SafetyLimits& l) {
    if (!(l.chi_min > 0 && l.chi_min < l.chi_max && l.P_max > 0 && l.I_dot_max > 0 &&
          l.s_crit > 0 && l.f_max > 0))
        fail(ErrorKind::InvalidConfig, "safety limits must be positive with chi_min < chi_max");
}

SafetyReport safety_monitor(const std::vector<FluxSample>& series, const SafetyLimits& limits,
                            int window_samples) {
    validate(limits);
    if (window_samples < 1) fail(ErrorKind::InvalidConfig, "chi window must span >= 1 sample");
    SafetyReport rep;
    rep.constraints = {{"power"}, {"info_rate"}, {"entropy_production"}, {"free_energy"}, {"chi"}};
    auto flag = [&](std::size_t c, double t) {
        auto& cr = rep.constraints[c];
        if (cr.count == 0) cr.first_time = t;
        ++cr.count;
        ++rep.total;
        if (rep.first_violation < 0.0 || t < rep.first_violation) rep.first_violation = t;
    };
    double wsum = 0.0, isum = 0.0;
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        if (s.W_dot > limits.P_max) flag(0, s.t);
        if (s.I_dot > limits.I_dot_max) flag(1, s.t);
        if (s.S_prod < 0.0 || s.S_prod > limits.s_crit) flag(2, s.t);
        if (std::abs(s.F_dot) > limits.f_max) flag(3, s.t);
        wsum += s.W_dot;
        isum += s.I_dot;
        if (k >= static_cast<std::size_t>(window_samples)) {
            wsum -= series[k - static_cast<std::size_t>(window_samples)].W_dot;
            isum -= series[k - static_cast<std::size_t>(window_samples)].I_dot;
        }
        if (k + 1 >= static_cast<std::size_t>(window_samples) && isum > 0.0) {
            const double chi = wsum / isum;
            if (chi < limits.chi_min || chi > limits.chi_max) flag(4, s.t);
        }
    }
    return rep;
}

RecoveryResult recovery_probe(const CircuitGraph& ff, double delta, double T, int trials,
                              SeededRng& rng, const LogicalReadout& readout) {
    if (delta < 0.0 || !(T > 0.0) || trials < 1)
        fail(ErrorKind::InvalidConfig, "recovery probe needs delta >= 0, T > 0, trials >= 1");
    const EncodingSpace space = flipflop_space();
    Vec start = Vec::Zero(ff.dim());
    start[ff.port("q").taps.front().node] = 1.0;
    const SettleResult base = settle_and_read(ff, {}, readout, &start);
    const int label = classify_basin(space, base.state, 0.0);
    double base_cost = 0.0;
    evolve(ff, base.state, {}, T, readout.dt, 0.0, nullptr, &base_cost);

    RecoveryResult r;
    r.trials = trials;
    long recovered = 0;
    double cost_sum = 0.0;
    for (int i = 0; i < trials; ++i) {
        Vec dir = rng.gaussian_vec(ff.dim());
        dir /= dir.norm();
        double cost = 0.0;
        const Vec end = evolve(ff, base.state + delta * dir, {}, T, readout.dt, 0.0, nullptr, &cost);
        const auto l = space.classify(end, 0.0);
        if (l && *l == label) ++recovered;
        const double excess = std::max(0.0, cost - base_cost) / space.alpha;
        r.ledger.add_export(static_cast<double>(i), excess);
        cost_sum += excess;
    }
    r.R_T = static_cast<double>(recovered) / trials;
    r.C_T = cost_sum / trials;
    return r;
}

} // namespace pil
