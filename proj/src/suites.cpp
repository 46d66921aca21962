#include "pil/suites.hpp"

#include "pil/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace pil {

namespace {

std::string fmt_g(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string labels_str(const Labels& l) {
    std::string s;
    for (const auto& [k, v] : l) s += (s.empty() ? "" : ",") + k + "=" + std::to_string(v);
    return s;
}

} // namespace

FlipFlopCheck flipflop_check(const GatesConfig& c, double noise, std::uint64_t seed) {
    const CircuitGraph g = build_gate(GateKind::FLIPFLOP, c.params, c.readout);
    const Vec x0 = Vec::Zero(g.dim());
    const double dt = c.readout.dt;
    FlipFlopCheck out;
    out.noise = noise;

    SeededRng rng = SeededRng(seed).derive(11);
    const double t_end = c.pulse + c.hold;
    const auto run = run_flipflop(g, {Pulse{0.0, c.pulse, "set", 1.0}}, c.readout, t_end, x0, dt,
                                  noise, &rng);
    // First sample from which the bit reads 1 through the end.
    double t_lock = -1.0;
    for (auto it = run.samples.rbegin(); it != run.samples.rend() && it->bit == 1; ++it) t_lock = it->t;
    if (t_lock >= 0.0) {
        out.settle_time = std::max(0.0, t_lock - c.pulse);
        out.hold_ok = true;
        out.preserved_information =
            preserved_information(run.ledger, flipflop_space(), c.pulse + out.settle_time, t_end);
    }

    SeededRng rng2 = SeededRng(seed).derive(12);
    const auto sr = run_flipflop(g, {Pulse{0.0, c.pulse, "set", 1.0}, Pulse{t_end, c.pulse, "reset", 1.0}},
                                 c.readout, 2.0 * t_end, x0, 0.5, noise, &rng2);
    out.set_reset = sr.after_pulse;

    out.pass = out.hold_ok && out.settle_time < c.hold / 10.0 &&
               std::abs(out.preserved_information - std::log(2.0)) < 1e-12 &&
               out.set_reset == std::vector<int>{1, 0};
    return out;
}

GateSuite gate_suite(const GatesConfig& c, std::uint64_t seed) {
    GateSuite s;
    s.pass = true;
    const std::vector<double> noises = {0.0, c.noise};
    int k = 0;
    for (GateKind kind : all_gates()) {
        if (kind == GateKind::FLIPFLOP) continue;
        const CircuitGraph g = build_gate(kind, c.params, c.readout);
        for (double noise : noises) {
            SeededRng rng = SeededRng(seed).derive(static_cast<std::uint64_t>(100 + k++));
            const auto rep = verify_truth_table(g, truth_table(kind), c.readout, noise, &rng);
            GateCheck gc;
            gc.gate = to_string(kind);
            gc.noise = noise;
            gc.rows = truth_table(kind).size();
            gc.max_settle_time = rep.max_settle_time;
            gc.pass = rep.pass && rep.max_settle_time < c.readout.t_max / 2.0;
            if (!rep.counterexamples.empty()) {
                const auto& ce = rep.counterexamples.front();
                gc.detail = "row " + std::to_string(ce.row) + " expected " + labels_str(ce.expected) +
                            " got " + labels_str(ce.got);
            } else if (!gc.pass) {
                gc.detail = "settle time " + fmt_g("%.4g", rep.max_settle_time) + " too slow";
            }
            s.pass = s.pass && gc.pass;
            s.gates.push_back(gc);
        }
    }
    for (double noise : noises) {
        s.flipflop.push_back(flipflop_check(c, noise, seed));
        s.pass = s.pass && s.flipflop.back().pass;
    }
    return s;
}

double logical_information_erased(const BitFlipReport& rep) {
    return std::max(0.0, rep.label_entropy_initial - rep.label_entropy_final);
}

namespace {

bool first_law_ok(const BitFlipReport& r) {
    return std::abs(r.first_law_residual) <= 3.0 * r.work_se + 1e-9;
}

PowerBoundResult power_of(const BitFlipReport& r) {
    return classical_bound_check(r, r.kT, logical_information_erased(r));
}

} // namespace

BitflipSweep bitflip_sweep(const ThermoConfig& c, std::uint64_t seed) {
    BitflipSweep s;
    s.first_law = s.power_bound = s.dissipation_nonincreasing = true;
    const SeededRng base(seed);
    double T = c.T0;
    for (int i = 0; i < c.durations; ++i, T *= 2.0) {
        s.durations.push_back(T);
        s.reports.push_back(simulate_bitflip(c.well, T, c.trials, base.derive(200 + i)));
        s.power.push_back(power_of(s.reports.back()));
        s.first_law = s.first_law && first_law_ok(s.reports.back());
        s.power_bound = s.power_bound && s.power.back().satisfied;
    }
    for (std::size_t i = 1; i < s.reports.size(); ++i) {
        const auto& a = s.reports[i - 1];
        const auto& b = s.reports[i];
        const double se = std::hypot(a.work_se, b.work_se);
        if (b.dissipated_work > a.dissipated_work + 2.0 * se) s.dissipation_nonincreasing = false;
    }
    return s;
}

ErasureSuite erasure_suite(const ThermoConfig& c, std::uint64_t seed) {
    ErasureSuite s;
    const SeededRng base(seed);
    s.slow = simulate_erasure(c.well, c.erasure_T, c.trials, base.derive(300), ErasureStart::Equiprobable);
    s.nothing = simulate_erasure(c.well, c.erasure_T, c.trials, base.derive(301), ErasureStart::Basin1);
    s.fast = simulate_erasure(c.well, c.erasure_T / c.fast_divisor, c.trials, base.derive(302),
                              ErasureStart::Equiprobable);
    s.power_slow = power_of(s.slow);
    s.power_fast = power_of(s.fast);
    s.kT_ln2 = c.well.kT() * std::log(2.0);
    s.landauer = s.slow.heat_env >= s.kT_ln2 - 3.0 * s.slow.heat_se;
    s.nothing_zero = std::abs(s.nothing.heat_env) <= 3.0 * s.nothing.heat_se;
    s.fast_exceeds_slow = s.fast.heat_env > s.slow.heat_env;
    s.first_law = first_law_ok(s.slow) && first_law_ok(s.nothing) && first_law_ok(s.fast);
    s.power_bound = s.power_slow.satisfied && s.power_fast.satisfied && power_of(s.nothing).satisfied;
    return s;
}

std::vector<CheckResult> run_checks(const ChecksConfig& c, const ThermoConfig& thermo,
                                    std::uint64_t seed, int threads) {
    std::vector<CheckResult> rows;
    const SeededRng base(seed);

    // TUR on random nonequilibrium walks; q stays small so the discrete walk
    // sits in the regime where the continuous-time bound applies.
    SeededRng draw = base.derive(400);
    for (int e = 0; e < c.tur_ensembles; ++e) {
        const double q = draw.uniform(0.005, 0.05);
        const double p = q * draw.uniform(1.2, 3.0);
        SeededRng wr = base.derive(401).derive(static_cast<std::uint64_t>(e));
        const auto J = biased_walk_currents(p, q, c.tur_steps, c.tur_trials, wr);
        auto r = tur_check(J, walk_entropy_production(p, q, c.tur_steps), 1.0,
                           base.derive(402).derive(static_cast<std::uint64_t>(e)).next_u64(), c.bootstrap);
        r.check.name = "tur/ensemble_" + std::string(e < 10 ? "00" : e < 100 ? "0" : "") + std::to_string(e);
        r.check.detail = "p=" + fmt_g("%.6g", p) + " q=" + fmt_g("%.6g", q) +
                         " eps_stat=" + fmt_g("%.4g", r.eps_stat);
        rows.push_back(r.check);
    }
    {
        const double q = 0.1, p = q * c.near_eq_ratio;
        SeededRng wr = base.derive(403);
        const auto J = biased_walk_currents(p, q, c.near_eq_steps, c.tur_trials, wr);
        auto r = tur_check(J, walk_entropy_production(p, q, c.near_eq_steps), 1.0,
                           base.derive(404).next_u64(), c.bootstrap);
        r.check.name = "tur/near_equilibrium";
        r.check.detail = "eps_stat=" + fmt_g("%.4g", r.eps_stat);
        rows.push_back(r.check);
        CheckResult t;
        t.name = "tur/near_equilibrium_factor";
        t.lhs = r.check.lhs / r.check.rhs;
        t.rhs = 2.0;
        t.satisfied = t.lhs <= 2.0;
        t.slack = t.rhs - t.lhs;
        t.seed = seed;
        t.detail = "Var/E^2 over 2/Sigma";
        rows.push_back(t);
    }
    {
        SeededRng wr = base.derive(405);
        const auto J = biased_walk_currents(0.1, 0.1, c.tur_steps, c.tur_trials, wr);
        auto r = tur_check(J, 0.0, 1.0, base.derive(406).next_u64(), c.bootstrap);
        r.check.name = "tur/equilibrium";
        rows.push_back(r.check);
    }

    auto wrap = [&](ScalarChannel ch) {
        return c.channel_preset == "corrupted" ? corrupted_channel(std::move(ch), c.corrupt_scale) : ch;
    };
    auto trace_row = [&](const std::string& name, const ScalarChannel& ch, const DiscretePrior& prior) {
        const auto tb = trace_bound_check(ch, prior);
        CheckResult r;
        r.name = name;
        r.lhs = tb.c_t;
        r.rhs = tb.half_trace_G;
        r.satisfied = tb.satisfied;
        r.slack = tb.half_trace_G - tb.c_t;
        r.seed = seed;
        r.detail = "tightness=" + fmt_g("%.6g", tb.tightness);
        rows.push_back(r);
        return tb;
    };

    // Linear Gaussian channel, sigma = 1, prior variance = SNR.
    std::vector<double> tight;
    for (double snr : {1.0, 0.1, 0.01, 0.001}) {
        const auto tb = trace_row("trace_bound/gaussian_snr_" + fmt_g("%g", snr), wrap(linear_gaussian_channel(1.0)),
                                  gaussian_prior(std::sqrt(snr), c.prior_nodes));
        tight.push_back(tb.tightness);
    }
    {
        CheckResult r;
        r.name = "trace_bound/gaussian_tightness";
        r.lhs = tight.back();
        r.rhs = 1.0;
        bool mono = true;
        for (std::size_t i = 1; i < tight.size(); ++i) mono = mono && tight[i] >= tight[i - 1];
        r.satisfied = mono && std::abs(tight.back() - 1.0) < 1e-2;
        r.slack = 1e-2 - std::abs(tight.back() - 1.0);
        r.seed = seed;
        r.detail = mono ? "rises toward 1 as SNR falls" : "not monotone in SNR";
        rows.push_back(r);
    }

    SeededRng cr = base.derive(410);
    for (int i = 0; i < c.channels; ++i) {
        const double A = cr.uniform(0.5, 3.0), slope = cr.uniform(0.5, 5.0);
        const double centre = cr.uniform(-1.0, 1.0), sigma = cr.uniform(0.2, 1.0);
        DiscretePrior prior;
        const double z1 = cr.uniform(-2.0, 0.0), z2 = cr.uniform(0.0, 2.0), w = cr.uniform(0.2, 0.8);
        prior.z = {z1, z2};
        prior.w = {w, 1.0 - w};
        trace_row("trace_bound/logistic_" + std::string(i < 10 ? "0" : "") + std::to_string(i),
                  wrap(logistic_channel(A, slope, centre, sigma)), prior);
    }

    // Classical power bound on Langevin runs.
    ThermoConfig th = thermo;
    th.well.threads = threads;
    auto power_row = [&](const std::string& name, const BitFlipReport& rep) {
        const auto pb = power_of(rep);
        CheckResult r;
        r.name = name;
        r.lhs = pb.lhs_power;
        r.rhs = pb.rhs_power;
        r.satisfied = pb.satisfied;
        r.slack = pb.min_slack;
        r.seed = seed;
        r.detail = "violations=" + std::to_string(pb.violations);
        rows.push_back(r);
    };
    power_row("power_bound/bitflip", simulate_bitflip(th.well, c.thermo_T, c.thermo_trials, base.derive(420)));
    power_row("power_bound/erasure",
              simulate_erasure(th.well, th.erasure_T, c.thermo_trials, base.derive(421), ErasureStart::Equiprobable));
    {
        // Reversible drive: power equals the free-energy release exactly.
        std::vector<PowerSample> ser;
        for (int k = 0; k < 100; ++k) {
            PowerSample s;
            s.t = 0.1 * (k + 1);
            s.dt = 0.1;
            s.F_dot = -std::sin(s.t);
            s.W_dot = std::sin(s.t);
            s.tol = 1e-12;
            ser.push_back(s);
        }
        const auto pb = power_bound_check(ser, th.well.kT());
        CheckResult r;
        r.name = "power_bound/reversible_synthetic";
        r.lhs = pb.lhs_power;
        r.rhs = pb.rhs_power;
        r.satisfied = pb.satisfied;
        r.slack = pb.min_slack;
        r.seed = seed;
        r.detail = "saturates the bound";
        rows.push_back(r);
    }
    return rows;
}

} // namespace pil
