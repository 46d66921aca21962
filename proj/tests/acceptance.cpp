// One pass/fail line per acceptance criterion. Exit status is the number of
// failing criteria.

#include "pil/config.hpp"
#include "pil/runner.hpp"
#include "pil/suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

using namespace pil;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int n, bool ok, const std::string& detail) {
    std::printf("criterion %d: %s  %s\n", n, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    failures += !ok;
}

std::string f(const char* fmt, double v) {
    char b[64];
    std::snprintf(b, sizeof b, fmt, v);
    return b;
}

Settings defaults() { return parse_config_text(""); }

double window_mean(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t i = lo; i < hi; ++i)
        if (!std::isnan(v[i])) s += v[i], ++n;
    return n ? s / static_cast<double>(n) : std::nan("");
}

void criterion1() {
    const auto t0 = Clock::now();
    const Settings s = defaults();
    const auto r = run_exp1(s.exp1);
    const double dt = since(t0);
    const auto lam = r.series("lambda"), mc = r.series("MC"), irr = r.series("I_irr_rate"), chi = r.series("chi");
    bool dec = lam.size() == 10, exact = true;
    for (std::size_t i = 0; i < lam.size(); ++i) {
        exact = exact && irr[i] == lam[i] / s.exp1.alpha;
        if (i) dec = dec && chi[i] < chi[i - 1];
    }
    const double ratio = mc.front() / mc.back();
    report(1, dec && exact && ratio >= 4.0 && dt < 60.0,
           std::string("chi strictly decreasing=") + (dec ? "yes" : "no") + " I_irr=lambda exact=" +
               (exact ? "yes" : "no") + " MC ratio=" + f("%.2f", ratio) + " time=" + f("%.1f", dt) + "s");
}

void criterion2() {
    const auto t0 = Clock::now();
    const Settings s = defaults();
    const auto r = run_exp2(s.exp2);
    const double dt = since(t0);
    const double osc = r.number(0, "accuracy"), dig = r.number(1, "accuracy");
    const double ratio = r.number(1, "I_irr") / r.number(0, "I_irr");
    report(2, osc == 1.0 && dig == 1.0 && s.exp2.trials_per_freq >= 50 && ratio >= 100.0 && dt < 120.0,
           "accuracy osc=" + f("%.3f", osc) + " dig=" + f("%.3f", dig) + " trials/freq=" +
               std::to_string(s.exp2.trials_per_freq) + " I_irr ratio=" + f("%.1f", ratio) + " time=" +
               f("%.1f", dt) + "s");
}

void criterion3() {
    const auto t0 = Clock::now();
    bool ok = true;
    std::string argmaxes, ends;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Settings s = parse_config_text("seed = " + std::to_string(seed));
        const auto r = run_exp3(s.exp3);
        const auto rho = r.series("rho"), chi = r.series("chi");
        const auto k = static_cast<std::size_t>(std::max_element(chi.begin(), chi.end()) - chi.begin());
        // The right endpoint often scores below the persistence baseline, so
        // its chi is negative; the raw values are printed to keep that visible.
        const bool inside = rho[k] > 0.3 && rho[k] < 1.5;
        const bool margin = chi[k] > 0.0 && chi[k] >= 2.0 * chi.front() && chi[k] >= 2.0 * chi.back();
        ok = ok && inside && margin;
        argmaxes += (argmaxes.empty() ? "" : ",") + f("%.3f", rho[k]);
        ends += " [" + f("%.3f", chi.front()) + " " + f("%.3f", chi[k]) + " " + f("%.3f", chi.back()) + "]";
    }
    const double dt = since(t0);
    report(3, ok && dt < 120.0,
           "argmax rho per seed=" + argmaxes + " chi [left opt right] per seed:" + ends + " time=" + f("%.1f", dt) + "s");
}

void criterion4() {
    const auto t0 = Clock::now();
    const Settings s = defaults();
    const auto r = run_exp4(s.exp4);
    const double dt = since(t0);
    const auto E = r.series("total_energy"), g = r.series("grad_corr"), S = r.series("mean_S"), J = r.series("jaccard");
    bool exact = E.size() == 500;
    for (double e : E) exact = exact && e == E.front();
    const std::size_t n = g.size(), w = n / 5;
    const double g_first = window_mean(g, 0, w), g_last = window_mean(g, n - w, n);
    const double s_peak = *std::max_element(S.begin(), S.end()), s_final = S.back();
    const double j_first = window_mean(J, 0, w), j_last = window_mean(J, n - w, n);
    const bool ok = exact && g_first > g_last && s_final < 0.25 * s_peak && j_last > j_first && dt < 180.0;
    report(4, ok,
           std::string("energy exact=") + (exact ? "yes" : "no") + " grad_corr first/last=" + f("%.4f", g_first) +
               "/" + f("%.4f", g_last) + " mean_S final/peak=" + f("%.3g", s_final) + "/" + f("%.3g", s_peak) +
               " jaccard first/last=" + f("%.3f", j_first) + "/" + f("%.3f", j_last) + " time=" + f("%.1f", dt) +
               "s");
}

void criterion5() {
    const auto t0 = Clock::now();
    const Settings s = defaults();
    const auto g = gate_suite(s.gates, s.seed);
    const double dt = since(t0);
    bool info = !g.flipflop.empty();
    for (const auto& ff : g.flipflop) info = info && std::abs(ff.preserved_information - std::log(2.0)) < 1e-12;
    long passed = 0;
    for (const auto& c : g.gates) passed += c.pass;
    for (const auto& c : g.flipflop) passed += c.pass;
    report(5, g.pass && info && dt < 30.0,
           std::to_string(passed) + "/" + std::to_string(g.gates.size() + g.flipflop.size()) +
               " gate runs pass (noise 0 and " + f("%g", s.gates.noise) + ") flip-flop preserved info=" +
               f("%.6f", g.flipflop.empty() ? 0.0 : g.flipflop.front().preserved_information) + " time=" +
               f("%.1f", dt) + "s");
}

void criterion6() {
    const auto t0 = Clock::now();
    const Settings s = defaults();
    const auto e = erasure_suite(s.thermo, s.seed);
    const auto b = bitflip_sweep(s.thermo, s.seed);
    const double dt = since(t0);
    std::string wd;
    for (const auto& r : b.reports) wd += (wd.empty() ? "" : ",") + f("%.3f", r.dissipated_work / r.kT);
    const bool ok = s.thermo.trials >= 1000 && e.landauer && b.dissipation_nonincreasing && e.first_law &&
                    b.first_law && e.power_bound && b.power_bound && dt < 300.0;
    report(6, ok,
           "erasure heat=" + f("%.4f", e.slow.heat_env) + "+-" + f("%.4f", e.slow.heat_se) + " vs kT ln2=" +
               f("%.4f", e.kT_ln2) + " W_diss/kT over T0..8T0=" + wd + " first law=" +
               (e.first_law && b.first_law ? "yes" : "no") + " power bound=" +
               (e.power_bound && b.power_bound ? "yes" : "no") + " trials=" + std::to_string(s.thermo.trials) +
               " time=" + f("%.1f", dt) + "s");
}

void criterion7() {
    const auto t0 = Clock::now();
    const Settings s = defaults();
    const auto rows = run_checks(s.checks, s.thermo, s.seed, s.threads);
    const double dt = since(t0);
    int tur_ok = 0, tur_n = 0, logi_ok = 0, logi_n = 0;
    bool gauss = true, tight = false, near = false;
    std::string failed;
    for (const auto& r : rows) {
        const auto has = [&](const char* p) { return r.name.rfind(p, 0) == 0; };
        if (has("tur/ensemble_")) ++tur_n, tur_ok += r.satisfied;
        else if (has("trace_bound/logistic_")) ++logi_n, logi_ok += r.satisfied;
        else if (has("trace_bound/gaussian_tightness")) tight = r.satisfied;
        else if (has("trace_bound/gaussian_")) gauss = gauss && r.satisfied;
        else if (has("tur/near_equilibrium_factor")) near = r.satisfied;
        if (!r.satisfied) failed += " " + r.name;
    }
    const bool ok = gauss && tight && logi_n == 20 && logi_ok == 20 && tur_n == 100 && tur_ok == 100 && near && dt < 60.0;
    report(7, ok,
           std::string("gaussian=") + (gauss ? "yes" : "no") + " tightness->1=" + (tight ? "yes" : "no") +
               " logistic " + std::to_string(logi_ok) + "/" + std::to_string(logi_n) + " TUR " +
               std::to_string(tur_ok) + "/" + std::to_string(tur_n) + " near-eq within 2x=" + (near ? "yes" : "no") +
               (failed.empty() ? "" : " failed:" + failed) + " time=" + f("%.1f", dt) + "s");
}

std::map<std::string, std::string> artifacts(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto ext = e.path().extension();
        if (ext != ".csv" && ext != ".json") continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        out[e.path().filename().string()] = ss.str();
    }
    return out;
}

void criterion8() {
    const auto t0 = Clock::now();
    const fs::path root = fs::temp_directory_path() / "pil_acceptance_determinism";
    fs::remove_all(root);
    bool ok = true;
    std::string bad;
    std::size_t files = 0;
    std::ostringstream log;
    for (const auto& sub : subcommands()) {
        RunOptions o;
        o.subcommand = sub;
        o.out_dir = (root / sub).string();
        o.quiet = true;
        // Same manifest both times, including the output directory.
        const int c1 = run(o, log);
        const auto first = artifacts(root / sub);
        const int c2 = run(o, log);
        const auto second = artifacts(root / sub);
        files += first.size();
        if (c1 != c2 || first != second || first.empty()) {
            ok = false;
            bad += " " + sub;
        }
    }
    fs::remove_all(root);
    const double dt = since(t0);
    report(8, ok,
           std::to_string(subcommands().size()) + " subcommands, " + std::to_string(files) +
               " CSV/JSON files compared byte for byte" + (bad.empty() ? "" : "; differing:" + bad) + " time=" +
               f("%.1f", dt) + "s");
}

} // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    std::printf("%d of 8 criteria failed\n", failures);
    return failures;
}
