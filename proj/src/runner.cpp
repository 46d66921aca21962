#include "pil/runner.hpp"

#include "pil/config.hpp"
#include "pil/error.hpp"
#include "pil/suites.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#ifndef PIL_VERSION
#define PIL_VERSION "unknown"
#endif

namespace pil {

namespace fs = std::filesystem;
using json = nlohmann::json;

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> s = {"exp1", "exp2", "exp3", "exp4", "gates",
                                               "bitflip", "erasure", "checks", "monitor"};
    return s;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

// JSON has no inf/nan; spell them as strings so sidecars stay parseable.
json num(double v) {
    if (std::isfinite(v)) return v;
    return format_number(v);
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) fail(ErrorKind::InvalidConfig, "cannot write '" + p.string() + "'");
    f << text;
    if (!f) fail(ErrorKind::InvalidConfig, "write failed for '" + p.string() + "'");
}

void write_json(const fs::path& p, const json& j) { write_file(p, j.dump(2) + "\n"); }

const std::vector<std::string> kAllSections = {"run",  "exp1",    "exp2",    "exp3",   "exp4",   "gates",
                                               "well", "bitflip", "erasure", "checks", "monitor"};

std::vector<std::string> sections_for(const std::string& sub) {
    if (sub == "gates") return {"run", "gates"};
    if (sub == "bitflip") return {"run", "well", "bitflip"};
    if (sub == "erasure") return {"run", "well", "erasure"};
    if (sub == "checks") return {"run", "checks", "well", "erasure"};
    if (sub == "monitor") return {"run", "exp1", "monitor"};
    return {"run", sub};
}

ExperimentResult table(std::string name, std::vector<std::string> cols) {
    ExperimentResult r;
    r.experiment = std::move(name);
    r.columns = std::move(cols);
    return r;
}

double b2d(bool b) { return b ? 1.0 : 0.0; }

struct Outcome {
    std::vector<ExperimentResult> tables;
    json metadata = json::object();
    int code = kExitOk;
    std::string summary;
};

Outcome do_gates(const Settings& s) {
    Outcome o;
    auto t = table("gates", {"gate", "noise", "pass", "rows", "max_settle_time", "detail"});
    const auto g = gate_suite(s.gates, s.seed);
    for (const auto& c : g.gates)
        t.rows.push_back({c.gate, c.noise, b2d(c.pass), static_cast<double>(c.rows), c.max_settle_time, c.detail});
    for (const auto& f : g.flipflop) {
        std::string sr;
        for (int b : f.set_reset) sr += (sr.empty() ? "" : ",") + std::to_string(b);
        t.rows.push_back({std::string("FLIPFLOP"), f.noise, b2d(f.pass), 0.0, f.settle_time,
                          "preserved_information=" + format_number(f.preserved_information) +
                              " set_reset=" + sr + " hold_ok=" + (f.hold_ok ? "1" : "0")});
    }
    o.metadata["pass"] = g.pass;
    o.metadata["noise_levels"] = {0.0, s.gates.noise};
    o.tables.push_back(std::move(t));
    o.code = g.pass ? kExitOk : kExitCheck;
    o.summary = std::string("gates: ") + (g.pass ? "all pass" : "FAILED");
    return o;
}

Outcome do_bitflip(const Settings& s) {
    Outcome o;
    auto t = table("bitflip", {"T", "success_prob", "work", "work_se", "heat", "heat_se", "dU", "dS", "dF_eq",
                               "W_diss", "W_diss_over_kT", "first_law_residual", "power_bound"});
    const auto sw = bitflip_sweep(s.thermo, s.seed);
    for (std::size_t i = 0; i < sw.reports.size(); ++i) {
        const auto& r = sw.reports[i];
        t.rows.push_back({sw.durations[i], r.success_prob, r.work_total, r.work_se, r.heat_env, r.heat_se, r.dU_sys,
                          r.dS_sys, r.dF_eq, r.dissipated_work, r.dissipated_work / r.kT, r.first_law_residual,
                          b2d(sw.power[i].satisfied)});
    }
    o.metadata["dissipation_nonincreasing"] = sw.dissipation_nonincreasing;
    o.metadata["first_law"] = sw.first_law;
    o.metadata["power_bound"] = sw.power_bound;
    o.metadata["kT"] = s.thermo.well.kT();
    o.tables.push_back(std::move(t));
    o.summary = std::string("bitflip: W_diss nonincreasing=") + (sw.dissipation_nonincreasing ? "yes" : "no");
    return o;
}

Outcome do_erasure(const Settings& s) {
    Outcome o;
    auto t = table("erasure", {"case", "T", "success_prob", "work", "work_se", "heat", "heat_se",
                               "landauer_bound", "info_erased", "first_law_residual", "power_bound"});
    const auto e = erasure_suite(s.thermo, s.seed);
    auto row = [&](const char* name, const BitFlipReport& r, const PowerBoundResult& pb) {
        t.rows.push_back({std::string(name), r.T_protocol, r.success_prob, r.work_total, r.work_se, r.heat_env,
                          r.heat_se, landauer_bound(r), logical_information_erased(r), r.first_law_residual,
                          b2d(pb.satisfied)});
    };
    row("slow", e.slow, e.power_slow);
    row("basin1_start", e.nothing, classical_bound_check(e.nothing, e.nothing.kT, logical_information_erased(e.nothing)));
    row("fast", e.fast, e.power_fast);
    o.metadata["kT_ln2"] = e.kT_ln2;
    o.metadata["landauer"] = e.landauer;
    o.metadata["basin1_heat_zero"] = e.nothing_zero;
    o.metadata["fast_exceeds_slow"] = e.fast_exceeds_slow;
    o.metadata["first_law"] = e.first_law;
    o.metadata["power_bound"] = e.power_bound;
    o.tables.push_back(std::move(t));
    o.summary = std::string("erasure: Landauer ") + (e.landauer ? "respected" : "VIOLATED");
    return o;
}

Outcome do_checks(const Settings& s) {
    Outcome o;
    auto t = table("checks", {"name", "lhs", "rhs", "satisfied", "slack", "seed", "detail"});
    const auto rows = run_checks(s.checks, s.thermo, s.seed, s.threads);
    json failed = json::array();
    for (const auto& r : rows) {
        t.rows.push_back({r.name, r.lhs, r.rhs, b2d(r.satisfied), r.slack, std::to_string(r.seed), r.detail});
        if (!r.satisfied) failed.push_back(r.name);
    }
    o.metadata["rows"] = rows.size();
    o.metadata["failed"] = failed;
    o.tables.push_back(std::move(t));
    o.code = failed.empty() ? kExitOk : kExitCheck;
    o.summary = "checks: " + std::to_string(rows.size() - failed.size()) + "/" + std::to_string(rows.size()) +
                " satisfied";
    return o;
}

Outcome do_monitor(const Settings& s) {
    Outcome o;
    const auto series = exp1_flux_series(s.exp1, s.monitor.lambda);
    const auto rep = safety_monitor(series, s.monitor.limits, s.monitor.window);
    auto t = table("monitor", {"constraint", "count", "first_time"});
    for (const auto& c : rep.constraints) t.rows.push_back({c.name, static_cast<double>(c.count), c.first_time});
    auto f = table("monitor_flux", {"t", "W_dot", "I_dot", "S_prod", "F_dot"});
    for (const auto& x : series) f.rows.push_back({x.t, x.W_dot, x.I_dot, x.S_prod, x.F_dot});
    o.metadata["total_violations"] = rep.total;
    o.metadata["first_violation"] = rep.first_violation;
    o.tables.push_back(std::move(t));
    o.tables.push_back(std::move(f));
    o.summary = "monitor: " + std::to_string(rep.total) + " violations";
    return o;
}

Outcome dispatch(const Settings& s, const std::string& sub) {
    Outcome o;
    if (sub == "exp1") {
        auto r = run_exp1(s.exp1);
        const auto em = run_emergence(s.exp1, s.emergence_lambda, s.emergence_kappa);
        r.metadata["emergence"] = {{"lambda", s.emergence_lambda}, {"kappa", s.emergence_kappa},
                                   {"chi_coupled", num(em.chi_coupled)}, {"chi_separable", num(em.chi_separable)},
                                   {"mc_coupled", num(em.mc_coupled)}, {"mc_separable", num(em.mc_separable)},
                                   {"index", num(em.index)}};
        o.tables.push_back(std::move(r));
    } else if (sub == "exp2") {
        o.tables.push_back(run_exp2(s.exp2));
    } else if (sub == "exp3") {
        o.tables.push_back(run_exp3(s.exp3));
    } else if (sub == "exp4") {
        o.tables.push_back(run_exp4(s.exp4));
    } else if (sub == "gates") {
        return do_gates(s);
    } else if (sub == "bitflip") {
        return do_bitflip(s);
    } else if (sub == "erasure") {
        return do_erasure(s);
    } else if (sub == "checks") {
        return do_checks(s);
    } else if (sub == "monitor") {
        return do_monitor(s);
    } else {
        fail(ErrorKind::InvalidConfig, "unknown subcommand '" + sub + "'");
    }
    o.metadata = o.tables.front().metadata;
    o.summary = sub + ": " + std::to_string(o.tables.front().rows.size()) + " rows";
    return o;
}

std::string timestamp() {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

} // namespace

std::string to_csv(const ExperimentResult& r) {
    validate(r);
    std::string out;
    for (std::size_t i = 0; i < r.columns.size(); ++i) out += (i ? "," : "") + csv_field(r.columns[i]);
    out += "\n";
    for (const auto& row : r.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ",";
            if (const double* d = std::get_if<double>(&row[i])) out += format_number(*d);
            else out += csv_field(std::get<std::string>(row[i]));
        }
        out += "\n";
    }
    return out;
}

int run(const RunOptions& opt, std::ostream& log) {
    const fs::path out = opt.out_dir.empty() ? fs::path("out") / opt.subcommand : fs::path(opt.out_dir);
    const auto t0 = std::chrono::steady_clock::now();
    auto report_error = [&](const std::string& kind, const std::string& msg, int code) {
        std::error_code ec;
        fs::create_directories(out, ec);
        json e = {{"subcommand", opt.subcommand}, {"kind", kind}, {"message", msg}, {"exit_code", code}};
        std::ofstream f(out / "error.json", std::ios::binary);
        if (f) f << e.dump(2) << "\n";
        log << "error (" << kind << "): " << msg << "\n";
        return code;
    };
    try {
        Settings s = opt.config_path.empty() ? parse_config_text("") : parse_config_file(opt.config_path);
        if (opt.seed) s.seed = *opt.seed;
        if (opt.threads) {
            if (*opt.threads < 1) fail(ErrorKind::InvalidConfig, "threads must be >= 1");
            s.threads = *opt.threads;
        }
        s.propagate();
        bool known = false;
        for (const auto& c : subcommands()) known = known || c == opt.subcommand;
        if (!known) fail(ErrorKind::InvalidConfig, "unknown subcommand '" + opt.subcommand + "'");

        fs::create_directories(out);
        fs::remove(out / "error.json");
        const Outcome o = dispatch(s, opt.subcommand);

        for (const auto& t : o.tables) {
            write_file(out / (t.experiment + ".csv"), to_csv(t));
        }
        json side = {{"experiment", opt.subcommand},
                     {"seed", s.seed},
                     {"code_version", PIL_VERSION},
                     {"config", resolved(s, sections_for(opt.subcommand))},
                     {"metadata", o.metadata},
                     {"exit_code", o.code}};
        write_json(out / (opt.subcommand + ".json"), side);
        json manifest = {{"subcommand", opt.subcommand},
                         {"config_path", opt.config_path},
                         {"output_dir", out.generic_string()},
                         {"seed", s.seed},
                         {"code_version", PIL_VERSION},
                         {"resolved", resolved(s, kAllSections)}};
        write_json(out / "manifest.json", manifest);
        // Host-dependent facts live outside the JSON artifacts so those stay
        // byte-identical between runs.
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_file(out / "timing.txt", "timestamp " + timestamp() + "\nwall_seconds " + format_number(wall) + "\n");
        if (!opt.quiet) log << o.summary << " -> " << out.generic_string() << "\n";
        return o.code;
    } catch (const Error& e) {
        return report_error(to_string(e.kind()), e.what(), exit_code(e.kind()));
    } catch (const fs::filesystem_error& e) {
        return report_error("invalid-config", e.what(), kExitConfig);
    } catch (const std::exception& e) {
        return report_error("numeric", e.what(), kExitNumeric);
    }
}

} // namespace pil
