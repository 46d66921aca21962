#include "pil/config.hpp"

#include "pil/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

namespace pil {

void Settings::propagate() {
    exp1.seed = exp2.seed = exp3.seed = exp4.seed = seed;
    exp1.threads = exp2.threads = exp3.threads = threads;
    thermo.well.threads = threads;
}

namespace {

using json = nlohmann::json;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& why) {
    fail(ErrorKind::InvalidConfig, key + ": " + why);
}

double to_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
        bad(key, "expected a number, got '" + t + "'");
    if (!std::isfinite(v)) bad(key, "value must be finite");
    return v;
}

long long to_integer(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    long long v = 0;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
        bad(key, "expected an integer, got '" + t + "'");
    return v;
}

std::string to_string_value(const std::string& text) {
    std::string t = trim(text);
    if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
    return t;
}

std::vector<double> list_value(const std::string& key, const std::string& text) {
    std::string t = trim(text);
    if (t.size() < 2 || t.front() != '[' || t.back() != ']')
        bad(key, "expected a list [a, b] or a range [lo .. hi : n]");
    t = t.substr(1, t.size() - 2);
    std::vector<double> out;
    const auto dots = t.find("..");
    if (dots != std::string::npos) {
        const auto colon = t.find(':', dots);
        if (colon == std::string::npos) bad(key, "range needs ': n'");
        const double lo = to_double(key, t.substr(0, dots));
        const double hi = to_double(key, t.substr(dots + 2, colon - dots - 2));
        std::string tail = trim(t.substr(colon + 1));
        bool log = false;
        if (tail.size() > 3 && tail.substr(tail.size() - 3) == "log") {
            log = true;
            tail = trim(tail.substr(0, tail.size() - 3));
        }
        const long long n = to_integer(key, tail);
        if (n < 1) bad(key, "range needs n >= 1");
        if (!(hi >= lo)) bad(key, "range needs lo <= hi");
        if (log && !(lo > 0)) bad(key, "log range needs lo > 0");
        return log ? logspace(lo, hi, static_cast<int>(n)) : linspace(lo, hi, static_cast<int>(n));
    }
    std::stringstream ss(t);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (trim(item).empty()) {
            if (out.empty() && trim(t).empty()) break;
            bad(key, "empty list element");
        }
        out.push_back(to_double(key, item));
    }
    return out;
}

struct Key {
    std::string range;
    std::function<void(Settings&, const std::string&, const std::string&)> set;
    std::function<json(const Settings&)> get;
};

using Schema = std::map<std::string, std::map<std::string, Key>>;

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

// Real in [lo, hi]; open ends when the flags say so.
template <class Acc>
Key real(Acc acc, double lo, double hi, bool lo_open = false, bool hi_open = false) {
    Key k;
    k.range = std::string(lo_open ? "(" : "[") + fmt(lo) + ", " +
              (std::isinf(hi) ? "inf" : fmt(hi)) + (hi_open || std::isinf(hi) ? ")" : "]");
    k.set = [=](Settings& s, const std::string& name, const std::string& v) {
        const double x = to_double(name, v);
        const bool ok = (lo_open ? x > lo : x >= lo) && (hi_open ? x < hi : x <= hi);
        if (!ok) bad(name, "value " + fmt(x) + " outside valid range " + k.range);
        acc(s) = x;
    };
    k.get = [=](const Settings& s) { return json(acc(const_cast<Settings&>(s))); };
    return k;
}

template <class Acc>
Key integer(Acc acc, long long lo, long long hi) {
    Key k;
    k.range = "[" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
    k.set = [=](Settings& s, const std::string& name, const std::string& v) {
        const long long x = to_integer(name, v);
        if (x < lo || x > hi) bad(name, "value " + std::to_string(x) + " outside valid range " + k.range);
        using T = std::remove_reference_t<decltype(acc(s))>;
        acc(s) = static_cast<T>(x);
    };
    k.get = [=](const Settings& s) { return json(acc(const_cast<Settings&>(s))); };
    return k;
}

// Nonempty strictly increasing list with elements in [lo, hi].
template <class Acc>
Key grid(Acc acc, double lo, double hi, bool lo_open = false) {
    Key k;
    k.range = "strictly increasing list within " + std::string(lo_open ? "(" : "[") + fmt(lo) +
              ", " + (std::isinf(hi) ? "inf)" : fmt(hi) + "]");
    k.set = [=](Settings& s, const std::string& name, const std::string& v) {
        const auto xs = list_value(name, v);
        if (xs.empty()) bad(name, "list must be nonempty");
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double x = xs[i];
            if ((lo_open ? !(x > lo) : !(x >= lo)) || x > hi)
                bad(name, "element " + fmt(x) + " outside valid range: " + k.range);
            if (i && !(x > xs[i - 1])) bad(name, "list must be strictly increasing");
        }
        acc(s) = xs;
    };
    k.get = [=](const Settings& s) { return json(acc(const_cast<Settings&>(s))); };
    return k;
}

// Nonempty list of positive values in any order.
template <class Acc>
Key positive_list(Acc acc) {
    Key k;
    k.range = "nonempty list of positive numbers";
    k.set = [=](Settings& s, const std::string& name, const std::string& v) {
        const auto xs = list_value(name, v);
        if (xs.empty()) bad(name, "list must be nonempty");
        for (double x : xs)
            if (!(x > 0)) bad(name, "element " + fmt(x) + " outside valid range: " + k.range);
        acc(s) = xs;
    };
    k.get = [=](const Settings& s) { return json(acc(const_cast<Settings&>(s))); };
    return k;
}

template <class Acc>
Key choice(Acc acc, std::vector<std::string> options) {
    Key k;
    k.range = "one of {";
    for (std::size_t i = 0; i < options.size(); ++i) k.range += (i ? ", " : "") + options[i];
    k.range += "}";
    k.set = [=](Settings& s, const std::string& name, const std::string& v) {
        const std::string x = to_string_value(v);
        if (std::find(options.begin(), options.end(), x) == options.end())
            bad(name, "value '" + x + "' outside valid range " + k.range);
        acc(s) = x;
    };
    k.get = [=](const Settings& s) { return json(acc(const_cast<Settings&>(s))); };
    return k;
}

#define ACC(expr) [](Settings& s) -> auto& { return expr; }

const Schema& schema() {
    static const Schema sc = [] {
        const double inf = std::numeric_limits<double>::infinity();
        Schema m;
        auto& run = m["run"];
        run["seed"] = integer(ACC(s.seed), 0, std::numeric_limits<long long>::max());
        run["threads"] = integer(ACC(s.threads), 1, 256);

        auto& e1 = m["exp1"];
        e1["n"] = integer(ACC(s.exp1.n), 2, 2000);
        e1["reversible_dims"] = integer(ACC(s.exp1.reversible_dims), 0, 2000);
        e1["lags"] = integer(ACC(s.exp1.lags), 1, 1000);
        e1["steps"] = integer(ACC(s.exp1.steps), 4, 10000000);
        e1["washout"] = integer(ACC(s.exp1.washout), 0, 10000000);
        e1["dt"] = real(ACC(s.exp1.dt), 0, 10, true);
        e1["lambda_grid"] = grid(ACC(s.exp1.lambda_grid), 0, inf, true);
        e1["alpha"] = real(ACC(s.exp1.alpha), 0, inf, true);
        e1["amplitude"] = real(ACC(s.exp1.amplitude), 0, inf);
        e1["input_noise"] = real(ACC(s.exp1.input_noise), 0, inf);
        e1["b_norm"] = real(ACC(s.exp1.b_norm), 0, inf);
        e1["state_noise"] = real(ACC(s.exp1.state_noise), 0, inf);
        e1["ridge"] = real(ACC(s.exp1.ridge), 0, inf);
        e1["emergence_lambda"] = real(ACC(s.emergence_lambda), 0, inf, true);
        e1["emergence_kappa"] = real(ACC(s.emergence_kappa), 0, inf);

        auto& e2 = m["exp2"];
        e2["freqs"] = positive_list(ACC(s.exp2.freqs));
        e2["trials_per_freq"] = integer(ACC(s.exp2.trials_per_freq), 1, 1000000);
        e2["horizon"] = real(ACC(s.exp2.horizon), 0, inf, true);
        e2["dt"] = real(ACC(s.exp2.dt), 0, 1, true);
        e2["amplitude"] = real(ACC(s.exp2.amplitude), 0, inf, true);
        e2["coupling"] = real(ACC(s.exp2.coupling), 0, inf);
        e2["gamma"] = real(ACC(s.exp2.gamma), 0, inf);
        e2["phase_noise"] = real(ACC(s.exp2.phase_noise), 0, inf);
        e2["input_noise"] = real(ACC(s.exp2.input_noise), 0, inf);
        e2["readout_fraction"] = real(ACC(s.exp2.readout_fraction), 0, 1, true);
        e2["bits"] = integer(ACC(s.exp2.bits), 1, 64);
        e2["hysteresis"] = real(ACC(s.exp2.hysteresis), 0, 1, false, true);
        e2["alpha"] = real(ACC(s.exp2.alpha), 0, inf, true);

        auto& e3 = m["exp3"];
        e3["rho_grid"] = grid(ACC(s.exp3.rho_grid), 0, inf, true);
        e3["n"] = integer(ACC(s.exp3.n), 1, 5000);
        e3["leak"] = real(ACC(s.exp3.leak), 0, 1, true);
        e3["input_scale"] = real(ACC(s.exp3.input_scale), 0, inf);
        e3["ridge"] = real(ACC(s.exp3.ridge), 0, inf);
        e3["washout"] = integer(ACC(s.exp3.washout), 0, 10000000);
        e3["steps"] = integer(ACC(s.exp3.steps), 4, 10000000);
        e3["eps"] = real(ACC(s.exp3.eps), 0, inf, true);
        e3["freqs"] = positive_list(ACC(s.exp3.freqs));
        e3["amps"] = positive_list(ACC(s.exp3.amps));
        e3["noise"] = real(ACC(s.exp3.noise), 0, inf);

        auto& e4 = m["exp4"];
        e4["height"] = integer(ACC(s.exp4.H), 3, 8192);
        e4["width"] = integer(ACC(s.exp4.W), 3, 8192);
        e4["K"] = integer(ACC(s.exp4.K), 1, 1000000);
        e4["patch"] = integer(ACC(s.exp4.patch), 2, 8192);
        e4["stride"] = integer(ACC(s.exp4.stride), 1, 8192);
        e4["steps"] = integer(ACC(s.exp4.steps), 1, 10000000);
        e4["radius"] = real(ACC(s.exp4.radius), 0, inf, true);
        e4["eccentricity"] = real(ACC(s.exp4.eccentricity), 0, 1, false, true);
        e4["noise"] = real(ACC(s.exp4.noise), 0, inf);
        e4["amplitude"] = real(ACC(s.exp4.amplitude), 0, 1e15, true);
        e4["bins"] = integer(ACC(s.exp4.bins), 2, 65536);
        e4["top_q"] = real(ACC(s.exp4.top_q), 0, 1, true);
        e4["eps"] = real(ACC(s.exp4.eps), 0, inf, true);
        e4["lag"] = integer(ACC(s.exp4.lag), 1, 1000000);
        {
            Key k;
            k.range = "one of {histogram, normalized}";
            k.set = [r = k.range](Settings& s, const std::string& name, const std::string& v) {
                const std::string x = to_string_value(v);
                if (x == "histogram") s.exp4.entropy = PatchEntropy::Histogram;
                else if (x == "normalized") s.exp4.entropy = PatchEntropy::Normalized;
                else bad(name, "value '" + x + "' outside valid range " + r);
            };
            k.get = [](const Settings& s) { return json(to_string(s.exp4.entropy)); };
            e4["entropy"] = k;
        }

        auto& g = m["gates"];
        g["w1"] = real(ACC(s.gates.params.w1), 0, inf, true);
        g["w2"] = real(ACC(s.gates.params.w2), 0, inf, true);
        g["theta_and"] = real(ACC(s.gates.params.theta_and), -inf, inf);
        g["theta_or"] = real(ACC(s.gates.params.theta_or), -inf, inf);
        g["w_not"] = real(ACC(s.gates.params.w_not), 0, inf, true);
        g["b_not"] = real(ACC(s.gates.params.b_not), -inf, inf);
        g["gain"] = real(ACC(s.gates.params.gain), 0, inf, true);
        g["ff_self"] = real(ACC(s.gates.params.ff_self), 0, inf);
        g["ff_cross"] = real(ACC(s.gates.params.ff_cross), 0, inf);
        g["low_max"] = real(ACC(s.gates.readout.low_max), 0, 1);
        g["high_min"] = real(ACC(s.gates.readout.high_min), 0, 1);
        g["t_max"] = real(ACC(s.gates.readout.t_max), 0, inf, true);
        g["window"] = real(ACC(s.gates.readout.window), 0, inf, true);
        g["tol"] = real(ACC(s.gates.readout.tol), 0, inf, true);
        g["dt"] = real(ACC(s.gates.readout.dt), 0, 1, true);
        g["noise"] = real(ACC(s.gates.noise), 0, 1);
        g["pulse"] = real(ACC(s.gates.pulse), 0, inf, true);
        g["hold"] = real(ACC(s.gates.hold), 0, inf, true);

        auto& w = m["well"];
        w["a"] = real(ACC(s.thermo.well.a), 0, inf, true);
        w["b"] = real(ACC(s.thermo.well.b), 0, inf, true);
        w["c"] = real(ACC(s.thermo.well.c), 0, inf, true);
        w["C_max"] = real(ACC(s.thermo.well.C_max), 0, inf);
        w["gamma"] = real(ACC(s.thermo.well.gamma), 0, inf, true);
        w["D"] = real(ACC(s.thermo.well.D), 0, inf, true);
        w["dt"] = real(ACC(s.thermo.well.dt), 0, 1, true);
        w["hist_bins"] = integer(ACC(s.thermo.well.hist_bins), 2, 100000);
        w["checkpoints"] = integer(ACC(s.thermo.well.checkpoints), 1, 100000);
        w["band_frac"] = real(ACC(s.thermo.well.band_frac), 0, 0.5, false, true);
        w["t_return"] = real(ACC(s.thermo.well.t_return), 0, inf, true);

        auto& bf = m["bitflip"];
        bf["trials"] = integer(ACC(s.thermo.trials), 1, 100000000);
        bf["T0"] = real(ACC(s.thermo.T0), 0, inf, true);
        bf["durations"] = integer(ACC(s.thermo.durations), 1, 20);

        auto& er = m["erasure"];
        er["T"] = real(ACC(s.thermo.erasure_T), 0, inf, true);
        er["fast_divisor"] = real(ACC(s.thermo.fast_divisor), 1, inf, true);

        auto& ch = m["checks"];
        ch["tur_ensembles"] = integer(ACC(s.checks.tur_ensembles), 1, 100000);
        ch["tur_trials"] = integer(ACC(s.checks.tur_trials), 100, 100000000);
        ch["tur_steps"] = integer(ACC(s.checks.tur_steps), 1, 100000000);
        ch["bootstrap"] = integer(ACC(s.checks.bootstrap), 2, 100000);
        ch["near_eq_steps"] = integer(ACC(s.checks.near_eq_steps), 1, 100000000);
        ch["near_eq_ratio"] = real(ACC(s.checks.near_eq_ratio), 1, 2, true);
        ch["channels"] = integer(ACC(s.checks.channels), 0, 100000);
        ch["prior_nodes"] = integer(ACC(s.checks.prior_nodes), 2, 200);
        ch["channel_preset"] = choice(ACC(s.checks.channel_preset), {"honest", "corrupted"});
        ch["corrupt_scale"] = real(ACC(s.checks.corrupt_scale), 0, 1, false, true);
        ch["thermo_trials"] = integer(ACC(s.checks.thermo_trials), 1, 100000000);
        ch["thermo_T"] = real(ACC(s.checks.thermo_T), 0, inf, true);

        auto& mo = m["monitor"];
        mo["lambda"] = real(ACC(s.monitor.lambda), 0, inf, true);
        mo["window"] = integer(ACC(s.monitor.window), 1, 100000000);
        mo["chi_min"] = real(ACC(s.monitor.limits.chi_min), 0, inf, true);
        mo["chi_max"] = real(ACC(s.monitor.limits.chi_max), 0, inf, true);
        mo["P_max"] = real(ACC(s.monitor.limits.P_max), 0, inf, true);
        mo["I_dot_max"] = real(ACC(s.monitor.limits.I_dot_max), 0, inf, true);
        mo["s_crit"] = real(ACC(s.monitor.limits.s_crit), 0, inf, true);
        mo["f_max"] = real(ACC(s.monitor.limits.f_max), 0, inf, true);
        return m;
    }();
    return sc;
}

#undef ACC

void cross_validate(Settings& s) {
    s.propagate();
    validate(s.exp1);
    validate(s.exp2);
    validate(s.exp3);
    validate(s.exp4);
    validate(s.gates.params);
    validate(s.gates.readout);
    validate(s.thermo.well);
    validate(s.monitor.limits);
}

} // namespace

std::vector<double> parse_list(const std::string& literal) { return list_value("list", literal); }

Settings parse_config_text(const std::string& text) {
    Settings s;
    const Schema& sc = schema();
    std::set<std::string> seen;
    std::string section = "run";
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(lineno);
        if (line.front() == '[' && line.find('=') == std::string::npos) {
            if (line.back() != ']') fail(ErrorKind::InvalidConfig, where + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!sc.count(section)) fail(ErrorKind::InvalidConfig, where + ": unknown section '" + section + "'");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(ErrorKind::InvalidConfig, where + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        std::string sec = section;
        const auto dot = key.find('.');
        if (dot != std::string::npos) {
            sec = key.substr(0, dot);
            key = key.substr(dot + 1);
        }
        const std::string full = sec + "." + key;
        const auto si = sc.find(sec);
        if (si == sc.end() || !si->second.count(key))
            fail(ErrorKind::InvalidConfig, "unknown key '" + full + "' (" + where + ")");
        if (!seen.insert(full).second) fail(ErrorKind::InvalidConfig, "duplicate key '" + full + "'");
        if (value.empty()) fail(ErrorKind::InvalidConfig, full + ": missing value");
        si->second.at(key).set(s, full, value);
    }
    cross_validate(s);
    return s;
}

Settings parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(ErrorKind::InvalidConfig, "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

nlohmann::json resolved(const Settings& s, const std::vector<std::string>& sections) {
    json out = json::object();
    const Schema& sc = schema();
    for (const auto& sec : sections) {
        const auto it = sc.find(sec);
        if (it == sc.end()) fail(ErrorKind::InternalLogic, "no config section '" + sec + "'");
        json block = json::object();
        for (const auto& [k, key] : it->second) block[k] = key.get(s);
        out[sec] = block;
    }
    return out;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& [sec, keys] : schema())
        for (const auto& [k, key] : keys) out.push_back(sec + "." + k + "  " + key.range);
    return out;
}

} // namespace pil
