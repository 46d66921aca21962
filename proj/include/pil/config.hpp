#pragma once

#include "pil/cce.hpp"
#include "pil/circuits.hpp"
#include "pil/experiments.hpp"
#include "pil/metrics.hpp"

#include <json.hpp>

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace pil {

struct GatesConfig {
    GateParams params;
    LogicalReadout readout;
    double noise = 1e-3;       // state noise for the noisy pass
    double pulse = 5.0;        // flip-flop write pulse duration
    double hold = 50.0;        // pulse-free horizon after a write
};

struct ThermoConfig {
    DoubleWellParams well;
    int trials = 1000;
    double T0 = 25.0;          // bit flip durations T0, 2 T0, ...
    int durations = 4;
    double erasure_T = 5.0;
    double fast_divisor = 8.0; // fast erasure runs at erasure_T / fast_divisor
};

struct ChecksConfig {
    int tur_ensembles = 100;
    int tur_trials = 2000;     // walks per ensemble
    long tur_steps = 1000;     // steps per walk
    int bootstrap = 200;
    double near_eq_ratio = 1.01;
    long near_eq_steps = 40000;
    int channels = 20;
    int prior_nodes = 40;
    std::string channel_preset = "honest"; // or "corrupted"
    double corrupt_scale = 0.1;
    int thermo_trials = 400;
    double thermo_T = 50.0;
};

struct MonitorConfig {
    double lambda = 10.0;
    SafetyLimits limits;
    int window = 100;
};

struct Settings {
    std::uint64_t seed = 1;
    int threads = 1;
    Exp1Config exp1;
    double emergence_lambda = 0.1;
    double emergence_kappa = 0.5;
    Exp2Config exp2;
    Exp3Config exp3;
    Exp4Config exp4;
    GatesConfig gates;
    ThermoConfig thermo;
    ChecksConfig checks;
    MonitorConfig monitor;

    // Copies seed and threads into every section.
    void propagate();
};

// Grammar, one statement per line:
//   # comment
//   [section]
//   key = value            (key relative to the current section)
//   section.key = value    (absolute)
// Values: numbers, true/false, bare or quoted strings, lists [a, b, c] and
// ranges [lo .. hi : n] (n evenly spaced points, endpoints included; append
// `log` for log spacing).
Settings parse_config_text(const std::string& text);
Settings parse_config_file(const std::string& path);

// Expands one list or range literal; exposed for tests.
std::vector<double> parse_list(const std::string& literal);

// Every key of the given sections with the value actually in effect.
nlohmann::json resolved(const Settings& s, const std::vector<std::string>& sections);

// Documented keys, "section.key", sorted.
std::vector<std::string> config_keys();

} // namespace pil
