#pragma once

#include "pil/cce.hpp"
#include "pil/metrics.hpp"
#include "pil/metriplectic.hpp"
#include "pil/numerics.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace pil {

using Cell = std::variant<double, std::string>;

struct ExperimentResult {
    std::string experiment;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    // Deterministic diagnostics only; nothing time- or host-dependent.
    nlohmann::json metadata = nlohmann::json::object();

    std::size_t column(const std::string& name) const;
    double number(std::size_t row, const std::string& col) const;
    std::vector<double> series(const std::string& col) const;
};

// Checks that every row has one cell per column.
void validate(const ExperimentResult& r);

// ---- Exp 1: dissipative reservoir memory ---------------------------------

struct Exp1Config {
    int n = 100;
    int reversible_dims = 98;    // block-rotation sector; the rest is left unrotated
    int lags = 20;
    int steps = 4000;            // recorded steps, half train and half test
    int washout = 200;
    double dt = 0.09;
    std::vector<double> lambda_grid = logspace(1e-3, 10.0, 10);
    double alpha = 1.0;
    double amplitude = 0.3;      // each of the two sinusoids
    double input_noise = 1.0;
    double b_norm = 3.0;
    double state_noise = 0.01;
    double ridge = 1e-6;
    std::uint64_t seed = 1;
    int threads = 1;
};

void validate(const Exp1Config& c);

// The reservoir for one lambda. Rotation angles per step are drawn uniformly
// from (0.05, pi - 0.05) so no two blocks share a frequency.
struct Exp1Reservoir {
    MetriplecticSystem sys;
    Mat propagator;
    std::vector<double> input; // u_t, washout included
};

Exp1Reservoir make_exp1_reservoir(const Exp1Config& c, double lambda);

struct Exp1Point {
    double lambda = 0.0;
    double mc = 0.0;
    double irr_rate_mean = 0.0; // measured left-endpoint average of the flux
    double chi = 0.0;
    std::vector<FluxRecord> flux;
};

Exp1Point run_exp1_point(const Exp1Config& c, double lambda, bool keep_flux = false);

// columns: lambda, MC, I_irr_rate, chi
ExperimentResult run_exp1(const Exp1Config& c);

// Memory capacity of state rows X (after washout) against input u.
double memory_capacity(const Mat& X, const std::vector<double>& u, int lags, double ridge);

// Per-step fluxes of one Exp 1 run, as the safety monitor consumes them.
// Work rate is the run's useful-work proxy MC / T_test, held constant.
std::vector<FluxSample> exp1_flux_series(const Exp1Config& c, double lambda);

struct EmergenceResult {
    double chi_coupled = 0.0;
    double chi_separable = 0.0;
    double mc_coupled = 0.0;
    double mc_separable = 0.0;
    double index = 0.0;
};

// Two half-size Exp 1 reservoirs; only A sees the input. The coupled run adds
// kappa * M x_other to each drift, the separable run zeroes the coupling.
EmergenceResult run_emergence(const Exp1Config& c, double lambda, double kappa);

// ---- Exp 2: oscillator bank vs digital counter ----------------------------

struct Exp2Config {
    std::vector<double> freqs = {1.0, 1.5, 2.0, 2.5};
    int trials_per_freq = 50;
    double horizon = 100.0;
    double dt = 0.01;
    double amplitude = 1.0;
    double coupling = 0.4;      // epsilon in theta' = omega + eps u cos(theta) - gamma sin(theta)
    double gamma = 1e-3;
    double phase_noise = 0.01;
    double input_noise = 0.05;
    double readout_fraction = 0.75;
    int bits = 16;
    double hysteresis = 0.1;    // Schmitt band, fraction of the amplitude
    double alpha = 1.0;
    std::uint64_t seed = 1;
    int threads = 1;
};

void validate(const Exp2Config& c);

struct Exp2Trial {
    double omega_in = 0.0;
    int truth = 0;
    int osc_label = -1;
    int dig_label = -1;
    double osc_irr = 0.0;
    double dig_irr = 0.0;
    long resets = 0;
};

Exp2Trial run_exp2_trial(const Exp2Config& c, int truth, SeededRng rng);

// columns: substrate, accuracy, I_irr, chi
ExperimentResult run_exp2(const Exp2Config& c);

// Relative phase of a single oscillator tuned `detuning` away from the drive,
// recorded as the state [cos(theta - omega_in t)].
Trajectory exp2_relative_phase(const Exp2Config& c, double omega_in, double detuning,
                               SeededRng rng);

// ---- Exp 3: echo-state criticality ----------------------------------------

struct Exp3Config {
    std::vector<double> rho_grid = linspace(0.1, 1.8, 20);
    int n = 200;
    double leak = 0.3;
    double input_scale = 0.1;
    double ridge = 1e-6;         // per training sample
    int washout = 200;
    int steps = 3000;            // after washout, half train and half test
    double eps = 1e-6;
    std::vector<double> freqs = {0.1, 0.23, 0.37};
    std::vector<double> amps = {1.0, 0.7, 0.5};
    double noise = 0.1;
    std::uint64_t seed = 1;
    int threads = 1;
};

void validate(const Exp3Config& c);

// columns: rho, deltaE, C, chi
ExperimentResult run_exp3(const Exp3Config& c);

// ---- Exp 4: energy-conserving automaton -----------------------------------

struct Grid {
    int H = 0;
    int W = 0;
    std::vector<long long> E;

    Grid() = default;
    Grid(int h, int w) : H(h), W(w), E(static_cast<std::size_t>(h) * w, 0) {}
    long long& at(int i, int j) { return E[static_cast<std::size_t>(i) * W + j]; }
    long long at(int i, int j) const { return E[static_cast<std::size_t>(i) * W + j]; }
    long long total() const;
};

// Moore offsets in row-major order; flow k goes from (i, j) to (i+di, j+dj).
inline constexpr std::array<std::array<int, 2>, 8> kMoore = {{
    {-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1},
}};

struct CaFlows {
    std::array<std::vector<long long>, 8> out;
};

Grid ca_step(const Grid& g, long long K, CaFlows* flows = nullptr);

enum class PatchEntropy { Histogram, Normalized };

const char* to_string(PatchEntropy m);

struct Exp4Config {
    int H = 256;
    int W = 256;
    long long K = 8;
    int patch = 8;
    int stride = 4;
    int steps = 500;
    double radius = 30.0;
    double eccentricity = 0.3;
    double noise = 0.3;
    double amplitude = 200.0;
    int bins = 128;
    double top_q = 0.05;
    double eps = 1e-9;
    int lag = 10;
    PatchEntropy entropy = PatchEntropy::Histogram;
    std::uint64_t seed = 7;
};

void validate(const Exp4Config& c);

Grid exp4_initial(const Exp4Config& c);

// Per-patch entropy on the (patch, stride) lattice, row-major.
std::vector<double> patch_entropy(const Grid& g, int w, int s, PatchEntropy mode, int bins);

// columns: t, mean_S, grad_corr, jaccard, neighbor_corr, total_energy.
// jaccard is NaN except on sampled frames that have a predecessor.
ExperimentResult run_exp4(const Exp4Config& c);

} // namespace pil
