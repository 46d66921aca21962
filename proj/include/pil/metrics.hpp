#pragma once

#include "pil/cce.hpp"
#include "pil/circuits.hpp"
#include "pil/numerics.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace pil {

struct MetricRecord {
    std::string name;
    double value = 0.0;
    double t0 = 0.0;
    double t1 = 0.0;
    double W_goal = 0.0;
    double I_irr = 0.0;
    double I_preserved = 0.0;
};

double intelligence(double W_goal, double I_irr);

// Ratio of integrals over equal-width samples; never the mean of ratios.
double cumulative_intelligence(const std::vector<double>& work_rate,
                               const std::vector<double>& irr_rate, double dt);

double consciousness(double W_goal, double I_preserved);

double emergence_index(double chi_coupled, double chi_separable);

struct CheckResult {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    bool satisfied = false;
    double slack = 0.0;
    std::uint64_t seed = 0;
    std::string detail;
};

struct TurResult {
    CheckResult check;
    bool lhs_infinite = false;
    double eps_stat = 0.0;
};

// lhs = Var(J)/E[J]^2, rhs = 2 alpha / Sigma. eps_stat is twice the bootstrap
// relative standard deviation of lhs.
TurResult tur_check(const std::vector<double>& currents, double sigma_T, double alpha,
                    std::uint64_t seed, int bootstrap = 200);

// Net displacement after N steps of a lazy walk (+1 w.p. p, -1 w.p. q).
std::vector<double> biased_walk_currents(double p, double q, long N, int M, SeededRng& rng);

inline double walk_entropy_production(double p, double q, long N) {
    return p == q ? 0.0 : static_cast<double>(N) * (p - q) * std::log(p / q);
}

// y | z ~ N(m(z), sigma^2). The score is reported through `score_scale`, which
// is 1 for honest channels; the corrupted preset under-reports it.
struct ScalarChannel {
    std::string name;
    std::function<double(double)> mean;
    std::function<double(double)> dmean;
    double sigma = 1.0;
    double score_scale = 1.0;

    double density(double y, double z) const;
    double score(double y, double z) const;
};

ScalarChannel linear_gaussian_channel(double sigma);
ScalarChannel logistic_channel(double amplitude, double slope, double centre, double sigma);
ScalarChannel corrupted_channel(ScalarChannel base, double score_scale);

struct DiscretePrior {
    std::vector<double> z;
    std::vector<double> w;
};

// Gauss-Hermite discretization of N(0, tau^2).
DiscretePrior gaussian_prior(double tau, int nodes);

// Gauss-Legendre nodes/weights on [-1, 1] (Golub-Welsch).
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

struct TraceBoundResult {
    double c_t = 0.0;            // I(Z; Y) in nats
    double half_trace_G = 0.0;   // the universal bound
    double spread_fisher = 0.0;  // tr(Sigma_Z Fbar)/2 = tr(G)/4, tight form
    double tightness = 0.0;      // c_t / spread_fisher
    double eps_num = 0.0;
    bool satisfied = false;
};

// Fisher information F(z) = E[score^2] by quadrature over y.
double fisher_information(const ScalarChannel& ch, double z);

double mutual_information(const ScalarChannel& ch, const DiscretePrior& prior);

TraceBoundResult trace_bound_check(const ScalarChannel& ch, const DiscretePrior& prior);

struct PowerSample {
    double t = 0.0;
    double dt = 0.0;
    double W_dot = 0.0;  // power delivered by the system
    double I_dot = 0.0;  // irreversible information rate, nats per time
    double F_dot = 0.0;  // system free-energy rate
    double S_dot = 0.0;  // entropy production rate
    double tol = 0.0;    // absolute tolerance on the power balance
};

struct PowerBoundResult {
    double lhs_power = 0.0; // time-averaged W_dot
    double rhs_power = 0.0; // time-averaged kT I_dot - F_dot - T S_dot
    double min_slack = 0.0; // min over samples of rhs - lhs + tol
    long violations = 0;
    bool satisfied = false;
};

PowerBoundResult power_bound_check(const std::vector<PowerSample>& series, double T_env);

// Builds the power series from a Langevin report. I_irr (nats) is spread over
// intervals in proportion to the drop of logical entropy.
std::vector<PowerSample> power_series(const BitFlipReport& rep, double T_env, double I_irr);

PowerBoundResult classical_bound_check(const BitFlipReport& rep, double T_env, double I_irr);

struct SafetyLimits {
    double chi_min = 1e-6;
    double chi_max = 1e6;
    double P_max = 10.0;
    double I_dot_max = 10.0;
    double s_crit = 10.0;
    double f_max = 10.0;
};

void validate(const SafetyLimits& l);

struct FluxSample {
    double t = 0.0;
    double W_dot = 0.0;
    double I_dot = 0.0;
    double S_prod = 0.0;
    double F_dot = 0.0;
};

struct ConstraintReport {
    std::string name;
    long count = 0;
    double first_time = -1.0;
};

struct SafetyReport {
    std::vector<ConstraintReport> constraints; // power, info_rate, entropy, free_energy, chi
    long total = 0;
    double first_violation = -1.0;
};

// Windowed chi is the ratio of windowed integrals over `window_samples`
// trailing samples; it is only checked once the window is full and the
// information integral is positive.
SafetyReport safety_monitor(const std::vector<FluxSample>& series, const SafetyLimits& limits,
                            int window_samples);

struct RecoveryResult {
    double R_T = 0.0;
    double C_T = 0.0;
    int trials = 0;
    IrreversibilityLedger ledger;
};

// Kicks the settled q-high state of a flip-flop by |delta| in a uniformly
// random direction, evolves for T and reads the stored bit. Cost is the
// dissipated squared-velocity integral in excess of the unkicked baseline.
RecoveryResult recovery_probe(const CircuitGraph& flipflop, double delta, double T, int trials,
                              SeededRng& rng, const LogicalReadout& readout = {});

} // namespace pil
