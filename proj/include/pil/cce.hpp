#pragma once

#include "pil/numerics.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace pil {

struct EncodingSpace {
    int labels = 0;
    // Returns the label, or nullopt when p sits in the boundary band.
    std::function<std::optional<int>(const Vec& p, double control)> classify;
    double alpha = 1.0;
    std::vector<double> priors;
};

// Throws BoundaryState inside the band.
int classify_basin(const EncodingSpace& space, const Vec& p, double control);

// Two labels split by the sign of coordinate `index`, band |x| < band.
EncodingSpace sign_space(int index, double band, double alpha = 1.0);

// Overdamped double well U = a p^4 - b p^2 - c C p.
//
// The control term carries a minus sign so that negative C favours the left
// well (basin 0) and the sinusoidal schedule carries the state from basin 0
// to basin 1, as the protocol is described in words.
struct DoubleWellParams {
    double a = 1.0;
    double b = 2.0;
    double c = 1.0;
    double C_max = 2.0;
    double gamma = 1.0;
    double D = 0.25;           // diffusion; k_B T = D * gamma
    double dt = 2e-3;
    int hist_bins = 128;
    int checkpoints = 64;
    double band_frac = 0.05;   // boundary band as a fraction of the well separation
    double t_return = 8.0;     // erasure: duration of the un-tilt back to C = 0
    int threads = 1;

    double kT() const { return D * gamma; }
    double potential(double p, double C) const { return a * p * p * p * p - b * p * p - c * C * p; }
    double force(double p, double C) const { return -(4.0 * a * p * p * p - 2.0 * b * p - c * C); }
    double barrier() const { return b * b / (4.0 * a); }
    double well_position() const;
};

void validate(const DoubleWellParams& p);

// Boundary follows the barrier top when the tilted landscape is bistable,
// otherwise the neutral separatrix p = 0.
EncodingSpace double_well_space(const DoubleWellParams& params);

enum class LedgerKind { Merge, Jump, Export };

const char* to_string(LedgerKind k);

struct LedgerEntry {
    double time = 0.0;
    LedgerKind kind = LedgerKind::Jump;
    double entropy_nats = 0.0;
    std::vector<int> labels_before;
    std::vector<int> labels_after;
};

class IrreversibilityLedger {
public:
    // Entropy is -alpha sum p ln p over the merged labels' renormalized weights.
    void add_merge(double time, std::vector<int> merged, const std::vector<double>& weights,
                   int into, double alpha);
    void add_jump(double time, int from, int to);
    void add_export(double time, double nats);

    const std::vector<LedgerEntry>& entries() const { return entries_; }
    double total_entropy() const;
    std::size_t count(LedgerKind kind) const;
    void append(const IrreversibilityLedger& other);

private:
    void push(LedgerEntry e);
    std::vector<LedgerEntry> entries_;
};

double merge_entropy(const std::vector<double>& probs, double alpha);

struct PathLength {
    long count = 0;
    IrreversibilityLedger ledger;
};

// Boundary samples hold the previous label; a leading boundary run takes the
// first resolved label.
PathLength encoding_path_length(const Trajectory& traj, const EncodingSpace& space,
                                const std::vector<double>& controls);

double preserved_information(const IrreversibilityLedger& ledger, const EncodingSpace& space,
                             double t0, double t1);

struct ThermoCheckpoint {
    double t = 0.0;
    double control = 0.0;
    double work = 0.0;        // cumulative work on the system, ensemble mean
    double heat = 0.0;        // cumulative heat into the environment
    double energy = 0.0;      // mean U
    double entropy = 0.0;     // histogram differential entropy, nats
    double label_entropy = 0.0;
    double occupancy1 = 0.0;  // fraction with p > 0
};

struct BitFlipReport {
    int trials = 0;
    double T_protocol = 0.0;
    double kT = 0.0;
    double success_prob = 0.0;
    double work_total = 0.0;
    double work_se = 0.0;
    double heat_env = 0.0;
    double heat_se = 0.0;
    double dU_sys = 0.0;
    double dS_sys = 0.0;
    double dF_eq = 0.0;
    double dissipated_work = 0.0;
    double first_law_residual = 0.0;
    double first_law_se = 0.0;
    double label_entropy_initial = 0.0;
    double label_entropy_final = 0.0;
    std::vector<ThermoCheckpoint> series;
    // Standard error of the first-law residual accumulated within each
    // checkpoint interval (size = series.size() - 1).
    std::vector<double> interval_residual_se;
    // Standard error of the work done within each checkpoint interval.
    std::vector<double> interval_work_se;
};

enum class ErasureStart { Equiprobable, Basin0, Basin1 };

// Protocol C_t = C_max sin(pi t / T - pi / 2), started in basin 0.
BitFlipReport simulate_bitflip(const DoubleWellParams& params, double T_protocol, int trials,
                               const SeededRng& rng);

// Tilt C = C_max sin(pi t / 2T) over T, then relax back to C = 0 over
// params.t_return (fast against hopping, slow against in-well relaxation).
BitFlipReport simulate_erasure(const DoubleWellParams& params, double T_protocol, int trials,
                               const SeededRng& rng,
                               ErasureStart start = ErasureStart::Equiprobable);

// -kT ln Z(C) by quadrature.
double equilibrium_free_energy(const DoubleWellParams& params, double C);

// Landauer bound with residual logical entropy: kT (H_initial - H_final).
double landauer_bound(const BitFlipReport& rep);

double binary_entropy(double p);

} // namespace pil
