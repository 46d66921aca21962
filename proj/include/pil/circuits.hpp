#pragma once

#include "pil/cce.hpp"
#include "pil/numerics.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pil {

enum class NodeKind { LeakyIntegrator, Activation, PhaseOscillator };

const char* to_string(NodeKind k);

struct NodeSpec {
    std::string name;
    NodeKind kind = NodeKind::Activation;
    double alpha = 1.0;    // integrator leak
    double bias = 0.0;     // activation offset (integrator: constant drive)
    double gain = 20.0;    // logistic gain k in sigma(z) = 1 / (1 + exp(-k z))
    double omega = 1.0;    // oscillator natural frequency
    double coupling = 0.0; // oscillator forcing strength
};

struct Edge {
    int src = 0;
    int dst = 0;
    double weight = 0.0;
};

enum class PortType { Input, Output, Encoding, Context };

const char* to_string(PortType t);

struct PortTap {
    int node = 0;
    double weight = 1.0;
};

struct Port {
    std::string name;
    PortType type = PortType::Input;
    // Input/context: each tap injects weight * value into the node's sum.
    // Output/encoding: a single tap naming the observed node.
    std::vector<PortTap> taps;
};

using PortValues = std::map<std::string, double>;
using Labels = std::map<std::string, int>;

struct CircuitGraph {
    std::string name;
    std::vector<NodeSpec> nodes;
    std::vector<Edge> edges;
    std::vector<Port> ports;

    int dim() const { return static_cast<int>(nodes.size()); }
    int node_index(const std::string& n) const;
    const Port& port(const std::string& n) const;
    std::vector<std::string> port_names(PortType t) const;

    // Time derivative with the given port values clamped.
    Vec derivative(const Vec& x, const PortValues& inputs) const;
};

// Rejects dangling references, port/type mismatches and duplicate names.
void validate(const CircuitGraph& g);

double logistic(double z, double gain);

struct LogicalReadout {
    double low_max = 0.2;
    double high_min = 0.8;
    double t_max = 50.0;
    double window = 5.0;
    double tol = 1e-4;
    double dt = 0.01;
};

void validate(const LogicalReadout& r);

// 0 for the low interval, 1 for high, nullopt in the forbidden band.
std::optional<int> read_level(double v, const LogicalReadout& r);

struct SettleResult {
    Labels labels;
    double settle_time = 0.0;
    Vec state;
};

// Integrates with inputs clamped until every encoding port stays in one
// logical interval, with spread below tol (plus a noise allowance), for a full
// window. `x0` defaults to the zero state.
SettleResult settle_and_read(const CircuitGraph& g, const PortValues& inputs,
                             const LogicalReadout& readout, const Vec* x0 = nullptr,
                             double noise = 0.0, SeededRng* rng = nullptr);

// Free evolution for `duration` with fixed inputs; adds integral of |dx/dt|^2
// to `cost` when given.
Vec evolve(const CircuitGraph& g, const Vec& x0, const PortValues& inputs, double duration,
           double dt, double noise = 0.0, SeededRng* rng = nullptr, double* cost = nullptr);

enum class GateKind { NOT, AND, OR, NAND, NOR, XOR, FLIPFLOP };

const char* to_string(GateKind k);
GateKind gate_from_string(const std::string& s);
std::vector<GateKind> all_gates();

struct GateParams {
    double w1 = 1.0;
    double w2 = 1.0;
    double theta_and = 1.5;
    double theta_or = 0.5;
    double w_not = 1.0;
    double b_not = 0.5;
    double gain = 20.0;
    double ff_self = 1.0;  // g
    double ff_cross = 1.0; // h
};

void validate(const GateParams& p);

// Gate inputs are ports "a" (and "b"); the result is encoding port "out".
// FLIPFLOP exposes inputs "set", "reset" and encodings "q" (node A) and "qbar".
CircuitGraph build_gate(GateKind kind, const GateParams& params = {},
                        const LogicalReadout& readout = {});

struct TruthRow {
    PortValues inputs;
    Labels expected;
};

std::vector<TruthRow> truth_table(GateKind kind);

struct Counterexample {
    std::size_t row = 0;
    PortValues inputs;
    Labels expected;
    Labels got;
};

struct TruthReport {
    bool pass = false;
    std::vector<Counterexample> counterexamples;
    double max_settle_time = 0.0;
};

TruthReport verify_truth_table(const CircuitGraph& g, const std::vector<TruthRow>& table,
                               const LogicalReadout& readout, double noise = 0.0,
                               SeededRng* rng = nullptr);

struct Pulse {
    double t = 0.0;
    double duration = 1.0;
    std::string port;
    double amplitude = 1.0;
};

struct BitSample {
    double t = 0.0;
    int bit = -1; // -1 while unresolved before the first readable state
};

struct FlipFlopRun {
    std::vector<BitSample> samples;   // every sample_every time units
    std::vector<int> after_pulse;     // stored bit just before the next pulse (or end)
    IrreversibilityLedger ledger;     // merges at each write, jumps on bit changes
    Vec final_state;
};

// Stored bit: 1 when q is high and qbar low, 0 for the mirror; anything else
// holds the previous bit.
FlipFlopRun run_flipflop(const CircuitGraph& g, const std::vector<Pulse>& schedule,
                         const LogicalReadout& readout, double t_end, const Vec& x0,
                         double sample_every = 0.5, double noise = 0.0,
                         SeededRng* rng = nullptr);

EncodingSpace flipflop_space();

// Plain-text circuit description; see README for the grammar.
CircuitGraph parse_circuit(const std::string& text);

} // namespace pil
