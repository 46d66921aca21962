#include "pil/circuits.hpp"
#include "pil/error.hpp"
#include "pil/suites.hpp"

#include <doctest.h>

#include <cmath>

using namespace pil;

namespace {

Labels settle(const CircuitGraph& g, PortValues in) { return settle_and_read(g, in, LogicalReadout{}).labels; }

int bisect_fixed_point(double drive, double gain) {
    // x = sigma(gain * drive) for a node without self-coupling; bisection on
    // f(x) = x - sigma is overkill but keeps the oracle independent.
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (mid - 1.0 / (1.0 + std::exp(-gain * drive)) > 0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi) < 0.5 ? 0 : 1;
}

} // namespace

TEST_CASE("NOT with w = 8, b = 4 in unit gain") {
    GateParams p;
    p.gain = 1.0;
    p.w_not = 8.0;
    p.b_not = 4.0;
    const auto g = build_gate(GateKind::NOT, p);
    CHECK(settle(g, {{"a", 1.0}}).at("out") == 0);
    CHECK(settle(g, {{"a", 0.0}}).at("out") == 1);
}

TEST_CASE("AND is high only at (1,1)") {
    const auto g = build_gate(GateKind::AND);
    for (int a = 0; a <= 1; ++a)
        for (int b = 0; b <= 1; ++b) CHECK(settle(g, {{"a", a}, {"b", b}}).at("out") == (a && b));
}

TEST_CASE("XOR truth table") {
    const auto g = build_gate(GateKind::XOR);
    CHECK(settle(g, {{"a", 0}, {"b", 0}}).at("out") == 0);
    CHECK(settle(g, {{"a", 0}, {"b", 1}}).at("out") == 1);
    CHECK(settle(g, {{"a", 1}, {"b", 0}}).at("out") == 1);
    CHECK(settle(g, {{"a", 1}, {"b", 1}}).at("out") == 0);
}

TEST_CASE("settle and read") {
    CHECK(settle(build_gate(GateKind::NOT), {{"a", 0}}).at("out") == 1);
    const auto org = build_gate(GateKind::OR);
    CHECK(settle(org, {{"a", 0}, {"b", 0}}).at("out") == 0);
    CHECK(settle(org, {{"a", 1}, {"b", 0}}).at("out") == 1);

    SUBCASE("AND between the degenerate corners matches the scalar fixed point") {
        GateParams p;
        const LogicalReadout r;
        const auto g = build_gate(GateKind::AND, p, r);
        const auto s = settle_and_read(g, {{"a", 1}, {"b", 0}}, r);
        CHECK(s.labels.at("out") == bisect_fixed_point(p.w1 - p.theta_and, p.gain));
        CHECK(s.labels.at("out") == 0);
        CHECK(s.settle_time < r.t_max);
        CHECK(s.state[0] == doctest::Approx(1.0 / (1.0 + std::exp(-p.gain * (p.w1 - p.theta_and)))).epsilon(1e-3));
    }
}

TEST_CASE("flip-flop") {
    const GatesConfig gc;
    const auto g = build_gate(GateKind::FLIPFLOP, gc.params, gc.readout);
    SUBCASE("set then hold") {
        const auto f = flipflop_check(gc, 0.0, 1);
        CHECK(f.hold_ok);
        CHECK(f.settle_time * 10.0 < gc.hold);
        CHECK(f.pass);
    }
    SUBCASE("set then reset") {
        const auto run = run_flipflop(g, {Pulse{0.0, gc.pulse, "set", 1.0}, Pulse{30.0, gc.pulse, "reset", 1.0}},
                                      gc.readout, 60.0, Vec::Zero(g.dim()));
        CHECK(run.after_pulse == std::vector<int>{1, 0});
    }
    SUBCASE("perturbed symmetric start falls to the A-high attractor") {
        Vec x0 = Vec::Zero(g.dim());
        x0[0] += 1e-3;
        const auto run = run_flipflop(g, {}, gc.readout, 50.0, x0);
        CHECK(run.samples.back().bit == 1);
        CHECK(run.final_state[0] > gc.readout.high_min);
    }
    SUBCASE("exactly symmetric start is ambiguous") {
        CHECK_THROWS_AS(run_flipflop(g, {}, gc.readout, 10.0, Vec::Zero(g.dim())), Error);
    }
}

TEST_CASE("truth-table verification") {
    const LogicalReadout r;
    CHECK(verify_truth_table(build_gate(GateKind::NOT), truth_table(GateKind::NOT), r).pass);
    const auto rep = verify_truth_table(build_gate(GateKind::AND), truth_table(GateKind::OR), r);
    CHECK_FALSE(rep.pass);
    bool saw_10 = false;
    for (const auto& ce : rep.counterexamples) saw_10 = saw_10 || (ce.inputs.at("a") == 1 && ce.inputs.at("b") == 0);
    CHECK(saw_10);
    CHECK(verify_truth_table(build_gate(GateKind::NAND), truth_table(GateKind::NAND), r).pass);
}

TEST_CASE("gate suite passes clean and with noise") {
    const auto s = gate_suite(GatesConfig{}, 1);
    CHECK(s.gates.size() == 12);
    CHECK(s.flipflop.size() == 2);
    CHECK(s.pass);
}

TEST_CASE("circuit text format round trip") {
    const auto g = parse_circuit(R"(
# two-node relay
node a activation bias=-0.5 gain=20
node b activation bias=-0.5 gain=20
edge a b 1.0
input x a 1.0
encoding out b
)");
    CHECK(g.dim() == 2);
    CHECK(settle(g, {{"x", 1.0}}).at("out") == 1);
    CHECK(settle(g, {{"x", 0.0}}).at("out") == 0);
}
