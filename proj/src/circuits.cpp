#include "pil/circuits.hpp"

#include "pil/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>

namespace pil {

const char* to_string(NodeKind k) {
    switch (k) {
    case NodeKind::LeakyIntegrator: return "integrator";
    case NodeKind::Activation: return "activation";
    case NodeKind::PhaseOscillator: return "oscillator";
    }
    return "unknown";
}

const char* to_string(PortType t) {
    switch (t) {
    case PortType::Input: return "input";
    case PortType::Output: return "output";
    case PortType::Encoding: return "encoding";
    case PortType::Context: return "context";
    }
    return "unknown";
}

double logistic(double z, double gain) {
    const double e = gain * z;
    if (e >= 0.0) return 1.0 / (1.0 + std::exp(-e));
    const double ex = std::exp(e);
    return ex / (1.0 + ex);
}

int CircuitGraph::node_index(const std::string& n) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].name == n) return static_cast<int>(i);
    fail(ErrorKind::InvalidConfig, "unknown node '" + n + "'");
}

const Port& CircuitGraph::port(const std::string& n) const {
    for (const auto& p : ports)
        if (p.name == n) return p;
    fail(ErrorKind::InvalidConfig, "unknown port '" + n + "'");
}

std::vector<std::string> CircuitGraph::port_names(PortType t) const {
    std::vector<std::string> out;
    for (const auto& p : ports)
        if (p.type == t) out.push_back(p.name);
    return out;
}

Vec CircuitGraph::derivative(const Vec& x, const PortValues& inputs) const {
    const int n = dim();
    Vec drive = Vec::Zero(n);
    for (const auto& e : edges) drive[e.dst] += e.weight * x[e.src];
    for (const auto& [name, value] : inputs) {
        const Port& p = port(name);
        if (p.type != PortType::Input && p.type != PortType::Context)
            fail(ErrorKind::InvalidConfig, "port '" + name + "' does not accept values");
        for (const auto& tap : p.taps) drive[tap.node] += tap.weight * value;
    }
    Vec dx(n);
    for (int i = 0; i < n; ++i) {
        const NodeSpec& s = nodes[static_cast<std::size_t>(i)];
        switch (s.kind) {
        case NodeKind::Activation:
            dx[i] = -x[i] + logistic(drive[i] + s.bias, s.gain);
            break;
        case NodeKind::LeakyIntegrator:
            dx[i] = -s.alpha * x[i] + drive[i] + s.bias;
            break;
        case NodeKind::PhaseOscillator:
            dx[i] = s.omega + s.coupling * drive[i] * std::cos(x[i]);
            break;
        }
    }
    return dx;
}

void validate(const CircuitGraph& g) {
    const int n = g.dim();
    std::set<std::string> names;
    for (const auto& s : g.nodes) {
        if (s.name.empty() || !names.insert(s.name).second)
            fail(ErrorKind::InvalidConfig, "node names must be unique and nonempty");
        if (s.kind == NodeKind::LeakyIntegrator && !(s.alpha > 0))
            fail(ErrorKind::InvalidConfig, "integrator '" + s.name + "' needs alpha > 0");
        if (s.kind == NodeKind::Activation && !(s.gain > 0))
            fail(ErrorKind::InvalidConfig, "activation '" + s.name + "' needs gain > 0");
        if (s.kind == NodeKind::PhaseOscillator && !(s.omega > 0))
            fail(ErrorKind::InvalidConfig, "oscillator '" + s.name + "' needs omega > 0");
    }
    for (const auto& e : g.edges)
        if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n)
            fail(ErrorKind::InvalidConfig, "edge references a missing node");
    std::set<std::string> pnames;
    for (const auto& p : g.ports) {
        if (p.name.empty() || !pnames.insert(p.name).second)
            fail(ErrorKind::InvalidConfig, "port names must be unique and nonempty");
        if (p.taps.empty()) fail(ErrorKind::InvalidConfig, "port '" + p.name + "' has no taps");
        for (const auto& t : p.taps)
            if (t.node < 0 || t.node >= n)
                fail(ErrorKind::InvalidConfig, "port '" + p.name + "' references a missing node");
        const bool observed = p.type == PortType::Output || p.type == PortType::Encoding;
        if (observed && p.taps.size() != 1)
            fail(ErrorKind::InvalidConfig, "observed port '" + p.name + "' must name one node");
    }
}

void validate(const LogicalReadout& r) {
    if (!(0.0 <= r.low_max && r.low_max < r.high_min))
        fail(ErrorKind::InvalidConfig, "readout needs 0 <= low_max < high_min");
    if (!(r.t_max > 0 && r.window > 0 && r.window < r.t_max && r.tol > 0 && r.dt > 0))
        fail(ErrorKind::InvalidConfig, "readout needs 0 < window < t_max, tol > 0, dt > 0");
}

std::optional<int> read_level(double v, const LogicalReadout& r) {
    if (v <= r.low_max) return 0;
    if (v >= r.high_min) return 1;
    return std::nullopt;
}

namespace {

Vec rk4_step(const CircuitGraph& g, const Vec& x, const PortValues& in, double dt) {
    const Vec k1 = g.derivative(x, in);
    const Vec k2 = g.derivative(x + 0.5 * dt * k1, in);
    const Vec k3 = g.derivative(x + 0.5 * dt * k2, in);
    const Vec k4 = g.derivative(x + dt * k3, in);
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Vec advance(const CircuitGraph& g, const Vec& x, const PortValues& in, double dt, double noise,
            SeededRng* rng, long step_index) {
    Vec y = rk4_step(g, x, in, dt);
    if (noise > 0.0) {
        if (!rng) fail(ErrorKind::InvalidConfig, "noisy circuit evaluation needs an rng");
        const double s = noise * std::sqrt(dt);
        for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += s * rng->gaussian();
    }
    if (!all_finite(y)) throw DivergedError(step_index, "circuit state diverged");
    return y;
}

std::string describe(const Vec& x) {
    std::ostringstream os;
    os << "[";
    for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << "]";
    return os.str();
}

} // namespace

Vec evolve(const CircuitGraph& g, const Vec& x0, const PortValues& inputs, double duration,
           double dt, double noise, SeededRng* rng, double* cost) {
    const long steps = std::max(0L, std::lround(duration / dt));
    Vec x = x0;
    for (long k = 0; k < steps; ++k) {
        if (cost) *cost += g.derivative(x, inputs).squaredNorm() * dt;
        x = advance(g, x, inputs, dt, noise, rng, k + 1);
    }
    return x;
}

SettleResult settle_and_read(const CircuitGraph& g, const PortValues& inputs,
                             const LogicalReadout& readout, const Vec* x0, double noise,
                             SeededRng* rng) {
    validate(readout);
    const auto enc_names = g.port_names(PortType::Encoding);
    if (enc_names.empty()) fail(ErrorKind::InvalidConfig, "circuit has no encoding port");
    std::vector<int> enc;
    for (const auto& n : enc_names) enc.push_back(g.port(n).taps.front().node);

    const double dt = readout.dt;
    const long max_steps = std::lround(readout.t_max / dt);
    const long win = std::max(1L, std::lround(readout.window / dt));
    // Noise widens the in-window spread; a fixed-point is still declared if
    // the spread is within a few stationary standard deviations.
    const double spread_tol = readout.tol + 8.0 * noise;

    Vec x = x0 ? *x0 : Vec::Zero(g.dim());
    if (x.size() != g.dim()) fail(ErrorKind::InvalidConfig, "initial state has wrong dimension");
    std::deque<Vec> hist;
    std::vector<int> prev_labels;
    long run = 0;

    auto labels_of = [&](const Vec& s) {
        std::vector<int> out;
        for (int node : enc) {
            const auto l = read_level(s[node], readout);
            out.push_back(l ? *l : -1);
        }
        return out;
    };

    for (long k = 0; k <= max_steps; ++k) {
        const auto lab = labels_of(x);
        const bool resolved = std::none_of(lab.begin(), lab.end(), [](int v) { return v < 0; });
        run = (resolved && lab == prev_labels) ? run + 1 : (resolved ? 1 : 0);
        prev_labels = lab;
        Vec obs(static_cast<Eigen::Index>(enc.size()));
        for (std::size_t i = 0; i < enc.size(); ++i) obs[static_cast<Eigen::Index>(i)] = x[enc[i]];
        hist.push_back(obs);
        if (static_cast<long>(hist.size()) > win + 1) hist.pop_front();

        if (run > win) {
            double spread = 0.0;
            for (Eigen::Index j = 0; j < obs.size(); ++j) {
                double lo = hist.front()[j], hi = lo;
                for (const auto& h : hist) {
                    lo = std::min(lo, h[j]);
                    hi = std::max(hi, h[j]);
                }
                spread = std::max(spread, hi - lo);
            }
            if (spread < spread_tol) {
                SettleResult r;
                for (std::size_t i = 0; i < enc.size(); ++i) r.labels[enc_names[i]] = lab[i];
                r.settle_time = static_cast<double>(k - win) * dt;
                r.state = x;
                return r;
            }
        }
        if (k < max_steps) x = advance(g, x, inputs, dt, noise, rng, k + 1);
    }
    const auto lab = labels_of(x);
    if (std::any_of(lab.begin(), lab.end(), [](int v) { return v < 0; }))
        fail(ErrorKind::NoSettle, "no settle by t_max; final state " + describe(x));
    fail(ErrorKind::NonFixedPoint, "encoding ports keep moving inside their interval; final state " +
                                       describe(x));
}

const char* to_string(GateKind k) {
    switch (k) {
    case GateKind::NOT: return "NOT";
    case GateKind::AND: return "AND";
    case GateKind::OR: return "OR";
    case GateKind::NAND: return "NAND";
    case GateKind::NOR: return "NOR";
    case GateKind::XOR: return "XOR";
    case GateKind::FLIPFLOP: return "FLIPFLOP";
    }
    return "unknown";
}

GateKind gate_from_string(const std::string& s) {
    for (GateKind k : all_gates())
        if (s == to_string(k)) return k;
    fail(ErrorKind::InvalidConfig, "unknown gate '" + s + "'");
}

std::vector<GateKind> all_gates() {
    return {GateKind::NOT, GateKind::AND, GateKind::OR, GateKind::NAND,
            GateKind::NOR, GateKind::XOR, GateKind::FLIPFLOP};
}

void validate(const GateParams& p) {
    auto bad = [](const std::string& m) { fail(ErrorKind::InvalidGateParams, m); };
    if (!(p.gain > 0)) bad("gain must be positive");
    if (!(p.w1 > 0 && p.w2 > 0)) bad("w1, w2 must be positive");
    if (!(p.theta_and > std::max(p.w1, p.w2) && p.theta_and < p.w1 + p.w2))
        bad("theta_and must lie in (max(w1, w2), w1 + w2)");
    if (!(p.theta_or > 0 && p.theta_or < std::min(p.w1, p.w2)))
        bad("theta_or must lie in (0, min(w1, w2))");
    if (!(p.w_not > 0 && p.b_not > 0 && p.b_not < p.w_not)) bad("NOT needs 0 < b < w");
    if (!(p.ff_self >= 1.0 && p.ff_cross > 0)) bad("flip-flop needs g >= 1 and h > 0");
}

namespace {

struct Builder {
    CircuitGraph g;

    int node(const std::string& name, double bias, double gain) {
        NodeSpec s;
        s.name = name;
        s.kind = NodeKind::Activation;
        s.bias = bias;
        s.gain = gain;
        g.nodes.push_back(s);
        return g.dim() - 1;
    }
    void edge(int s, int d, double w) { g.edges.push_back({s, d, w}); }
    void input(const std::string& name, std::vector<PortTap> taps) {
        for (auto& p : g.ports)
            if (p.name == name) {
                p.taps.insert(p.taps.end(), taps.begin(), taps.end());
                return;
            }
        g.ports.push_back({name, PortType::Input, std::move(taps)});
    }
    void encoding(const std::string& name, int n) { g.ports.push_back({name, PortType::Encoding, {{n, 1.0}}}); }
};

// NOT stage fed by an internal node.
int not_stage(Builder& b, const std::string& name, int src, const GateParams& p) {
    const int n = b.node(name, p.b_not, p.gain);
    b.edge(src, n, -p.w_not);
    return n;
}

void check_attractors(const CircuitGraph& g, GateKind kind, const LogicalReadout& readout) {
    if (kind == GateKind::FLIPFLOP) {
        Vec a(2), bq(2);
        a << 1.0, 0.0;
        bq << 0.0, 1.0;
        const auto ra = settle_and_read(g, {}, readout, &a);
        const auto rb = settle_and_read(g, {}, readout, &bq);
        if (ra.labels.at("q") != 1 || rb.labels.at("q") != 0)
            fail(ErrorKind::InvalidGateParams, "flip-flop is not bistable at zero input");
        return;
    }
    for (const auto& row : truth_table(kind)) {
        std::optional<Labels> first;
        for (double init : {0.0, 0.5, 1.0}) {
            const Vec x0 = Vec::Constant(g.dim(), init);
            SettleResult r;
            try {
                r = settle_and_read(g, row.inputs, readout, &x0);
            } catch (const Error& e) {
                fail(ErrorKind::InvalidGateParams,
                     std::string(to_string(kind)) + " has no clean attractor at a corner: " + e.what());
            }
            if (first && *first != r.labels)
                fail(ErrorKind::InvalidGateParams,
                     std::string(to_string(kind)) + " is multistable at an input corner");
            first = r.labels;
        }
    }
}

} // namespace

CircuitGraph build_gate(GateKind kind, const GateParams& p, const LogicalReadout& readout) {
    validate(p);
    Builder b;
    b.g.name = to_string(kind);
    switch (kind) {
    case GateKind::NOT: {
        const int n = b.node("not", p.b_not, p.gain);
        b.input("a", {{n, -p.w_not}});
        b.encoding("out", n);
        break;
    }
    case GateKind::AND:
    case GateKind::OR:
    case GateKind::NAND:
    case GateKind::NOR: {
        const bool is_and = kind == GateKind::AND || kind == GateKind::NAND;
        const double theta = is_and ? p.theta_and : p.theta_or;
        const int n = b.node(is_and ? "and" : "or", -theta, p.gain);
        b.input("a", {{n, p.w1}});
        b.input("b", {{n, p.w2}});
        int out = n;
        if (kind == GateKind::NAND || kind == GateKind::NOR) out = not_stage(b, "not", n, p);
        b.encoding("out", out);
        break;
    }
    case GateKind::XOR: {
        // XOR = AND(NAND(a, b), OR(a, b))
        const int a1 = b.node("and", -p.theta_and, p.gain);
        const int nd = not_stage(b, "nand", a1, p);
        const int o = b.node("or", -p.theta_or, p.gain);
        b.input("a", {{a1, p.w1}, {o, p.w1}});
        b.input("b", {{a1, p.w2}, {o, p.w2}});
        const int out = b.node("xor", -p.theta_and, p.gain);
        b.edge(nd, out, p.w1);
        b.edge(o, out, p.w2);
        b.encoding("out", out);
        break;
    }
    case GateKind::FLIPFLOP: {
        // x_A' = -x_A + sigma(g x_A - h x_B + I_A), and the mirror for B.
        const int A = b.node("A", 0.0, p.gain);
        const int B = b.node("B", 0.0, p.gain);
        b.edge(A, A, p.ff_self);
        b.edge(B, B, p.ff_self);
        b.edge(B, A, -p.ff_cross);
        b.edge(A, B, -p.ff_cross);
        b.input("set", {{A, 1.0}});
        b.input("reset", {{B, 1.0}});
        b.encoding("q", A);
        b.encoding("qbar", B);
        break;
    }
    }
    validate(b.g);
    check_attractors(b.g, kind, readout);
    return b.g;
}

std::vector<TruthRow> truth_table(GateKind kind) {
    std::vector<TruthRow> t;
    if (kind == GateKind::NOT) {
        t.push_back({{{"a", 0.0}}, {{"out", 1}}});
        t.push_back({{{"a", 1.0}}, {{"out", 0}}});
        return t;
    }
    if (kind == GateKind::FLIPFLOP) return t;
    for (int a = 0; a <= 1; ++a)
        for (int bb = 0; bb <= 1; ++bb) {
            int out = 0;
            switch (kind) {
            case GateKind::AND: out = a & bb; break;
            case GateKind::OR: out = a | bb; break;
            case GateKind::NAND: out = !(a & bb); break;
            case GateKind::NOR: out = !(a | bb); break;
            case GateKind::XOR: out = a ^ bb; break;
            default: break;
            }
            t.push_back({{{"a", static_cast<double>(a)}, {"b", static_cast<double>(bb)}}, {{"out", out}}});
        }
    return t;
}

TruthReport verify_truth_table(const CircuitGraph& g, const std::vector<TruthRow>& table,
                               const LogicalReadout& readout, double noise, SeededRng* rng) {
    const auto declared = g.port_names(PortType::Input);
    TruthReport rep;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto& row = table[i];
        for (const auto& name : declared)
            if (!row.inputs.count(name))
                fail(ErrorKind::InvalidConfig, "truth-table row misses input '" + name + "'");
        const auto r = settle_and_read(g, row.inputs, readout, nullptr, noise, rng);
        rep.max_settle_time = std::max(rep.max_settle_time, r.settle_time);
        Labels got;
        for (const auto& [port, _] : row.expected) got[port] = r.labels.at(port);
        if (got != row.expected) rep.counterexamples.push_back({i, row.inputs, row.expected, got});
    }
    rep.pass = rep.counterexamples.empty();
    return rep;
}

EncodingSpace flipflop_space() {
    EncodingSpace s;
    s.labels = 2;
    s.alpha = 1.0;
    s.priors = {0.5, 0.5};
    s.classify = [](const Vec& x, double) -> std::optional<int> {
        const LogicalReadout r;
        const auto q = read_level(x[0], r), qb = read_level(x[1], r);
        if (!q || !qb || *q == *qb) return std::nullopt;
        return *q;
    };
    return s;
}

FlipFlopRun run_flipflop(const CircuitGraph& g, const std::vector<Pulse>& schedule,
                         const LogicalReadout& readout, double t_end, const Vec& x0,
                         double sample_every, double noise, SeededRng* rng) {
    validate(readout);
    const int qn = g.port("q").taps.front().node;
    const int qbn = g.port("qbar").taps.front().node;
    for (const auto& p : schedule)
        if (p.port != "set" && p.port != "reset")
            fail(ErrorKind::InvalidConfig, "flip-flop pulses target 'set' or 'reset'");
    for (std::size_t i = 0; i < schedule.size(); ++i)
        for (std::size_t j = i + 1; j < schedule.size(); ++j) {
            const auto& a = schedule[i];
            const auto& b = schedule[j];
            const bool overlap = a.t < b.t + b.duration && b.t < a.t + a.duration;
            if (overlap && a.port != b.port)
                fail(ErrorKind::AmbiguousState, "set and reset pulses overlap");
        }
    const bool pulse_at_start = std::any_of(schedule.begin(), schedule.end(),
                                            [](const Pulse& p) { return p.t <= 0.0; });
    if (std::abs(x0[qn] - x0[qbn]) < 1e-12 && !pulse_at_start)
        fail(ErrorKind::AmbiguousState, "symmetric initial state has no preferred attractor");

    std::vector<Pulse> sorted = schedule;
    std::sort(sorted.begin(), sorted.end(), [](const Pulse& a, const Pulse& b) { return a.t < b.t; });

    const EncodingSpace space = flipflop_space();
    FlipFlopRun out;
    const double dt = readout.dt;
    const long steps = std::lround(t_end / dt);
    const long every = std::max(1L, std::lround(sample_every / dt));
    Vec x = x0;
    int held = -1;
    std::size_t next_pulse = 0;

    for (long k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        // A write at pulse onset merges both prior bit values into one.
        while (next_pulse < sorted.size() && sorted[next_pulse].t <= t + 1e-12) {
            if (next_pulse > 0 || k > 0) out.after_pulse.push_back(held);
            const int target = sorted[next_pulse].port == "set" ? 1 : 0;
            out.ledger.add_merge(t, {0, 1}, {0.5, 0.5}, target, space.alpha);
            ++next_pulse;
        }
        const auto l = space.classify(x, 0.0);
        if (l && *l != held) {
            if (held >= 0) out.ledger.add_jump(t, held, *l);
            held = *l;
        }
        if (k % every == 0) out.samples.push_back({t, held});
        if (k == steps) break;
        PortValues in;
        for (const auto& p : sorted)
            if (t >= p.t - 1e-12 && t < p.t + p.duration - 1e-12) in[p.port] += p.amplitude;
        x = advance(g, x, in, dt, noise, rng, k + 1);
    }
    if (!sorted.empty()) out.after_pulse.push_back(held);
    out.final_state = x;
    return out;
}

CircuitGraph parse_circuit(const std::string& text) {
    CircuitGraph g;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto err = [&](const std::string& m) {
        fail(ErrorKind::InvalidConfig, "circuit line " + std::to_string(lineno) + ": " + m);
    };
    auto number = [&](const std::string& s) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size()) err("bad number '" + s + "'");
            return v;
        } catch (const std::invalid_argument&) {
            err("bad number '" + s + "'");
        } catch (const std::out_of_range&) {
            err("number out of range '" + s + "'");
        }
        return 0.0;
    };
    std::vector<std::pair<std::string, std::vector<std::string>>> deferred;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        if (tok[0] == "name") {
            if (tok.size() != 2) err("usage: name <circuit-name>");
            g.name = tok[1];
        } else if (tok[0] == "node") {
            if (tok.size() < 3) err("usage: node <name> <activation|integrator|oscillator> [key=value...]");
            NodeSpec s;
            s.name = tok[1];
            if (tok[2] == "activation") s.kind = NodeKind::Activation;
            else if (tok[2] == "integrator") s.kind = NodeKind::LeakyIntegrator;
            else if (tok[2] == "oscillator") s.kind = NodeKind::PhaseOscillator;
            else err("unknown node kind '" + tok[2] + "'");
            for (std::size_t i = 3; i < tok.size(); ++i) {
                const auto eq = tok[i].find('=');
                if (eq == std::string::npos) err("expected key=value, got '" + tok[i] + "'");
                const std::string key = tok[i].substr(0, eq);
                const double v = number(tok[i].substr(eq + 1));
                if (key == "alpha") s.alpha = v;
                else if (key == "bias") s.bias = v;
                else if (key == "gain") s.gain = v;
                else if (key == "omega") s.omega = v;
                else if (key == "coupling") s.coupling = v;
                else err("unknown node parameter '" + key + "'");
            }
            g.nodes.push_back(s);
        } else if (tok[0] == "edge" || tok[0] == "input" || tok[0] == "context" ||
                   tok[0] == "encoding" || tok[0] == "output") {
            deferred.emplace_back(tok[0] + ":" + std::to_string(lineno), tok);
        } else {
            err("unknown directive '" + tok[0] + "'");
        }
    }
    for (const auto& [tag, tok] : deferred) {
        lineno = std::stoi(tag.substr(tag.find(':') + 1));
        auto idx = [&](const std::string& n) {
            for (std::size_t i = 0; i < g.nodes.size(); ++i)
                if (g.nodes[i].name == n) return static_cast<int>(i);
            err("unknown node '" + n + "'");
            return -1;
        };
        if (tok[0] == "edge") {
            if (tok.size() != 4) err("usage: edge <src> <dst> <weight>");
            g.edges.push_back({idx(tok[1]), idx(tok[2]), number(tok[3])});
        } else if (tok[0] == "input" || tok[0] == "context") {
            if (tok.size() != 4) err("usage: " + tok[0] + " <port> <node> <weight>");
            const PortType type = tok[0] == "input" ? PortType::Input : PortType::Context;
            auto it = std::find_if(g.ports.begin(), g.ports.end(), [&](const Port& p) { return p.name == tok[1]; });
            if (it == g.ports.end()) {
                g.ports.push_back({tok[1], type, {}});
                it = g.ports.end() - 1;
            } else if (it->type != type) {
                err("port '" + tok[1] + "' redeclared with a different type");
            }
            it->taps.push_back({idx(tok[2]), number(tok[3])});
        } else {
            if (tok.size() != 3) err("usage: " + tok[0] + " <port> <node>");
            const PortType type = tok[0] == "encoding" ? PortType::Encoding : PortType::Output;
            g.ports.push_back({tok[1], type, {{idx(tok[2]), 1.0}}});
        }
    }
    validate(g);
    return g;
}

} // namespace pil
