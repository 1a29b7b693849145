#include "otoc/circuits.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace otoc::circuits {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Bond layer types; schedules are documented in docs/circuit_patterns.md.
enum class LayerKind { A, B, C, D, even_1d, odd_1d };

std::vector<std::pair<GridPos, GridPos>> layer_bonds(const QubitGrid& g, LayerKind k) {
    std::vector<std::pair<GridPos, GridPos>> out;
    switch (k) {
        case LayerKind::A:
        case LayerKind::B: {
            int par = (k == LayerKind::A) ? 0 : 1;
            for (int r = 0; r < g.rows(); ++r)
                for (int c = par; c + 1 < g.cols(); c += 2)
                    out.push_back({{r, c}, {r, c + 1}});
            break;
        }
        case LayerKind::C:
        case LayerKind::D: {
            int par = (k == LayerKind::C) ? 0 : 1;
            for (int r = par; r + 1 < g.rows(); r += 2)
                for (int c = 0; c < g.cols(); ++c)
                    out.push_back({{r, c}, {r + 1, c}});
            break;
        }
        case LayerKind::even_1d:
        case LayerKind::odd_1d: {
            int par = (k == LayerKind::even_1d) ? 0 : 1;
            bool row_chain = g.rows() == 1;
            int len = row_chain ? g.cols() : g.rows();
            for (int i = par; i + 1 < len; i += 2) {
                GridPos p = row_chain ? GridPos{0, i} : GridPos{i, 0};
                GridPos q = row_chain ? GridPos{0, i + 1} : GridPos{i + 1, 0};
                out.push_back({p, q});
            }
            break;
        }
    }
    return out;
}

LayerKind schedule_layer(Pattern p, int cycle /*1-based*/) {
    switch (p) {
        case Pattern::slow_scrambling: {
            static const LayerKind seq[6] = {LayerKind::A, LayerKind::C, LayerKind::A,
                                             LayerKind::C, LayerKind::B, LayerKind::D};
            return seq[(cycle - 1) % 6];
        }
        case Pattern::rapid_scrambling: {
            static const LayerKind seq[4] = {LayerKind::A, LayerKind::C, LayerKind::B,
                                             LayerKind::D};
            return seq[(cycle - 1) % 4];
        }
        case Pattern::brickwork_1d:
            return (cycle % 2 == 1) ? LayerKind::even_1d : LayerKind::odd_1d;
    }
    throw std::logic_error("unknown pattern");
}

}  // namespace

std::string pattern_name(Pattern p) {
    switch (p) {
        case Pattern::slow_scrambling: return "slow_scrambling";
        case Pattern::rapid_scrambling: return "rapid_scrambling";
        case Pattern::brickwork_1d: return "brickwork_1d";
    }
    throw std::logic_error("unknown pattern");
}

Pattern pattern_from_name(const std::string& s) {
    if (s == "slow_scrambling") return Pattern::slow_scrambling;
    if (s == "rapid_scrambling") return Pattern::rapid_scrambling;
    if (s == "brickwork_1d") return Pattern::brickwork_1d;
    throw std::invalid_argument("unknown pattern name: " + s);
}

CircuitInstance generate_instance(const QubitGrid& grid, Pattern pattern, int t, GridPos q_m,
                                  const std::vector<GridPos>& q_b, std::uint64_t seed,
                                  const GenerateOptions& opts) {
    if (t < 1) throw std::invalid_argument("generate_instance: t must be >= 1");
    if (pattern == Pattern::brickwork_1d && grid.rows() != 1 && grid.cols() != 1)
        throw std::invalid_argument("brickwork_1d requires a 1D chain grid");
    CircuitInstance inst;
    inst.grid = grid;
    inst.pattern = pattern;
    inst.seed = seed;
    inst.q_m = grid.site_id(q_m);
    for (const auto& p : q_b) {
        int id = grid.site_id(p);
        if (id == inst.q_m) throw std::invalid_argument("q_b must not contain q_m");
        inst.q_b.push_back(id);
    }
    if (inst.q_b.empty()) throw std::invalid_argument("q_b must be non-empty");

    inst.cycles.resize(static_cast<std::size_t>(t));
    for (int cyc = 1; cyc <= t; ++cyc) {
        Cycle& cy = inst.cycles[static_cast<std::size_t>(cyc - 1)];
        for (int s = 0; s < grid.n_sites(); ++s) {
            Philox rng = substream(seed, static_cast<std::uint64_t>(cyc) * 4,
                                   static_cast<std::uint64_t>(s));
            double theta;
            if (opts.theta_mode == ThetaMode::fixed_half_pi) {
                theta = 0.5 * kPi;
            } else {
                static const double choices[3] = {0.25, 0.5, 0.75};
                theta = choices[rng.below(3)] * kPi;
            }
            double phi = (2.0 * rng.uniform() - 1.0) * kPi;
            cy.sq.push_back({theta, phi, s});
        }
        for (const auto& [p, q] : layer_bonds(grid, schedule_layer(pattern, cyc))) {
            if (!grid.enabled(p) || !grid.enabled(q)) continue;
            cy.tq.push_back({opts.phase_2q, grid.site_id(p), grid.site_id(q)});
        }
    }
    return inst;
}

CircuitInstance lightcone_prune(const CircuitInstance& inst) {
    const int t = inst.t();
    const int n = inst.n();
    // Forward reachability from q_m: m_reach[c] = sites connected after cycles 1..c.
    std::vector<std::vector<bool>> m_reach(static_cast<std::size_t>(t) + 1,
                                           std::vector<bool>(static_cast<std::size_t>(n), false));
    m_reach[0][static_cast<std::size_t>(inst.q_m)] = true;
    for (int c = 1; c <= t; ++c) {
        m_reach[static_cast<std::size_t>(c)] = m_reach[static_cast<std::size_t>(c - 1)];
        for (const auto& g : inst.cycles[static_cast<std::size_t>(c - 1)].tq) {
            auto& cur = m_reach[static_cast<std::size_t>(c)];
            bool hit = m_reach[static_cast<std::size_t>(c - 1)][static_cast<std::size_t>(g.a)] ||
                       m_reach[static_cast<std::size_t>(c - 1)][static_cast<std::size_t>(g.b)];
            if (hit) {
                cur[static_cast<std::size_t>(g.a)] = true;
                cur[static_cast<std::size_t>(g.b)] = true;
            }
        }
    }
    // Backward reachability from q_b: b_reach[c] = sites connected through cycles c+1..t.
    std::vector<std::vector<bool>> b_reach(static_cast<std::size_t>(t) + 1,
                                           std::vector<bool>(static_cast<std::size_t>(n), false));
    for (int s : inst.q_b) b_reach[static_cast<std::size_t>(t)][static_cast<std::size_t>(s)] = true;
    for (int c = t - 1; c >= 0; --c) {
        b_reach[static_cast<std::size_t>(c)] = b_reach[static_cast<std::size_t>(c + 1)];
        for (const auto& g : inst.cycles[static_cast<std::size_t>(c)].tq) {
            auto& cur = b_reach[static_cast<std::size_t>(c)];
            bool hit = b_reach[static_cast<std::size_t>(c + 1)][static_cast<std::size_t>(g.a)] ||
                       b_reach[static_cast<std::size_t>(c + 1)][static_cast<std::size_t>(g.b)];
            if (hit) {
                cur[static_cast<std::size_t>(g.a)] = true;
                cur[static_cast<std::size_t>(g.b)] = true;
            }
        }
    }
    CircuitInstance out = inst;
    for (int c = 1; c <= t; ++c) {
        auto& tq = out.cycles[static_cast<std::size_t>(c - 1)].tq;
        std::vector<TwoQubitGate> kept;
        for (const auto& g : tq) {
            bool m_hit = m_reach[static_cast<std::size_t>(c - 1)][static_cast<std::size_t>(g.a)] ||
                         m_reach[static_cast<std::size_t>(c - 1)][static_cast<std::size_t>(g.b)];
            bool b_hit = b_reach[static_cast<std::size_t>(c)][static_cast<std::size_t>(g.a)] ||
                         b_reach[static_cast<std::size_t>(c)][static_cast<std::size_t>(g.b)];
            if (m_hit && b_hit) kept.push_back(g);
        }
        tq = std::move(kept);
    }
    return out;
}

Eigen::Matrix2cd sq_matrix(const SingleQubitGate& g) {
    using namespace std::complex_literals;
    double c = std::cos(g.theta / 2), s = std::sin(g.theta / 2);
    Eigen::Matrix2cd m;
    m << c, -1i * s * std::exp(-1i * g.phi), -1i * s * std::exp(1i * g.phi), c;
    return m;
}

Eigen::Matrix4cd tq_matrix(const TwoQubitGate& g) {
    using namespace std::complex_literals;
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    m(0, 0) = 1.0;
    m(1, 2) = -1i;
    m(2, 1) = -1i;
    m(3, 3) = std::exp(-1i * g.phase);
    return m;
}

InverseSequence invert_two_qubit_gate(const TwoQubitGate& g) {
    return InverseSequence{g.phase / kPi, g};
}

Eigen::Matrix4cd compose_inverse_sequence(const InverseSequence& s) {
    using namespace std::complex_literals;
    // basis order |q_a q_b> = |00>,|01>,|10>,|11>, qubit b is the low bit
    Eigen::Matrix4cd zb = Eigen::Matrix4cd::Identity();
    std::complex<double> ph = std::exp(1i * kPi * s.z_power);
    zb(1, 1) = ph;
    zb(3, 3) = ph;
    Eigen::Matrix4cd xa = Eigen::Matrix4cd::Zero();
    xa(0, 2) = xa(2, 0) = xa(1, 3) = xa(3, 1) = 1.0;
    Eigen::Matrix4cd xb = Eigen::Matrix4cd::Zero();
    xb(0, 1) = xb(1, 0) = xb(2, 3) = xb(3, 2) = 1.0;
    return xb * tq_matrix(s.gate) * xa * zb;
}

void validate_plan(const CircuitInstance& inst, const PauliInsertionPlan& plan) {
    for (int c : plan.cut_cycles)
        if (c < 0 || c > inst.t()) throw std::out_of_range("insertion cut cycle out of range");
    if (plan.mode == CutMode::single_site && (plan.site < 0 || plan.site >= inst.n()))
        throw std::out_of_range("insertion site out of range");
}

std::vector<PauliLayer> sample_insertion_layers(const CircuitInstance& inst,
                                                const PauliInsertionPlan& plan,
                                                std::uint64_t seed) {
    validate_plan(inst, plan);
    std::vector<PauliLayer> layers;
    for (int c : plan.cut_cycles) {
        PauliLayer lay;
        lay.symbols.assign(static_cast<std::size_t>(inst.n()), PauliSym::I);
        if (plan.mode == CutMode::full_cut) {
            for (int s = 0; s < inst.n(); ++s) {
                Philox rng = substream(seed, static_cast<std::uint64_t>(c) * 4 + 1,
                                       static_cast<std::uint64_t>(s));
                lay.symbols[static_cast<std::size_t>(s)] = static_cast<PauliSym>(rng.below(4));
            }
        } else {
            Philox rng = substream(seed, static_cast<std::uint64_t>(c) * 4 + 1,
                                   static_cast<std::uint64_t>(plan.site));
            lay.symbols[static_cast<std::size_t>(plan.site)] = static_cast<PauliSym>(rng.below(4));
        }
        layers.push_back(std::move(lay));
    }
    return layers;
}

CircuitInstance apply_pauli_layers(const CircuitInstance& inst, const PauliInsertionPlan& plan,
                                   const std::vector<PauliLayer>& layers) {
    validate_plan(inst, plan);
    if (layers.size() != plan.cut_cycles.size())
        throw std::invalid_argument("apply_pauli_layers: layer count mismatch");
    CircuitInstance out = inst;
    auto merge_into = [&](std::optional<PauliLayer>& slot, const PauliLayer& layer) {
        if (!slot) {
            slot = layer;
            return;
        }
        for (int s = 0; s < inst.n(); ++s)
            slot->symbols[static_cast<std::size_t>(s)] = sym_product(
                slot->symbols[static_cast<std::size_t>(s)], layer.symbols[static_cast<std::size_t>(s)]);
    };
    for (std::size_t i = 0; i < layers.size(); ++i) {
        int c = plan.cut_cycles[i];
        if (c == 0)
            merge_into(out.pre, layers[i]);
        else
            merge_into(out.cycles[static_cast<std::size_t>(c - 1)].ins, layers[i]);
    }
    return out;
}

CircuitInstance apply_pauli_insertion(const CircuitInstance& inst, const PauliInsertionPlan& plan,
                                      std::uint64_t seed) {
    return apply_pauli_layers(inst, plan, sample_insertion_layers(inst, plan, seed));
}

using json = nlohmann::ordered_json;

std::string serialize(const CircuitInstance& inst) {
    json j;
    j["grid"]["rows"] = inst.grid.rows();
    j["grid"]["cols"] = inst.grid.cols();
    j["grid"]["disabled"] = json::array();
    for (const auto& p : inst.grid.disabled()) j["grid"]["disabled"].push_back({p.r, p.c});
    j["pattern"] = pattern_name(inst.pattern);
    j["seed"] = inst.seed;
    j["t"] = inst.t();
    GridPos m = inst.grid.position(inst.q_m);
    j["q_m"] = {m.r, m.c};
    j["q_b"] = json::array();
    for (int b : inst.q_b) {
        GridPos p = inst.grid.position(b);
        j["q_b"].push_back({p.r, p.c});
    }
    if (inst.pre && !inst.pre->trivial()) {
        std::string s;
        for (auto sym : inst.pre->symbols) s.push_back(pauli_char(sym));
        j["pre"] = s;
    }
    j["cycles"] = json::array();
    for (const auto& cy : inst.cycles) {
        json jc;
        jc["sq"] = json::array();
        for (const auto& g : cy.sq) {
            GridPos p = inst.grid.position(g.site);
            jc["sq"].push_back({{"site", {p.r, p.c}}, {"theta", g.theta}, {"phi", g.phi}});
        }
        jc["tq"] = json::array();
        for (const auto& g : cy.tq) {
            GridPos pa = inst.grid.position(g.a), pb = inst.grid.position(g.b);
            jc["tq"].push_back({{"sites", {{pa.r, pa.c}, {pb.r, pb.c}}}, {"phase", g.phase}});
        }
        if (cy.ins && !cy.ins->trivial()) {
            std::string s;
            for (auto sym : cy.ins->symbols) s.push_back(pauli_char(sym));
            jc["ins"] = s;
        }
        j["cycles"].push_back(std::move(jc));
    }
    return j.dump();
}

namespace {
[[noreturn]] void schema_error(const std::string& field, const std::string& what) {
    throw std::invalid_argument("circuit schema error at '" + field + "': " + what);
}

GridPos read_pos(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
        schema_error(field, "expected [row, col]");
    return {j[0].get<int>(), j[1].get<int>()};
}

PauliLayer read_layer(const std::string& s, int n, const std::string& field) {
    if (static_cast<int>(s.size()) != n) schema_error(field, "length must equal site count");
    PauliLayer lay;
    for (char ch : s) {
        switch (ch) {
            case 'I': lay.symbols.push_back(PauliSym::I); break;
            case 'X': lay.symbols.push_back(PauliSym::X); break;
            case 'Y': lay.symbols.push_back(PauliSym::Y); break;
            case 'Z': lay.symbols.push_back(PauliSym::Z); break;
            default: schema_error(field, "symbols must be I/X/Y/Z");
        }
    }
    return lay;
}
}  // namespace

CircuitInstance deserialize(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("circuit parse error: ") + e.what());
    }
    if (!j.contains("grid")) schema_error("grid", "missing");
    const auto& jg = j["grid"];
    if (!jg.contains("rows") || !jg.contains("cols")) schema_error("grid", "missing rows/cols");
    std::vector<GridPos> disabled;
    if (jg.contains("disabled"))
        for (const auto& d : jg["disabled"]) disabled.push_back(read_pos(d, "grid.disabled"));
    QubitGrid grid(jg["rows"].get<int>(), jg["cols"].get<int>(), disabled);

    CircuitInstance inst;
    inst.grid = grid;
    if (!j.contains("pattern")) schema_error("pattern", "missing");
    inst.pattern = pattern_from_name(j["pattern"].get<std::string>());
    inst.seed = j.value("seed", std::uint64_t{0});
    if (!j.contains("q_m")) schema_error("q_m", "missing");
    inst.q_m = grid.site_id(read_pos(j["q_m"], "q_m"));
    if (!j.contains("q_b")) schema_error("q_b", "missing");
    for (const auto& b : j["q_b"]) inst.q_b.push_back(grid.site_id(read_pos(b, "q_b")));
    if (j.contains("pre")) inst.pre = read_layer(j["pre"].get<std::string>(), grid.n_sites(), "pre");
    if (!j.contains("cycles")) schema_error("cycles", "missing");
    int ci = 0;
    for (const auto& jc : j["cycles"]) {
        ++ci;
        std::string where = "cycles[" + std::to_string(ci - 1) + "]";
        Cycle cy;
        if (!jc.contains("sq")) schema_error(where + ".sq", "missing");
        for (const auto& jq : jc["sq"]) {
            if (!jq.contains("site") || !jq.contains("theta") || !jq.contains("phi"))
                schema_error(where + ".sq", "each entry needs site/theta/phi");
            SingleQubitGate g;
            g.site = grid.site_id(read_pos(jq["site"], where + ".sq.site"));
            g.theta = jq["theta"].get<double>();
            g.phi = jq["phi"].get<double>();
            cy.sq.push_back(g);
        }
        if (!jc.contains("tq")) schema_error(where + ".tq", "missing");
        for (const auto& jq : jc["tq"]) {
            if (!jq.contains("sites") || !jq.contains("phase"))
                schema_error(where + ".tq", "each entry needs sites/phase");
            const auto& js = jq["sites"];
            if (!js.is_array() || js.size() != 2) schema_error(where + ".tq.sites", "need 2 sites");
            TwoQubitGate g;
            g.a = grid.site_id(read_pos(js[0], where + ".tq.sites"));
            g.b = grid.site_id(read_pos(js[1], where + ".tq.sites"));
            g.phase = jq["phase"].get<double>();
            if (!grid.adjacent(g.a, g.b)) schema_error(where + ".tq.sites", "sites not adjacent");
            cy.tq.push_back(g);
        }
        if (jc.contains("ins"))
            cy.ins = read_layer(jc["ins"].get<std::string>(), grid.n_sites(), where + ".ins");
        // layer disjointness check
        std::set<int> used;
        for (const auto& g : cy.tq) {
            if (used.count(g.a) || used.count(g.b))
                schema_error(where + ".tq", "two-qubit gates overlap within a layer");
            used.insert(g.a);
            used.insert(g.b);
        }
        inst.cycles.push_back(std::move(cy));
    }
    return inst;
}

std::vector<GateRef> all_two_qubit_gates(const CircuitInstance& inst) {
    std::vector<GateRef> out;
    for (int c = 1; c <= inst.t(); ++c)
        for (int i = 0; i < static_cast<int>(inst.cycles[static_cast<std::size_t>(c - 1)].tq.size());
             ++i)
            out.push_back({c, i});
    return out;
}

CircuitInstance with_gate_phase(const CircuitInstance& inst, GateRef ref, double phase) {
    CircuitInstance out = inst;
    out.cycles.at(static_cast<std::size_t>(ref.cycle - 1))
        .tq.at(static_cast<std::size_t>(ref.index))
        .phase = phase;
    return out;
}

CircuitInstance without_gate(const CircuitInstance& inst, GateRef ref) {
    CircuitInstance out = inst;
    auto& tq = out.cycles.at(static_cast<std::size_t>(ref.cycle - 1)).tq;
    tq.erase(tq.begin() + ref.index);
    return out;
}

}  // namespace otoc::circuits
