#include "otoc/liouville.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace otoc::liouville {

namespace {

using Eigen::Matrix2cd;
using Eigen::Matrix4cd;
using cplx = std::complex<double>;

Matrix2cd pauli_1(int s) {
    using namespace std::complex_literals;
    Matrix2cd m = Matrix2cd::Zero();
    switch (s) {
        case 0: m.setIdentity(); break;
        case 1: m << 0, 1, 1, 0; break;
        case 2: m << 0, -1i, 1i, 0; break;
        case 3: m << 1, 0, 0, -1; break;
    }
    return m;
}

Matrix4cd pauli_2(int s) {  // s = 4*s_a + s_b, qubit b = low bit of the gate index
    Matrix4cd m;
    Matrix2cd a = pauli_1(s >> 2), b = pauli_1(s & 3);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return m;
}

constexpr double kImagTol = 1e-9;

}  // namespace

GateTransfer1 gate_transfer(const circuits::SingleQubitGate& g) {
    GateTransfer1 t;
    Matrix2cd u = circuits::sq_matrix(g);
    for (int p = 0; p < 4; ++p) {
        Matrix2cd conj = u.adjoint() * pauli_1(p) * u;
        for (int q = 0; q < 4; ++q) {
            cplx v = (pauli_1(q) * conj).trace() / 2.0;
            if (std::abs(v.imag()) > kImagTol)
                throw std::logic_error("gate_transfer: non-real Pauli conjugation");
            t.m[static_cast<std::size_t>(q)][static_cast<std::size_t>(p)] = v.real();
        }
    }
    return t;
}

GateTransfer2 gate_transfer(const circuits::TwoQubitGate& g) {
    GateTransfer2 t;
    Matrix4cd u = circuits::tq_matrix(g);
    for (int p = 0; p < 16; ++p) {
        Matrix4cd conj = u.adjoint() * pauli_2(p) * u;
        for (int q = 0; q < 16; ++q) {
            cplx v = (pauli_2(q) * conj).trace() / 4.0;
            if (std::abs(v.imag()) > kImagTol)
                throw std::logic_error("gate_transfer: non-real Pauli conjugation");
            t.m[static_cast<std::size_t>(q)][static_cast<std::size_t>(p)] = v.real();
        }
    }
    return t;
}

const GateTransfer2& TransferCache::get(const circuits::TwoQubitGate& g) {
    std::uint64_t key = std::bit_cast<std::uint64_t>(g.phase);
    auto it = by_phase_bits_.find(key);
    if (it == by_phase_bits_.end()) it = by_phase_bits_.emplace(key, gate_transfer(g)).first;
    return it->second;
}

SparseOperator SparseOperator::from_pauli(const PauliString& p) {
    Map m;
    m[PauliKey{p.x, p.z}] = static_cast<double>(p.sign);
    return SparseOperator(p.n, std::move(m));
}

double SparseOperator::coeff(const PauliKey& k) const {
    auto it = terms_.find(k);
    return it == terms_.end() ? 0.0 : it->second;
}

double SparseOperator::norm_sq() const {
    // Kahan summation; term order in the map is unspecified
    double sum = 0.0, comp = 0.0;
    for (const auto& [k, v] : terms_) {
        double y = v * v - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

void SparseOperator::scale(double f) {
    for (auto& [k, v] : terms_) v *= f;
}

std::string SparseOperator::dump_top(std::size_t count) const {
    std::vector<std::pair<PauliKey, double>> v(terms_.begin(), terms_.end());
    std::sort(v.begin(), v.end(),
              [](const auto& a, const auto& b) { return std::abs(a.second) > std::abs(b.second); });
    std::ostringstream os;
    for (std::size_t i = 0; i < std::min(count, v.size()); ++i) {
        PauliString p{v[i].first.x, v[i].first.z, n_, +1};
        os << p.str() << " " << v[i].second << "\n";
    }
    return os.str();
}

namespace {

// local code from packed bits: x bit | z bit << 1 -> 0=I, 1=X, 2=Z, 3=Y
inline int sym_code(const PauliKey& k, int site) {
    return static_cast<int>(((k.x >> site) & 1u) | (((k.z >> site) & 1u) << 1));
}
// transfer matrices are indexed in I,X,Y,Z order
inline int code_to_ixyz(int code) {
    static const int map[4] = {0, 1, 3, 2};
    return map[code];
}
inline int ixyz_to_code(int idx) {
    static const int map[4] = {0, 1, 3, 2};
    return map[idx];
}
inline void set_sym_code(PauliKey& k, int site, int code) {
    std::uint64_t m = 1ull << site;
    k.x = (k.x & ~m) | ((code & 1) ? m : 0u);
    k.z = (k.z & ~m) | ((code & 2) ? m : 0u);
}

}  // namespace

void apply_gate(SparseOperator& op, const circuits::SingleQubitGate& g, const GateTransfer1& t) {
    SparseOperator::Map out;
    out.reserve(op.terms().size() * 2);
    for (const auto& [key, c] : op.terms()) {
        int p = code_to_ixyz(sym_code(key, g.site));
        for (int q = 0; q < 4; ++q) {
            double w = t.m[static_cast<std::size_t>(q)][static_cast<std::size_t>(p)];
            if (std::abs(w) < 1e-15) continue;
            PauliKey nk = key;
            set_sym_code(nk, g.site, ixyz_to_code(q));
            out[nk] += c * w;
        }
    }
    for (auto it = out.begin(); it != out.end();)
        it = (it->second == 0.0) ? out.erase(it) : std::next(it);
    op = SparseOperator(op.n(), std::move(out));
}

void apply_gate(SparseOperator& op, const circuits::TwoQubitGate& g, const GateTransfer2& t) {
    SparseOperator::Map out;
    out.reserve(op.terms().size() * 3);
    for (const auto& [key, c] : op.terms()) {
        int p = 4 * code_to_ixyz(sym_code(key, g.a)) + code_to_ixyz(sym_code(key, g.b));
        for (int q = 0; q < 16; ++q) {
            double w = t.m[static_cast<std::size_t>(q)][static_cast<std::size_t>(p)];
            if (std::abs(w) < 1e-15) continue;
            PauliKey nk = key;
            set_sym_code(nk, g.a, ixyz_to_code(q >> 2));
            set_sym_code(nk, g.b, ixyz_to_code(q & 3));
            out[nk] += c * w;
        }
    }
    for (auto it = out.begin(); it != out.end();)
        it = (it->second == 0.0) ? out.erase(it) : std::next(it);
    op = SparseOperator(op.n(), std::move(out));
}

void apply_pauli_layer(SparseOperator& op, const circuits::PauliLayer& lay) {
    std::uint64_t xm = 0, zm = 0;
    for (std::size_t s = 0; s < lay.symbols.size(); ++s) {
        PauliSym sym = lay.symbols[s];
        if (sym == PauliSym::X || sym == PauliSym::Y) xm |= 1ull << s;
        if (sym == PauliSym::Z || sym == PauliSym::Y) zm |= 1ull << s;
    }
    SparseOperator::Map out = op.terms();
    for (auto& [key, c] : out) {
        int par = std::popcount(key.x & zm) ^ std::popcount(key.z & xm);
        if (par & 1) c = -c;
    }
    op = SparseOperator(op.n(), std::move(out));
}

void evolve_cycles(SparseOperator& op, const circuits::CircuitInstance& inst, int first_cycle,
                   int last_cycle, TransferCache& cache) {
    for (int c = last_cycle; c >= first_cycle; --c) {
        const auto& cy = inst.cycles.at(static_cast<std::size_t>(c - 1));
        if (cy.ins && !cy.ins->trivial()) apply_pauli_layer(op, *cy.ins);
        for (const auto& g : cy.tq) apply_gate(op, g, cache.get(g));
        for (const auto& g : cy.sq) apply_gate(op, g, gate_transfer(g));
    }
    if (first_cycle <= 1 && inst.pre && !inst.pre->trivial()) apply_pauli_layer(op, *inst.pre);
}

int trace_sign(const PauliString& p, const PauliString& m) {
    if (p.n != m.n) throw std::invalid_argument("trace_sign: length mismatch");
    return p.commutes_with(m) ? +1 : -1;
}

bool quadruple_trace_nonzero(PauliSym a, PauliSym b, PauliSym c, PauliSym d) {
    return sym_product(sym_product(a, b), sym_product(c, d)) == PauliSym::I;
}

int count_quadruples_nonzero() {
    int n = 0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c)
                for (int d = 0; d < 4; ++d)
                    if (quadruple_trace_nonzero(static_cast<PauliSym>(a), static_cast<PauliSym>(b),
                                                static_cast<PauliSym>(c), static_cast<PauliSym>(d)))
                        ++n;
    return n;
}

int count_quadruples_pairwise() {
    int n = 0;
    for (int a = 0; a < 4; ++a)
        for (int c = 0; c < 4; ++c)
            if (quadruple_trace_nonzero(static_cast<PauliSym>(a), static_cast<PauliSym>(a),
                                        static_cast<PauliSym>(c), static_cast<PauliSym>(c)))
                ++n;
    return n;
}

std::unordered_map<std::uint64_t, std::complex<double>> wavefunction_on_zero(
    const SparseOperator& op) {
    static const cplx iphase[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    std::unordered_map<std::uint64_t, cplx> psi;
    psi.reserve(op.size());
    for (const auto& [key, c] : op.terms()) {
        // P|0..0> = i^{#Y} |x-mask>
        int ny = std::popcount(key.x & key.z);
        psi[key.x] += c * iphase[ny & 3];
    }
    return psi;
}

double z_expectation_on_zero(const SparseOperator& op, int q_m) {
    auto psi = wavefunction_on_zero(op);
    double acc = 0.0, comp = 0.0;
    const std::uint64_t m = 1ull << q_m;
    for (const auto& [basis, amp] : psi) {
        double v = ((basis & m) ? -1.0 : 1.0) * std::norm(amp);
        double y = v - comp;
        double t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    }
    return acc;
}

}  // namespace otoc::liouville
