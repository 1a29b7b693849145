#include "otoc/statevector.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace otoc::sv {

Limits& limits() {
    static Limits l;
    return l;
}

StateVector StateVector::zero_state(int n) { return bitstring(n, 0); }

StateVector StateVector::bitstring(int n, std::uint64_t bits) {
    StateVector s;
    s.n = n;
    s.amp.assign(std::size_t{1} << n, cplx{0.0, 0.0});
    s.amp[bits] = 1.0;
    return s;
}

double StateVector::norm() const { return std::sqrt(kernels::sum_sq(amp, Exec::serial)); }

namespace kernels {

void apply_1q(std::span<cplx> amp, int site, const Eigen::Matrix2cd& u, Exec ex) {
    const std::int64_t size = static_cast<std::int64_t>(amp.size());
    const std::uint64_t mask = 1ull << site;
    const std::uint64_t lo = mask - 1, hi = ~lo;
    const cplx u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
    const std::int64_t half = size >> 1;
    if (ex == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < half; ++i) {
            std::uint64_t i0 = ((static_cast<std::uint64_t>(i) & hi) << 1) |
                               (static_cast<std::uint64_t>(i) & lo);
            std::uint64_t i1 = i0 | mask;
            cplx a0 = amp[i0], a1 = amp[i1];
            amp[i0] = u00 * a0 + u01 * a1;
            amp[i1] = u10 * a0 + u11 * a1;
        }
    } else {
        for (std::int64_t i = 0; i < half; ++i) {
            std::uint64_t i0 = ((static_cast<std::uint64_t>(i) & hi) << 1) |
                               (static_cast<std::uint64_t>(i) & lo);
            std::uint64_t i1 = i0 | mask;
            cplx a0 = amp[i0], a1 = amp[i1];
            amp[i0] = u00 * a0 + u01 * a1;
            amp[i1] = u10 * a0 + u11 * a1;
        }
    }
}

namespace {
inline std::uint64_t expand2(std::uint64_t i, int low, int high) {
    std::uint64_t x = i;
    x = ((x >> low) << (low + 1)) | (x & ((1ull << low) - 1));
    x = ((x >> high) << (high + 1)) | (x & ((1ull << high) - 1));
    return x;
}
}  // namespace

void apply_2q(std::span<cplx> amp, int a, int b, const Eigen::Matrix4cd& u, Exec ex) {
    // gate basis |q_a q_b>, q_b is the low bit of the 2-bit gate index
    const std::int64_t quarter = static_cast<std::int64_t>(amp.size()) >> 2;
    const int low = std::min(a, b), high = std::max(a, b);
    const std::uint64_t ma = 1ull << a, mb = 1ull << b;
    cplx m[4][4];
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m[i][j] = u(i, j);
#pragma omp parallel for schedule(static) if (ex == Exec::parallel)
    for (std::int64_t i = 0; i < quarter; ++i) {
        std::uint64_t base = expand2(static_cast<std::uint64_t>(i), low, high);
        std::uint64_t idx[4] = {base, base | mb, base | ma, base | ma | mb};
        cplx v[4] = {amp[idx[0]], amp[idx[1]], amp[idx[2]], amp[idx[3]]};
        for (int r = 0; r < 4; ++r)
            amp[idx[r]] = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] + m[r][3] * v[3];
    }
}

void apply_pauli(std::span<cplx> amp, std::uint64_t xmask, std::uint64_t zmask, Exec ex) {
    const std::int64_t size = static_cast<std::int64_t>(amp.size());
    const int n_y = std::popcount(xmask & zmask);
    // global factor i^{n_y}
    static const cplx iphase[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const cplx g = iphase[n_y & 3];
    if (xmask == 0) {
#pragma omp parallel for schedule(static) if (ex == Exec::parallel)
        for (std::int64_t b = 0; b < size; ++b) {
            double s = (std::popcount(static_cast<std::uint64_t>(b) & zmask) & 1) ? -1.0 : 1.0;
            amp[static_cast<std::uint64_t>(b)] *= g * s;
        }
        return;
    }
#pragma omp parallel for schedule(static) if (ex == Exec::parallel)
    for (std::int64_t b = 0; b < size; ++b) {
        std::uint64_t ub = static_cast<std::uint64_t>(b);
        std::uint64_t pb = ub ^ xmask;
        if (ub > pb) continue;  // handle each orbit once
        double sb = (std::popcount(ub & zmask) & 1) ? -1.0 : 1.0;
        double sp = (std::popcount(pb & zmask) & 1) ? -1.0 : 1.0;
        cplx vb = amp[ub], vp = amp[pb];
        amp[pb] = g * sb * vb;
        amp[ub] = g * sp * vp;
    }
}

cplx inner(std::span<const cplx> a, std::span<const cplx> b, Exec ex) {
    const std::int64_t size = static_cast<std::int64_t>(a.size());
    double re = 0.0, im = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : re, im) if (ex == Exec::parallel)
    for (std::int64_t i = 0; i < size; ++i) {
        cplx v = std::conj(a[static_cast<std::uint64_t>(i)]) * b[static_cast<std::uint64_t>(i)];
        re += v.real();
        im += v.imag();
    }
    return {re, im};
}

double sum_sq(std::span<const cplx> a, Exec ex) {
    const std::int64_t size = static_cast<std::int64_t>(a.size());
    double s = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : s) if (ex == Exec::parallel)
    for (std::int64_t i = 0; i < size; ++i) s += std::norm(a[static_cast<std::uint64_t>(i)]);
    return s;
}

}  // namespace kernels

namespace {

void check_size(int n) {
    if (n > limits().dense_qubits)
        throw std::invalid_argument("statevector size limit exceeded: n=" + std::to_string(n));
}

void pauli_layer_masks(const circuits::PauliLayer& lay, std::uint64_t& xm, std::uint64_t& zm) {
    xm = zm = 0;
    for (std::size_t s = 0; s < lay.symbols.size(); ++s) {
        PauliSym sym = lay.symbols[s];
        if (sym == PauliSym::X || sym == PauliSym::Y) xm |= 1ull << s;
        if (sym == PauliSym::Z || sym == PauliSym::Y) zm |= 1ull << s;
    }
}

// One cycle, with single-qubit gates fused into the two-qubit gates they feed.
void apply_cycle(const circuits::Cycle& cy, std::span<cplx> amp, int n, Direction dir, Exec ex) {
    std::vector<const circuits::SingleQubitGate*> sq_of(static_cast<std::size_t>(n), nullptr);
    for (const auto& g : cy.sq) sq_of[static_cast<std::size_t>(g.site)] = &g;
    std::vector<bool> covered(static_cast<std::size_t>(n), false);
    struct Fused {
        int a, b;
        Eigen::Matrix4cd u;
    };
    std::vector<Fused> fused;
    fused.reserve(cy.tq.size());
    for (const auto& g : cy.tq) {
        Eigen::Matrix2cd ua = sq_of[static_cast<std::size_t>(g.a)]
                                  ? circuits::sq_matrix(*sq_of[static_cast<std::size_t>(g.a)])
                                  : Eigen::Matrix2cd::Identity();
        Eigen::Matrix2cd ub = sq_of[static_cast<std::size_t>(g.b)]
                                  ? circuits::sq_matrix(*sq_of[static_cast<std::size_t>(g.b)])
                                  : Eigen::Matrix2cd::Identity();
        Eigen::Matrix4cd u = circuits::tq_matrix(g) * Eigen::kroneckerProduct(ua, ub);
        covered[static_cast<std::size_t>(g.a)] = covered[static_cast<std::size_t>(g.b)] = true;
        fused.push_back({g.a, g.b, u});
    }
    auto apply_loose_sq = [&] {
        for (const auto& g : cy.sq)
            if (!covered[static_cast<std::size_t>(g.site)]) {
                Eigen::Matrix2cd u = circuits::sq_matrix(g);
                if (dir == Direction::inverse) u.adjointInPlace();
                kernels::apply_1q(amp, g.site, u, ex);
            }
    };
    auto apply_ins = [&] {
        if (cy.ins && !cy.ins->trivial()) {
            std::uint64_t xm, zm;
            pauli_layer_masks(*cy.ins, xm, zm);
            kernels::apply_pauli(amp, xm, zm, ex);
        }
    };
    if (dir == Direction::forward) {
        apply_loose_sq();
        for (const auto& f : fused) kernels::apply_2q(amp, f.a, f.b, f.u, ex);
        apply_ins();
    } else {
        apply_ins();
        for (auto it = fused.rbegin(); it != fused.rend(); ++it)
            kernels::apply_2q(amp, it->a, it->b, it->u.adjoint(), ex);
        apply_loose_sq();
    }
}

}  // namespace

void apply_circuit(const circuits::CircuitInstance& inst, StateVector& psi, Direction dir,
                   Exec ex) {
    if (psi.n != inst.n()) throw std::invalid_argument("apply_circuit: size mismatch");
    auto apply_pre = [&] {
        if (inst.pre && !inst.pre->trivial()) {
            std::uint64_t xm, zm;
            pauli_layer_masks(*inst.pre, xm, zm);
            kernels::apply_pauli(psi.amp, xm, zm, ex);
        }
    };
    if (dir == Direction::forward) {
        apply_pre();
        for (const auto& cy : inst.cycles) apply_cycle(cy, psi.amp, psi.n, dir, ex);
    } else {
        for (auto it = inst.cycles.rbegin(); it != inst.cycles.rend(); ++it)
            apply_cycle(*it, psi.amp, psi.n, dir, ex);
        apply_pre();
    }
}

void apply_circuit_range(const circuits::CircuitInstance& inst, StateVector& psi, int first_cycle,
                         int last_cycle, Direction dir, Exec ex) {
    if (psi.n != inst.n()) throw std::invalid_argument("apply_circuit_range: size mismatch");
    if (first_cycle < 1 || last_cycle > inst.t())
        throw std::invalid_argument("apply_circuit_range: cycle range out of bounds");
    if (dir == Direction::forward) {
        for (int c = first_cycle; c <= last_cycle; ++c)
            apply_cycle(inst.cycles[static_cast<std::size_t>(c - 1)], psi.amp, psi.n, dir, ex);
    } else {
        for (int c = last_cycle; c >= first_cycle; --c)
            apply_cycle(inst.cycles[static_cast<std::size_t>(c - 1)], psi.amp, psi.n, dir, ex);
    }
}

StateVector evolve(const circuits::CircuitInstance& inst, const StateVector& initial, Exec ex) {
    check_size(inst.n());
    StateVector out = initial;
    apply_circuit(inst, out, Direction::forward, ex);
    return out;
}

void apply_pauli_string(StateVector& psi, const PauliString& p, Exec ex) {
    kernels::apply_pauli(psi.amp, p.x, p.z, ex);
    if (p.sign < 0)
        for (auto& a : psi.amp) a = -a;
}

namespace {

// One (B(t) M) block: apply M, U, B, U-inverse.
template <typename ApplyU>
void otoc_block(std::vector<cplx>& amp, int q_m, std::uint64_t b_mask, ApplyU&& u, Exec ex) {
    kernels::apply_pauli(amp, 0, 1ull << q_m, ex);  // M = Z at q_m
    u(Direction::forward);
    kernels::apply_pauli(amp, b_mask, 0, ex);  // B = X on q_b sites
    u(Direction::inverse);
}

std::uint64_t b_mask_of(const std::vector<int>& q_b) {
    std::uint64_t m = 0;
    for (int s : q_b) m |= 1ull << s;
    return m;
}

template <typename PassFn>
double expectation_over_initial(int n, const Initial& initial, PassFn&& value_for_state) {
    switch (initial.kind) {
        case Initial::Kind::zero_state:
            return value_for_state(0);
        case Initial::Kind::bitstring:
            return value_for_state(initial.bits);
        case Initial::Kind::infinite_temperature: {
            if (initial.exhaustive) {
                if (n > 20)
                    throw std::invalid_argument("exhaustive infinite-temperature cap exceeded");
                double acc = 0.0;
                std::uint64_t total = 1ull << n;
                for (std::uint64_t b = 0; b < total; ++b) acc += value_for_state(b);
                return acc / static_cast<double>(total);
            }
            Philox rng(initial.seed, 0x7e6f);
            double acc = 0.0;
            for (int s = 0; s < initial.samples; ++s) {
                std::uint64_t b = rng() & ((n == 64) ? ~0ull : ((1ull << n) - 1));
                acc += value_for_state(b);
            }
            return acc / initial.samples;
        }
    }
    throw std::logic_error("bad initial");
}

}  // namespace

double otoc_k_multi(std::span<const circuits::CircuitInstance* const> copies, int k,
                    const Initial& initial, Exec ex) {
    if (k < 1) throw std::invalid_argument("otoc_k: k must be >= 1");
    if (copies.size() != static_cast<std::size_t>(2 * k))
        throw std::invalid_argument("otoc_k_multi: need 2k circuit copies");
    const auto& first = *copies[0];
    check_size(first.n());
    const std::uint64_t bmask = b_mask_of(first.q_b);
    auto value_for_state = [&](std::uint64_t bits) {
        StateVector psi = StateVector::bitstring(first.n(), bits);
        StateVector phi = psi;
        for (int j = 2 * k - 1; j >= 0; --j) {
            const auto& inst = *copies[static_cast<std::size_t>(j)];
            otoc_block(
                phi.amp, inst.q_m, bmask,
                [&](Direction d) { apply_circuit(inst, phi, d, ex); }, ex);
        }
        return kernels::inner(psi.amp, phi.amp, ex).real();
    };
    return expectation_over_initial(first.n(), initial, value_for_state);
}

double otoc_k(const circuits::CircuitInstance& inst, int k, const Initial& initial, Exec ex) {
    std::vector<const circuits::CircuitInstance*> copies(static_cast<std::size_t>(2 * k), &inst);
    return otoc_k_multi(copies, k, initial, ex);
}

double toc(const circuits::CircuitInstance& inst, Exec ex) {
    check_size(inst.n());
    double acc = 0.0;
    for (int eig = 0; eig < 2; ++eig) {
        StateVector psi =
            StateVector::bitstring(inst.n(), eig ? (1ull << inst.q_m) : 0ull);
        apply_circuit(inst, psi, Direction::forward, ex);
        double mz = 0.0;
        const std::uint64_t m = 1ull << inst.q_m;
        for (std::uint64_t b = 0; b < psi.amp.size(); ++b)
            mz += ((b & m) ? -1.0 : 1.0) * std::norm(psi.amp[b]);
        acc += (eig ? -1.0 : 1.0) * mz;
    }
    return acc / 2.0;
}

namespace {

struct InsertionSlots {
    std::vector<std::pair<int, int>> slots;  // (cut cycle, site)
};

InsertionSlots plan_slots(const circuits::CircuitInstance& inst,
                          const circuits::PauliInsertionPlan& plan) {
    InsertionSlots s;
    for (int c : plan.cut_cycles) {
        if (plan.mode == circuits::CutMode::full_cut) {
            for (int q = 0; q < inst.n(); ++q) s.slots.push_back({c, q});
        } else {
            s.slots.push_back({c, plan.site});
        }
    }
    return s;
}

circuits::CircuitInstance instance_with_symbols(const circuits::CircuitInstance& inst,
                                                const circuits::PauliInsertionPlan& plan,
                                                const InsertionSlots& slots,
                                                const std::vector<PauliSym>& syms) {
    std::vector<circuits::PauliLayer> layers(plan.cut_cycles.size());
    for (std::size_t i = 0; i < layers.size(); ++i)
        layers[i].symbols.assign(static_cast<std::size_t>(inst.n()), PauliSym::I);
    // slots are ordered by plan cut, then site
    std::size_t per_cut = slots.slots.size() / plan.cut_cycles.size();
    for (std::size_t i = 0; i < slots.slots.size(); ++i)
        layers[i / per_cut].symbols[static_cast<std::size_t>(slots.slots[i].second)] = syms[i];
    return circuits::apply_pauli_layers(inst, plan, layers);
}

}  // namespace

Estimate pauli_averaged_otoc(const circuits::CircuitInstance& inst,
                             const circuits::PauliInsertionPlan& plan, int k,
                             const SamplingSpec& spec, const Initial& initial, Exec ex) {
    circuits::validate_plan(inst, plan);
    if (plan.cut_cycles.empty()) return {otoc_k(inst, k, initial, ex), 0.0};

    const int n_sets =
        (plan.correlation == circuits::CopyCorrelation::independent_copies) ? k : 1;
    InsertionSlots slots = plan_slots(inst, plan);
    const std::size_t n_slots = slots.slots.size() * static_cast<std::size_t>(n_sets);

    auto value_for_sets = [&](const std::vector<std::vector<PauliSym>>& sets) {
        std::vector<circuits::CircuitInstance> insts;
        insts.reserve(sets.size());
        for (const auto& syms : sets) insts.push_back(instance_with_symbols(inst, plan, slots, syms));
        std::vector<const circuits::CircuitInstance*> copies(static_cast<std::size_t>(2 * k));
        for (int j = 0; j < 2 * k; ++j)
            copies[static_cast<std::size_t>(j)] = &insts[static_cast<std::size_t>((j / 2) % n_sets)];
        return otoc_k_multi(copies, k, initial, ex);
    };

    if (spec.exhaustive) {
        double combos = std::pow(4.0, static_cast<double>(n_slots));
        if (combos > static_cast<double>(spec.exhaustive_cap))
            throw std::invalid_argument("pauli_averaged_otoc: exhaustive cap exceeded");
        std::uint64_t total = 1ull << (2 * n_slots);
        double acc = 0.0;
        std::vector<std::vector<PauliSym>> sets(static_cast<std::size_t>(n_sets),
                                                std::vector<PauliSym>(slots.slots.size()));
        for (std::uint64_t code = 0; code < total; ++code) {
            std::uint64_t c = code;
            for (auto& set : sets)
                for (auto& s : set) {
                    s = static_cast<PauliSym>(c & 3u);
                    c >>= 2;
                }
            acc += value_for_sets(sets);
        }
        return {acc / static_cast<double>(total), 0.0};
    }

    double acc = 0.0, acc2 = 0.0;
    std::vector<std::vector<PauliSym>> sets(static_cast<std::size_t>(n_sets),
                                            std::vector<PauliSym>(slots.slots.size()));
    for (int s = 0; s < spec.n_samples; ++s) {
        for (int set = 0; set < n_sets; ++set) {
            Philox rng = substream(spec.seed, static_cast<std::uint64_t>(s),
                                   static_cast<std::uint64_t>(set));
            for (auto& sym : sets[static_cast<std::size_t>(set)])
                sym = static_cast<PauliSym>(rng.below(4));
        }
        double v = value_for_sets(sets);
        acc += v;
        acc2 += v * v;
    }
    double mean = acc / spec.n_samples;
    double var = std::max(0.0, acc2 / spec.n_samples - mean * mean);
    return {mean, std::sqrt(var / std::max(1, spec.n_samples - 1))};
}

Estimate depolarized_otoc(const circuits::CircuitInstance& inst, int k, double p_1q, double p_2q,
                          int n_trajectories, std::uint64_t seed, const Initial& initial, Exec ex) {
    if (p_1q < 0 || p_1q >= 1.0 + 1e-12 || p_2q < 0 || p_2q > 1.0)
        throw std::invalid_argument("depolarized_otoc: probabilities must be in [0,1]");
    check_size(inst.n());
    const std::uint64_t bmask = b_mask_of(inst.q_b);

    auto noisy_apply = [&](StateVector& phi, Direction dir, Philox& rng) {
        auto gate_noise = [&](std::initializer_list<int> sites, double p) {
            if (p <= 0.0) return;
            if (rng.uniform() >= p) return;
            std::uint64_t xm = 0, zm = 0;
            for (int s : sites) {
                auto sym = static_cast<PauliSym>(rng.below(4));
                if (sym == PauliSym::X || sym == PauliSym::Y) xm |= 1ull << s;
                if (sym == PauliSym::Z || sym == PauliSym::Y) zm |= 1ull << s;
            }
            if (xm | zm) kernels::apply_pauli(phi.amp, xm, zm, ex);
        };
        auto cycle_once = [&](const circuits::Cycle& cy, Direction d) {
            auto sq_all = [&] {
                for (const auto& g : cy.sq) {
                    Eigen::Matrix2cd u = circuits::sq_matrix(g);
                    if (d == Direction::inverse) u.adjointInPlace();
                    kernels::apply_1q(phi.amp, g.site, u, ex);
                    gate_noise({g.site}, p_1q);
                }
            };
            auto tq_all = [&](bool reversed) {
                auto run = [&](const circuits::TwoQubitGate& g) {
                    Eigen::Matrix4cd u = circuits::tq_matrix(g);
                    if (d == Direction::inverse) u.adjointInPlace();
                    kernels::apply_2q(phi.amp, g.a, g.b, u, ex);
                    gate_noise({g.a, g.b}, p_2q);
                };
                if (!reversed)
                    for (const auto& g : cy.tq) run(g);
                else
                    for (auto it = cy.tq.rbegin(); it != cy.tq.rend(); ++it) run(*it);
            };
            auto ins = [&] {
                if (cy.ins && !cy.ins->trivial()) {
                    std::uint64_t xm, zm;
                    pauli_layer_masks(*cy.ins, xm, zm);
                    kernels::apply_pauli(phi.amp, xm, zm, ex);
                }
            };
            if (d == Direction::forward) {
                sq_all();
                tq_all(false);
                ins();
            } else {
                ins();
                tq_all(true);
                sq_all();
            }
        };
        if (dir == Direction::forward)
            for (const auto& cy : inst.cycles) cycle_once(cy, dir);
        else
            for (auto it = inst.cycles.rbegin(); it != inst.cycles.rend(); ++it)
                cycle_once(*it, dir);
    };

    double acc = 0.0, acc2 = 0.0;
    for (int tr = 0; tr < n_trajectories; ++tr) {
        Philox rng = substream(seed, 0x6e6f, static_cast<std::uint64_t>(tr));
        auto value_for_state = [&](std::uint64_t bits) {
            StateVector psi = StateVector::bitstring(inst.n(), bits);
            StateVector phi = psi;
            for (int j = 2 * k - 1; j >= 0; --j) {
                kernels::apply_pauli(phi.amp, 0, 1ull << inst.q_m, ex);
                noisy_apply(phi, Direction::forward, rng);
                kernels::apply_pauli(phi.amp, bmask, 0, ex);
                noisy_apply(phi, Direction::inverse, rng);
            }
            return kernels::inner(psi.amp, phi.amp, ex).real();
        };
        double v = expectation_over_initial(inst.n(), initial, value_for_state);
        acc += v;
        acc2 += v * v;
    }
    double mean = acc / n_trajectories;
    double var = std::max(0.0, acc2 / n_trajectories - mean * mean);
    return {mean, std::sqrt(var / std::max(1, n_trajectories - 1))};
}

Eigen::Matrix4cd haar_unitary_4(Philox& rng) {
    Eigen::Matrix4cd z;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) z(i, j) = cplx(gaussian(rng), gaussian(rng));
    Eigen::HouseholderQR<Eigen::Matrix4cd> qr(z);
    Eigen::Matrix4cd q = qr.householderQ();
    Eigen::Matrix4cd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < 4; ++j) {
        cplx d = r(j, j);
        q.col(j) *= d / std::abs(d);
    }
    return q;
}

RawCircuit haar_brickwork_chain(int n, int layers, std::uint64_t seed) {
    RawCircuit c;
    c.n = n;
    for (int l = 1; l <= layers; ++l) {
        std::vector<RawGate> lay;
        int start = (l % 2 == 1) ? 0 : 1;
        for (int i = start; i + 1 < n; i += 2) {
            Philox rng = substream(seed, static_cast<std::uint64_t>(l), static_cast<std::uint64_t>(i));
            lay.push_back({i, i + 1, haar_unitary_4(rng)});
        }
        c.layers.push_back(std::move(lay));
    }
    return c;
}

void apply_raw(const RawCircuit& c, StateVector& psi, Direction dir, Exec ex) {
    if (dir == Direction::forward) {
        for (const auto& lay : c.layers)
            for (const auto& g : lay) kernels::apply_2q(psi.amp, g.a, g.b, g.u, ex);
    } else {
        for (auto it = c.layers.rbegin(); it != c.layers.rend(); ++it)
            for (auto g = it->rbegin(); g != it->rend(); ++g)
                kernels::apply_2q(psi.amp, g->a, g->b, g->u.adjoint(), ex);
    }
}

double otoc_k_raw(const RawCircuit& c, int k, int q_m, const std::vector<int>& q_b,
                  const Initial& initial, Exec ex) {
    check_size(c.n);
    const std::uint64_t bmask = b_mask_of(q_b);
    auto value_for_state = [&](std::uint64_t bits) {
        StateVector psi = StateVector::bitstring(c.n, bits);
        StateVector phi = psi;
        for (int j = 0; j < 2 * k; ++j) {
            kernels::apply_pauli(phi.amp, 0, 1ull << q_m, ex);
            apply_raw(c, phi, Direction::forward, ex);
            kernels::apply_pauli(phi.amp, bmask, 0, ex);
            apply_raw(c, phi, Direction::inverse, ex);
        }
        return kernels::inner(psi.amp, phi.amp, ex).real();
    };
    return expectation_over_initial(c.n, initial, value_for_state);
}

}  // namespace otoc::sv
