#include "otoc/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>

#include "otoc/metrics.hpp"
#include "otoc/stats.hpp"

namespace otoc::mc {

namespace {

using circuits::CircuitInstance;
using liouville::GateTransfer1;
using liouville::GateTransfer2;
using liouville::SparseOperator;
using liouville::TransferCache;

// --- vanilla path sampling ----------------------------------------------------

struct VanillaContext {
    // transfers per cycle, indexed by each gate's position in its layer
    std::vector<std::vector<GateTransfer1>> sq;
    std::vector<std::vector<const GateTransfer2*>> tq;
    const CircuitInstance* inst = nullptr;
    TransferCache cache;

    explicit VanillaContext(const CircuitInstance& ci) : inst(&ci) {
        sq.resize(ci.cycles.size());
        tq.resize(ci.cycles.size());
        for (std::size_t c = 0; c < ci.cycles.size(); ++c) {
            for (const auto& g : ci.cycles[c].sq) sq[c].push_back(liouville::gate_transfer(g));
            for (const auto& g : ci.cycles[c].tq) tq[c].push_back(&cache.get(g));
        }
    }
    const GateTransfer1& sq_of(int cycle, const circuits::SingleQubitGate& g) const {
        const auto& cy = inst->cycles[static_cast<std::size_t>(cycle - 1)];
        return sq[static_cast<std::size_t>(cycle - 1)][static_cast<std::size_t>(&g - cy.sq.data())];
    }
    const GateTransfer2* tq_of(int cycle, const circuits::TwoQubitGate& g) const {
        const auto& cy = inst->cycles[static_cast<std::size_t>(cycle - 1)];
        return tq[static_cast<std::size_t>(cycle - 1)][static_cast<std::size_t>(&g - cy.tq.data())];
    }
};

inline int sym_code(const PauliKey& k, int site) {
    return static_cast<int>(((k.x >> site) & 1u) | (((k.z >> site) & 1u) << 1));
}
inline void set_sym_code(PauliKey& k, int site, int code) {
    std::uint64_t m = 1ull << site;
    k.x = (k.x & ~m) | ((code & 1) ? m : 0u);
    k.z = (k.z & ~m) | ((code & 2) ? m : 0u);
}
inline int code_to_ixyz(int code) {
    static const int map[4] = {0, 1, 3, 2};
    return map[code];
}
inline int ixyz_to_code(int idx) {
    static const int map[4] = {0, 1, 3, 2};
    return map[idx];
}

// Sample one Pauli path, consuming randomness only at branching gates.
// Streams are keyed by (cycle, site) so removing a gate leaves other draws intact.
PauliKey vanilla_path_string(const VanillaContext& ctx, std::uint64_t path_seed,
                             int first_cycle, int last_cycle) {
    const CircuitInstance& inst = *ctx.inst;
    PauliKey cur{0, 0};
    for (int s : inst.q_b) cur.x |= 1ull << s;  // B = X on q_b sites
    for (int c = last_cycle; c >= first_cycle; --c) {
        const auto& cy = inst.cycles[static_cast<std::size_t>(c - 1)];
        for (const auto& g : cy.tq) {
            const GateTransfer2& t = *ctx.tq_of(c, g);
            int p = 4 * code_to_ixyz(sym_code(cur, g.a)) + code_to_ixyz(sym_code(cur, g.b));
            double probs[16];
            int nz = 0, last = 0;
            for (int q = 0; q < 16; ++q) {
                double w = t.m[static_cast<std::size_t>(q)][static_cast<std::size_t>(p)];
                probs[q] = w * w;
                if (probs[q] > 1e-24) {
                    ++nz;
                    last = q;
                }
            }
            int pick = last;
            if (nz > 1) {
                Philox rng = substream(path_seed, static_cast<std::uint64_t>(c) * 2 + 1,
                                       static_cast<std::uint64_t>(std::min(g.a, g.b)));
                double u = rng.uniform();
                double acc = 0.0;
                for (int q = 0; q < 16; ++q) {
                    acc += probs[q];
                    if (u < acc) {
                        pick = q;
                        break;
                    }
                }
            }
            set_sym_code(cur, g.a, ixyz_to_code(pick >> 2));
            set_sym_code(cur, g.b, ixyz_to_code(pick & 3));
        }
        for (const auto& g : cy.sq) {
            const GateTransfer1& t = ctx.sq_of(c, g);
            int p = code_to_ixyz(sym_code(cur, g.site));
            double probs[4];
            int nz = 0, last = 0;
            for (int q = 0; q < 4; ++q) {
                double w = t.m[static_cast<std::size_t>(q)][static_cast<std::size_t>(p)];
                probs[q] = w * w;
                if (probs[q] > 1e-24) {
                    ++nz;
                    last = q;
                }
            }
            int pick = last;
            if (nz > 1) {
                Philox rng = substream(path_seed, static_cast<std::uint64_t>(c) * 2,
                                       static_cast<std::uint64_t>(g.site));
                double u = rng.uniform();
                double acc = 0.0;
                for (int q = 0; q < 4; ++q) {
                    acc += probs[q];
                    if (u < acc) {
                        pick = q;
                        break;
                    }
                }
            }
            set_sym_code(cur, g.site, ixyz_to_code(pick));
        }
        // inserted Pauli layers only flip coefficient signs; they do not branch paths
    }
    return cur;
}

double vanilla_path_sign(const VanillaContext& ctx, std::uint64_t path_seed) {
    PauliKey p = vanilla_path_string(ctx, path_seed, 1, ctx.inst->t());
    // (-1)^{P, M} with M = Z at q_m
    return ((p.x >> ctx.inst->q_m) & 1u) ? -1.0 : 1.0;
}

}  // namespace

McEstimate vanilla_mc_otoc1(const CircuitInstance& inst, int samples, std::uint64_t seed,
                            sv::Exec ex) {
    VanillaContext ctx(inst);
    std::vector<double> vals(static_cast<std::size_t>(samples));
#pragma omp parallel for schedule(static) if (ex == sv::Exec::parallel)
    for (int s = 0; s < samples; ++s)
        vals[static_cast<std::size_t>(s)] = vanilla_path_sign(ctx, hash_mix(seed, static_cast<std::uint64_t>(s)));
    McEstimate est;
    est.samples = samples;
    est.value = stats::mean_of(vals);
    est.stderr = stats::batch_means_stderr(vals);
    return est;
}

// --- cached Monte Carlo --------------------------------------------------------

namespace {

struct CmcRun {
    double value = 0.0;
    int projections = 0;
    double norm_loss = 0.0;
    std::size_t max_cache = 0;
    std::size_t final_cache = 0;
};

int pick_projection_site(const SparseOperator& op, const std::vector<int>& dist_from_qm) {
    // active site maximizing graph distance from q_m, tie-break lowest index
    std::vector<bool> active(static_cast<std::size_t>(op.n()), false);
    for (const auto& [key, c] : op.terms()) {
        std::uint64_t sup = key.x | key.z;
        while (sup) {
            int s = std::countr_zero(sup);
            active[static_cast<std::size_t>(s)] = true;
            sup &= sup - 1;
        }
    }
    int best = -1, best_d = -1;
    for (int s = 0; s < op.n(); ++s) {
        if (!active[static_cast<std::size_t>(s)]) continue;
        int d = dist_from_qm[static_cast<std::size_t>(s)];
        if (d > best_d) {
            best_d = d;
            best = s;
        }
    }
    return best;
}

// Project: sample one symbol from the site marginal of b^2, filter, renormalize.
void project_site(SparseOperator& op, int site, Philox& rng) {
    double marg[4] = {0, 0, 0, 0};
    for (const auto& [key, c] : op.terms()) marg[sym_code(key, site)] += c * c;
    double tot = marg[0] + marg[1] + marg[2] + marg[3];
    double u = rng.uniform() * tot;
    int pick = 3;
    double acc = 0.0;
    for (int q = 0; q < 4; ++q) {
        acc += marg[q];
        if (u < acc) {
            pick = q;
            break;
        }
    }
    SparseOperator::Map kept;
    for (const auto& [key, c] : op.terms())
        if (sym_code(key, site) == pick) kept.emplace(key, c);
    SparseOperator filtered(op.n(), std::move(kept));
    double scale = 1.0 / std::sqrt(marg[pick] / tot);
    filtered.scale(scale);
    op = std::move(filtered);
}

// Drop b^2 < tol/|cache|; returns the squared-norm fraction lost, renormalizes.
double truncate_small(SparseOperator& op, double tol) {
    if (tol <= 0.0 || op.size() == 0) return 0.0;
    double thresh = tol / static_cast<double>(op.size());
    double before = op.norm_sq();
    SparseOperator::Map kept;
    kept.reserve(op.size());
    for (const auto& [key, c] : op.terms())
        if (c * c >= thresh * before) kept.emplace(key, c);
    if (kept.size() == op.size()) return 0.0;
    SparseOperator next(op.n(), std::move(kept));
    double after = next.norm_sq();
    if (after <= 0.0) return 1.0;  // degenerate configuration: everything truncated
    next.scale(std::sqrt(before / after));
    op = std::move(next);
    return 1.0 - after / before;
}

CmcRun cmc_single_run(const CircuitInstance& inst, const CmcConfig& cfg, std::uint64_t run_seed,
                      const std::vector<int>& dist_from_qm, TransferCache& transfers) {
    CmcRun run;
    PauliString b0 = PauliString::identity(inst.n());
    for (int s : inst.q_b) b0.set(s, PauliSym::X);
    SparseOperator op = SparseOperator::from_pauli(b0);
    Philox rng(run_seed, 0xC3C);
    auto maybe_shrink = [&](bool force, int force_site) {
        double lost = truncate_small(op, cfg.tol);
        if (lost > 0) run.norm_loss += lost * (1.0 - run.norm_loss);
        while (op.size() > cfg.cache_limit || force) {
            int site = force ? force_site : pick_projection_site(op, dist_from_qm);
            if (site < 0) break;
            project_site(op, site, rng);
            ++run.projections;
            force = false;
        }
    };
    for (int c = inst.t(); c >= 1; --c) {
        // the cut after cycle c's gates lies just above cycle c in Heisenberg order
        for (const auto& [fc, fs] : cfg.forced_projections)
            if (fc == c) maybe_shrink(true, fs);
        const auto& cy = inst.cycles[static_cast<std::size_t>(c - 1)];
        if (cy.ins && !cy.ins->trivial()) liouville::apply_pauli_layer(op, *cy.ins);
        for (const auto& g : cy.tq) {
            apply_gate(op, g, transfers.get(g));
            run.max_cache = std::max(run.max_cache, op.size());
            maybe_shrink(false, -1);
        }
        for (const auto& g : cy.sq) {
            apply_gate(op, g, liouville::gate_transfer(g));
            run.max_cache = std::max(run.max_cache, op.size());
            maybe_shrink(false, -1);
        }
    }
    for (const auto& [fc, fs] : cfg.forced_projections)
        if (fc == 0) maybe_shrink(true, fs);
    run.final_cache = op.size();
    run.value = liouville::z_expectation_on_zero(op, inst.q_m);
    return run;
}

}  // namespace

McEstimate cached_mc_otoc1(const CircuitInstance& inst, const CmcConfig& cfg, sv::Exec ex) {
    if (cfg.cache_limit < 1) throw std::invalid_argument("cmc: cache_limit must be >= 1");
    if (cfg.tol < 0.0 || cfg.tol >= 1.0) throw std::invalid_argument("cmc: tol must be in [0,1)");
    std::vector<int> dist = inst.grid.distances_from(inst.q_m);
    TransferCache transfers;
    // warm the phase cache serially so parallel runs share it read-only
    for (const auto& cy : inst.cycles)
        for (const auto& g : cy.tq) transfers.get(g);

    CmcRun probe = cmc_single_run(inst, cfg, hash_mix(cfg.seed, 0), dist, transfers);
    McEstimate est;
    if (probe.projections == 0) {
        // deterministic: no sampling happened, one run is the full answer
        est.value = probe.value;
        est.stderr = 0.0;
        est.samples = 1;
    } else {
        std::vector<double> vals(static_cast<std::size_t>(cfg.samples));
        std::vector<CmcRun> runs(static_cast<std::size_t>(cfg.samples));
        runs[0] = probe;
        vals[0] = probe.value;
#pragma omp parallel for schedule(dynamic) if (ex == sv::Exec::parallel)
        for (int s = 1; s < cfg.samples; ++s) {
            TransferCache local = transfers;
            runs[static_cast<std::size_t>(s)] =
                cmc_single_run(inst, cfg, hash_mix(cfg.seed, static_cast<std::uint64_t>(s)), dist,
                               local);
            vals[static_cast<std::size_t>(s)] = runs[static_cast<std::size_t>(s)].value;
        }
        est.value = stats::mean_of(vals);
        est.stderr = stats::batch_means_stderr(vals);
        est.samples = cfg.samples;
        double loss = 0, projs = 0, maxc = 0;
        for (const auto& r : runs) {
            loss += r.norm_loss;
            projs += r.projections;
            maxc = std::max(maxc, static_cast<double>(r.max_cache));
        }
        est.diagnostics["mean_norm_loss"] = loss / cfg.samples;
        est.diagnostics["mean_projections"] = projs / cfg.samples;
        est.diagnostics["max_cache"] = maxc;
        est.diagnostics["final_cache"] = static_cast<double>(probe.final_cache);
        return est;
    }
    est.diagnostics["mean_norm_loss"] = probe.norm_loss;
    est.diagnostics["mean_projections"] = 0.0;
    est.diagnostics["max_cache"] = static_cast<double>(probe.max_cache);
    est.diagnostics["final_cache"] = static_cast<double>(probe.final_cache);
    return est;
}

// --- diagonal pairings for OTOC^2 ----------------------------------------------

namespace {

// Value of <psi| X1 M X2 M X3 M X4 M |psi> with Xi = u2^dag Pi u2.
double pairing_value(const CircuitInstance& inst, int cut, const PauliKey paulis[4], sv::Exec ex) {
    // <0| prod_i (u2^dag P_i u2 M) |0> with u2 = circuit cycles 1..cut
    sv::StateVector psi = sv::StateVector::zero_state(inst.n());
    sv::StateVector phi = psi;
    for (int i = 3; i >= 0; --i) {
        sv::kernels::apply_pauli(phi.amp, 0, 1ull << inst.q_m, ex);
        sv::apply_circuit_range(inst, phi, 1, cut, sv::Direction::forward, ex);
        sv::kernels::apply_pauli(phi.amp, paulis[i].x, paulis[i].z, ex);
        sv::apply_circuit_range(inst, phi, 1, cut, sv::Direction::inverse, ex);
    }
    return sv::kernels::inner(psi.amp, phi.amp, ex).real();
}

}  // namespace

McEstimate diagonal_pairings_otoc2(const CircuitInstance& inst, const PairingConfig& cfg,
                                   sv::Exec ex) {
    if (cfg.cut_cycle < 0 || cfg.cut_cycle > inst.t())
        throw std::invalid_argument("pairings: cut cycle out of range");
    if (inst.n() > sv::limits().dense_qubits)
        throw std::invalid_argument("pairings: second half exceeds dense limit");

    // First-half distribution |b_P(1)|^2.
    std::vector<PauliKey> keys;
    std::vector<double> cdf;
    std::unique_ptr<VanillaContext> vanilla_ctx;
    if (cfg.first_half == FirstHalf::cached) {
        PauliString b0 = PauliString::identity(inst.n());
        for (int s : inst.q_b) b0.set(s, PauliSym::X);
        SparseOperator op = SparseOperator::from_pauli(b0);
        TransferCache transfers;
        liouville::evolve_cycles(op, inst, cfg.cut_cycle + 1, inst.t(), transfers);
        if (op.size() > cfg.first_half_cap)
            throw std::invalid_argument("pairings: first-half cache cap exceeded");
        keys.reserve(op.size());
        cdf.reserve(op.size());
        double acc = 0.0;
        for (const auto& [key, c] : op.terms()) {
            acc += c * c;
            keys.push_back(key);
            cdf.push_back(acc);
        }
        for (auto& v : cdf) v /= acc;
    } else {
        vanilla_ctx = std::make_unique<VanillaContext>(inst);
    }

    auto draw_key = [&](Philox& rng) -> PauliKey {
        if (cfg.first_half == FirstHalf::cached) {
            double u = rng.uniform();
            auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
            std::size_t idx = std::min(static_cast<std::size_t>(it - cdf.begin()), keys.size() - 1);
            return keys[idx];
        }
        return vanilla_path_string(*vanilla_ctx, rng(), cfg.cut_cycle + 1, inst.t());
    };

    const bool all = cfg.pairing == PairingKind::sum_of_four;
    std::vector<double> vals(static_cast<std::size_t>(cfg.samples));
    std::map<std::string, stats::MeanVar> parts;
#pragma omp parallel if (ex == sv::Exec::parallel)
    {
        std::map<std::string, stats::MeanVar> local_parts;
#pragma omp for schedule(dynamic)
        for (int smp = 0; smp < cfg.samples; ++smp) {
            Philox rng = substream(cfg.seed, 0xAB, static_cast<std::uint64_t>(smp));
            PauliKey A = draw_key(rng);
            PauliKey B = draw_key(rng);
            double v = 0.0;
            auto eval = [&](PairingKind kind) {
                PauliKey p[4];
                switch (kind) {
                    case PairingKind::AABB: p[0] = A; p[1] = A; p[2] = B; p[3] = B; break;
                    case PairingKind::ABAB: p[0] = A; p[1] = B; p[2] = A; p[3] = B; break;
                    case PairingKind::ABBA: p[0] = A; p[1] = B; p[2] = B; p[3] = A; break;
                    case PairingKind::AAAA: p[0] = A; p[1] = A; p[2] = A; p[3] = A; break;
                    default: throw std::logic_error("eval: bad pairing");
                }
                return pairing_value(inst, cfg.cut_cycle, p, sv::Exec::serial);
            };
            if (all) {
                double aabb = eval(PairingKind::AABB);
                double abab = eval(PairingKind::ABAB);
                double abba = eval(PairingKind::ABBA);
                double aaaa = eval(PairingKind::AAAA);
                v = aabb + abab + abba - 2.0 * aaaa;
                local_parts["AABB"].add(aabb);
                local_parts["ABAB"].add(abab);
                local_parts["ABBA"].add(abba);
                local_parts["AAAA"].add(aaaa);
            } else {
                v = eval(cfg.pairing);
            }
            vals[static_cast<std::size_t>(smp)] = v;
        }
#pragma omp critical
        for (auto& [k, mv] : local_parts) parts[k].merge(mv);
    }

    McEstimate est;
    est.samples = cfg.samples;
    est.value = stats::mean_of(vals);
    est.stderr = stats::batch_means_stderr(vals);
    for (auto& [k, mv] : parts) est.diagnostics["mean_" + k] = mv.mean;
    return est;
}

// --- Pauli-weight truncation -----------------------------------------------------

namespace {

double log_binom(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

void truncate_weight(SparseOperator& op, int max_weight) {
    double before = op.norm_sq();
    SparseOperator::Map kept;
    kept.reserve(op.size());
    for (const auto& [key, c] : op.terms())
        if (std::popcount(key.x | key.z) <= max_weight) kept.emplace(key, c);
    if (kept.size() == op.size()) return;
    SparseOperator next(op.n(), std::move(kept));
    double after = next.norm_sq();
    if (after > 0.0) next.scale(std::sqrt(before / after));
    op = std::move(next);
}

using SparseVec = std::unordered_map<std::uint64_t, std::complex<double>>;

SparseVec apply_op_to_basis_vec(const SparseOperator& op, const SparseVec& v) {
    static const std::complex<double> iphase[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    SparseVec out;
    out.reserve(v.size());
    for (const auto& [key, c] : op.terms()) {
        for (const auto& [basis, amp] : v) {
            // P|b> : X bits flip, phase = i^{#Y} (-1)^{#(Z or Y sites with bit 1)}
            int ny = std::popcount(key.x & key.z);
            int nz = std::popcount(key.z & basis);
            std::complex<double> ph = iphase[ny & 3] * ((nz & 1) ? -1.0 : 1.0);
            out[basis ^ key.x] += c * ph * amp;
        }
    }
    return out;
}

void apply_m_inplace(SparseVec& v, int q_m) {
    const std::uint64_t m = 1ull << q_m;
    for (auto& [basis, amp] : v)
        if (basis & m) amp = -amp;
}

}  // namespace

double pauli_weight_truncated_otoc2(const CircuitInstance& inst, int max_weight, double r_cap) {
    if (max_weight < 0 || max_weight > inst.n())
        throw std::invalid_argument("pauli_weight_truncated_otoc2: bad weight cap");
    double r = 0.0;
    for (int l = 0; l <= max_weight; ++l)
        r += std::exp(log_binom(inst.n(), l) + l * std::log(3.0));
    if (r > r_cap) throw std::invalid_argument("pauli_weight_truncated_otoc2: R cap exceeded");

    PauliString b0 = PauliString::identity(inst.n());
    for (int s : inst.q_b) b0.set(s, PauliSym::X);
    SparseOperator op = SparseOperator::from_pauli(b0);
    TransferCache transfers;
    for (int c = inst.t(); c >= 1; --c) {
        const auto& cy = inst.cycles[static_cast<std::size_t>(c - 1)];
        if (cy.ins && !cy.ins->trivial()) liouville::apply_pauli_layer(op, *cy.ins);
        for (const auto& g : cy.tq) {
            apply_gate(op, g, transfers.get(g));
            truncate_weight(op, max_weight);
        }
        for (const auto& g : cy.sq) {
            apply_gate(op, g, liouville::gate_transfer(g));
            truncate_weight(op, max_weight);
        }
    }

    // C^(4) = <0| B M B M B M B |0> staged: psi = M B|0>, then B, M, B.
    SparseVec psi;
    {
        auto w = liouville::wavefunction_on_zero(op);
        psi = SparseVec(w.begin(), w.end());
    }
    apply_m_inplace(psi, inst.q_m);
    SparseVec mid = apply_op_to_basis_vec(op, psi);
    apply_m_inplace(mid, inst.q_m);
    mid = apply_op_to_basis_vec(op, mid);
    double acc = 0.0;
    for (const auto& [basis, amp] : psi) {
        auto it = mid.find(basis);
        if (it != mid.end()) acc += (std::conj(amp) * it->second).real();
    }
    return acc;
}

double weight_count_polynomial(double p) {
    if (p < 0.0 || p > 1.0 / 3.0 + 1e-12)
        throw std::invalid_argument("weight_count_polynomial: p must be in [0, 1/3]");
    return ((192.0 * p - 192.0) * p + 72.0) * p * p - 12.0 * p + 1.0;
}

std::vector<double> log_contribution_curve(int n) {
    std::vector<double> out(static_cast<std::size_t>(n) + 1);
    for (int l = 0; l <= n; ++l) {
        double p = static_cast<double>(l) / (3.0 * n);
        out[static_cast<std::size_t>(l)] =
            n * std::log(weight_count_polynomial(p)) + 4.0 * l * std::log(3.0) +
            4.0 * log_binom(n, l);
    }
    return out;
}

int contribution_peak(int n) {
    auto curve = log_contribution_curve(n);
    return static_cast<int>(std::max_element(curve.begin(), curve.end()) - curve.begin());
}

// --- gate removal ranking ---------------------------------------------------------

namespace {
// SNR with the degenerate cases resolved: identical sets rank as "no impact"
// (capped), a zero-variance mismatch as "no information" (zero).
double snr_or_cap(const metrics::SignalSet& a, const metrics::SignalSet& b) {
    bool identical = a.values.size() == b.values.size();
    for (std::size_t i = 0; identical && i < a.values.size(); ++i)
        identical = a.values[i] == b.values[i];
    if (identical) return metrics::kSnrCap;
    try {
        return metrics::snr(a, b);
    } catch (const std::invalid_argument&) {
        return 0.0;
    }
}
}  // namespace

GateRankingResult gate_removal_ranking(const std::vector<CircuitInstance>& ensemble,
                                       int proxy_samples, std::uint64_t seed, sv::Exec ex) {
    if (ensemble.empty()) throw std::invalid_argument("gate_removal_ranking: empty ensemble");
    auto gates = circuits::all_two_qubit_gates(ensemble[0]);
    auto proxy_set = [&](const std::vector<CircuitInstance>& insts) {
        metrics::SignalSet s;
        for (std::size_t i = 0; i < insts.size(); ++i)
            s.values.push_back(
                vanilla_mc_otoc1(insts[i], proxy_samples, hash_mix(seed, i), ex).value);
        return s;
    };
    metrics::SignalSet baseline = proxy_set(ensemble);

    GateRankingResult res;
    for (const auto& g : gates) {
        std::vector<CircuitInstance> removed;
        removed.reserve(ensemble.size());
        for (const auto& inst : ensemble) removed.push_back(circuits::without_gate(inst, g));
        res.ranking.push_back({g, snr_or_cap(proxy_set(removed), baseline)});
    }
    std::stable_sort(res.ranking.begin(), res.ranking.end(),
                     [](const GateImpact& a, const GateImpact& b) { return a.proxy_snr > b.proxy_snr; });

    // cumulative removal in ranking order
    std::vector<CircuitInstance> current = ensemble;
    for (const auto& gi : res.ranking) {
        // indices shift as gates are removed; recompute the gate's position by
        // matching cycle and endpoints in the current instance
        const auto& orig =
            ensemble[0].cycles[static_cast<std::size_t>(gi.gate.cycle - 1)].tq[static_cast<std::size_t>(
                gi.gate.index)];
        auto& tq0 = current[0].cycles[static_cast<std::size_t>(gi.gate.cycle - 1)].tq;
        int idx = -1;
        for (int i = 0; i < static_cast<int>(tq0.size()); ++i)
            if (tq0[static_cast<std::size_t>(i)].a == orig.a && tq0[static_cast<std::size_t>(i)].b == orig.b) {
                idx = i;
                break;
            }
        if (idx < 0) continue;
        circuits::GateRef ref{gi.gate.cycle, idx};
        for (auto& inst : current) inst = circuits::without_gate(inst, ref);
        res.cumulative_snr.push_back(snr_or_cap(proxy_set(current), baseline));
    }

    // exponential fit on the finite part of the curve
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < res.cumulative_snr.size(); ++i) {
        double s = res.cumulative_snr[i];
        if (s > 0 && s < metrics::kSnrCap * 0.5) {
            xs.push_back(static_cast<double>(i + 1));
            ys.push_back(std::log(s));
        }
    }
    if (xs.size() >= 2) {
        auto fit = stats::linear_fit(xs, ys);
        res.fit_amplitude = std::exp(fit.intercept);
        res.fit_tau = fit.slope < 0 ? -1.0 / fit.slope : 0.0;
    }
    return res;
}

// --- sign-problem reweighting demo -------------------------------------------------

SignProblemDiag otoc2_projection_reweighting_demo(int n_projections, int samples,
                                                  std::uint64_t seed) {
    // the 64 trace-nonzero quadruples of single-site symbols
    std::vector<std::array<int, 4>> quads;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c)
                for (int d = 0; d < 4; ++d)
                    if (liouville::quadruple_trace_nonzero(
                            static_cast<PauliSym>(a), static_cast<PauliSym>(b),
                            static_cast<PauliSym>(c), static_cast<PauliSym>(d)))
                        quads.push_back({a, b, c, d});

    SignProblemDiag diag;
    std::vector<stats::MeanVar> acc(static_cast<std::size_t>(n_projections));
    double sum_abs_acc = 0.0;
    long long sum_abs_n = 0;
    for (int s = 0; s < samples; ++s) {
        Philox rng = substream(seed, 0x51, static_cast<std::uint64_t>(s));
        double omega = 1.0;
        for (int p = 0; p < n_projections; ++p) {
            // four caches decomposed along a site: each normalized coefficient
            // vector has components near 1/2 in magnitude with scrambled signs
            double z[4][4];
            for (auto& zk : z) {
                double nrm = 0.0;
                for (double& v : zk) {
                    double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
                    v = sign * std::abs(0.5 + 0.12 * gaussian(rng));
                    nrm += v * v;
                }
                nrm = std::sqrt(nrm);
                for (double& v : zk) v /= nrm;
            }
            double w[64];
            double sum_abs = 0.0;
            for (std::size_t q = 0; q < quads.size(); ++q) {
                w[q] = z[0][quads[q][0]] * z[1][quads[q][1]] * z[2][quads[q][2]] *
                       z[3][quads[q][3]];
                sum_abs += std::abs(w[q]);
            }
            sum_abs_acc += sum_abs;
            ++sum_abs_n;
            double u = rng.uniform() * sum_abs;
            double run = 0.0;
            std::size_t pick = quads.size() - 1;
            for (std::size_t q = 0; q < quads.size(); ++q) {
                run += std::abs(w[q]);
                if (u < run) {
                    pick = q;
                    break;
                }
            }
            omega *= (w[pick] >= 0 ? 1.0 : -1.0) * sum_abs;
            acc[static_cast<std::size_t>(p)].add(omega);
        }
    }
    diag.mean_sum_abs_w = sum_abs_acc / static_cast<double>(sum_abs_n);
    double prev = 0.0;
    diag.min_growth_factor = 1e9;
    for (int p = 0; p < n_projections; ++p) {
        double se = acc[static_cast<std::size_t>(p)].stderr_mean();
        diag.stderr_by_projection.push_back(se);
        if (p > 0 && prev > 0) diag.min_growth_factor = std::min(diag.min_growth_factor, se / prev);
        prev = se;
    }
    return diag;
}

}  // namespace otoc::mc
