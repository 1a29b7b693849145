#include "otoc/learning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "otoc/metrics.hpp"
#include "otoc/statevector.hpp"

namespace otoc::learning {

double offdiag_otoc2(const circuits::CircuitInstance& inst, int cut_cycle, int diag_samples,
                     std::uint64_t seed) {
    double full = sv::otoc_k(inst, 2);
    circuits::PauliInsertionPlan plan;
    plan.cut_cycles = {cut_cycle};
    plan.mode = circuits::CutMode::full_cut;
    plan.correlation = circuits::CopyCorrelation::independent_copies;
    sv::SamplingSpec spec;
    spec.n_samples = diag_samples;
    spec.seed = seed;
    double diag = sv::pauli_averaged_otoc(inst, plan, 2, spec).value;
    return full - diag;
}

circuits::GateRef default_target_gate(const circuits::CircuitInstance& inst) {
    // only gates inside both causal cones can influence the correlator; among
    // those, prefer the middle of the circuit and of the q_m <-> q_b passage
    circuits::CircuitInstance pruned = circuits::lightcone_prune(inst);
    int cycle = (inst.t() + 1) / 2;
    std::vector<int> dm = inst.grid.distances_from(inst.q_m);
    std::vector<int> db = inst.grid.distances_from(inst.q_b.front());
    for (int c = 0; c < inst.t(); ++c) {
        int cyc = cycle + (c % 2 ? -(c + 1) / 2 : c / 2);  // search outward from the middle
        if (cyc < 1 || cyc > inst.t()) continue;
        const auto& retained = pruned.cycles[static_cast<std::size_t>(cyc - 1)].tq;
        if (retained.empty()) continue;
        const circuits::TwoQubitGate* pick = nullptr;
        int best_score = 1 << 30;
        for (const auto& g : retained) {
            int score = std::abs(dm[static_cast<std::size_t>(g.a)] - db[static_cast<std::size_t>(g.a)]) +
                        std::abs(dm[static_cast<std::size_t>(g.b)] - db[static_cast<std::size_t>(g.b)]);
            if (score < best_score) {
                best_score = score;
                pick = &g;
            }
        }
        const auto& tq = inst.cycles[static_cast<std::size_t>(cyc - 1)].tq;
        for (int i = 0; i < static_cast<int>(tq.size()); ++i)
            if (tq[static_cast<std::size_t>(i)].a == pick->a && tq[static_cast<std::size_t>(i)].b == pick->b)
                return {cyc, i};
    }
    throw std::invalid_argument("default_target_gate: no gate inside the causal cones");
}

LearnPhaseResult learn_phase(const LearnPhaseConfig& cfg) {
    if (cfg.ensemble.size() < 2) throw std::invalid_argument("learn_phase: need >= 2 instances");
    if (cfg.xi_grid.empty()) throw std::invalid_argument("learn_phase: empty grid");
    const int cut = cfg.cut_cycle > 0 ? cfg.cut_cycle : (cfg.ensemble[0].t() + 1) / 2;

    LearnPhaseResult res;
    res.xi_grid = cfg.xi_grid;
    const std::size_t m = cfg.ensemble.size();

    // reference data from the hidden phase ("the physical system")
    res.reference.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        auto inst = circuits::with_gate_phase(cfg.ensemble[i], cfg.target_gate, cfg.xi_star);
        res.reference[i] = offdiag_otoc2(inst, cut, cfg.diag_samples, hash_mix(cfg.seed, i));
    }
    metrics::SignalSet ref{res.reference, "reference", {}};
    metrics::SignalSet ref_s = metrics::rescale(ref);

    res.candidate.resize(cfg.xi_grid.size());
    res.cost.resize(cfg.xi_grid.size());
    double best = 1e300;
    for (std::size_t g = 0; g < cfg.xi_grid.size(); ++g) {
        auto& cand = res.candidate[g];
        cand.resize(m);
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i) {
            auto inst = circuits::with_gate_phase(cfg.ensemble[static_cast<std::size_t>(i)],
                                                  cfg.target_gate, cfg.xi_grid[g]);
            cand[static_cast<std::size_t>(i)] =
                offdiag_otoc2(inst, cut, cfg.diag_samples,
                              hash_mix(cfg.seed, static_cast<std::uint64_t>(i)));
        }
        metrics::SignalSet cs{cand, "candidate", {}};
        metrics::SignalSet cand_s = metrics::rescale(cs);
        double rms = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double d = cand_s.values[i] - ref_s.values[i];
            rms += d * d;
        }
        res.cost[g] = std::sqrt(rms / static_cast<double>(m));
        if (res.cost[g] < best) {
            best = res.cost[g];
            res.argmin = cfg.xi_grid[g];
        }
    }
    return res;
}

}  // namespace otoc::learning
