#pragma once

#include <cstdint>
#include <vector>

#include "otoc/circuits.hpp"

namespace otoc::learning {

// One-parameter learning of a two-qubit conditional phase: per-instance
// off-diagonal OTOC^2 data from the hidden phase are compared against the same
// observable recomputed over a phase grid; the cost is the RMS difference of
// the rescaled signal sets.
struct LearnPhaseConfig {
    std::vector<circuits::CircuitInstance> ensemble;
    circuits::GateRef target_gate;
    double xi_star = 0.0;          // hidden phase generating the reference data
    std::vector<double> xi_grid;
    int cut_cycle = 0;             // Pauli-averaging cut; 0 = middle of the circuit
    int diag_samples = 96;         // sampled insertions for the diagonal part
    std::uint64_t seed = 1;
};

struct LearnPhaseResult {
    std::vector<double> xi_grid;
    std::vector<double> cost;
    double argmin = 0.0;
    std::vector<double> reference;               // per-instance off-diagonal data
    std::vector<std::vector<double>> candidate;  // [grid][instance]
};

// C^(4)_off-diag = C^(4) - C^(4)_diag; the diagonal part averages independent
// Pauli insertions per copy pair at the cut cycle, with a shared seed so a
// candidate at the hidden phase reproduces the reference bit for bit.
double offdiag_otoc2(const circuits::CircuitInstance& inst, int cut_cycle, int diag_samples,
                     std::uint64_t seed);

LearnPhaseResult learn_phase(const LearnPhaseConfig& cfg);

// The two-qubit gate most central to the passage between q_m and q_b in the
// cycle closest to the middle of the circuit.
circuits::GateRef default_target_gate(const circuits::CircuitInstance& inst);

}  // namespace otoc::learning
