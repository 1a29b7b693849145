#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "otoc/grid.hpp"
#include "otoc/pauli.hpp"
#include "otoc/rng.hpp"

namespace otoc::circuits {

// e^{-i theta/2 (cos(phi) X + sin(phi) Y)}
struct SingleQubitGate {
    double theta = 0.0;
    double phi = 0.0;
    int site = 0;
};

// iSWAP followed by CPHASE: diag-block [[1,0,0,0],[0,0,-i,0],[0,-i,0,0],[0,0,0,e^{-i phase}]].
// This sign convention is the one that satisfies the X2 G X1 Z2^{phase/pi}
// inversion identity exactly (up to global phase -i); see gate_matrix/invert tests.
struct TwoQubitGate {
    double phase = 0.0;
    int a = 0;
    int b = 0;
};

// Pauli layer inserted after a cycle's gates (and mirrored in the inverse half).
struct PauliLayer {
    std::vector<PauliSym> symbols;  // one per site
    bool trivial() const {
        for (auto s : symbols)
            if (s != PauliSym::I) return false;
        return true;
    }
};

struct Cycle {
    std::vector<SingleQubitGate> sq;
    std::vector<TwoQubitGate> tq;
    std::optional<PauliLayer> ins;
};

enum class Pattern { slow_scrambling, rapid_scrambling, brickwork_1d };

std::string pattern_name(Pattern p);
Pattern pattern_from_name(const std::string& s);

enum class ThetaMode { ensemble, fixed_half_pi };  // {0.25,0.5,0.75}*pi vs pi/2

struct GenerateOptions {
    ThetaMode theta_mode = ThetaMode::ensemble;
    double phase_2q = 0.35;  // conditional phase shared by all iSWAP-like gates
};

struct CircuitInstance {
    QubitGrid grid;
    Pattern pattern = Pattern::slow_scrambling;
    std::uint64_t seed = 0;
    int q_m = 0;
    std::vector<int> q_b;
    std::vector<Cycle> cycles;
    std::optional<PauliLayer> pre;  // insertion at cut cycle 0, before any gates

    int n() const { return grid.n_sites(); }
    int t() const { return static_cast<int>(cycles.size()); }
    int n_2q() const {
        int c = 0;
        for (const auto& cy : cycles) c += static_cast<int>(cy.tq.size());
        return c;
    }
};

CircuitInstance generate_instance(const QubitGrid& grid, Pattern pattern, int t, GridPos q_m,
                                  const std::vector<GridPos>& q_b, std::uint64_t seed,
                                  const GenerateOptions& opts = {});

// Keeps only two-qubit gates inside the intersection of the causal cones grown
// forward from q_m and backward from q_b; single-qubit gates are untouched.
CircuitInstance lightcone_prune(const CircuitInstance& inst);

// Gate matrices under the module's fixed convention.
Eigen::Matrix2cd sq_matrix(const SingleQubitGate& g);
Eigen::Matrix4cd tq_matrix(const TwoQubitGate& g);

// Inverse of an iSWAP-like gate as a sequence of native operations,
// G^dag = X_b . G . X_a . Z_b^{phase/pi} up to a global phase.
struct InverseSequence {
    double z_power = 0.0;  // Z on qubit b raised to this power, applied first
    TwoQubitGate gate;     // the original gate, applied after X on qubit a
};
InverseSequence invert_two_qubit_gate(const TwoQubitGate& g);
// 4x4 composition of the sequence, for checking against the adjoint.
Eigen::Matrix4cd compose_inverse_sequence(const InverseSequence& s);

enum class CutMode { full_cut, single_site };
enum class CopyCorrelation { correlated_across_copies, independent_copies };

struct PauliInsertionPlan {
    std::vector<int> cut_cycles;  // 1-based cycle index; layer goes after that cycle's gates
    CutMode mode = CutMode::full_cut;
    int site = 0;  // for single_site
    CopyCorrelation correlation = CopyCorrelation::correlated_across_copies;
};

void validate_plan(const CircuitInstance& inst, const PauliInsertionPlan& plan);

// Instance with freshly sampled Pauli layers at the plan's cut cycles.
CircuitInstance apply_pauli_insertion(const CircuitInstance& inst, const PauliInsertionPlan& plan,
                                      std::uint64_t seed);
// Same, with caller-provided layers (one per cut cycle, in plan order).
CircuitInstance apply_pauli_layers(const CircuitInstance& inst, const PauliInsertionPlan& plan,
                                   const std::vector<PauliLayer>& layers);
// Sample the layers a plan would insert.
std::vector<PauliLayer> sample_insertion_layers(const CircuitInstance& inst,
                                                const PauliInsertionPlan& plan, std::uint64_t seed);

// Canonical text serialization; byte-identical for identical instances.
std::string serialize(const CircuitInstance& inst);
CircuitInstance deserialize(const std::string& text);

// Reference of a two-qubit gate inside an instance, used for phase sweeps and removal.
struct GateRef {
    int cycle = 0;  // 1-based
    int index = 0;  // position in that cycle's tq list
};
std::vector<GateRef> all_two_qubit_gates(const CircuitInstance& inst);
CircuitInstance with_gate_phase(const CircuitInstance& inst, GateRef ref, double phase);
CircuitInstance without_gate(const CircuitInstance& inst, GateRef ref);

}  // namespace otoc::circuits
