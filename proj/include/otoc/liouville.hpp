#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "otoc/circuits.hpp"
#include "otoc/pauli.hpp"

namespace otoc::liouville {

// Conjugation action of a gate on the Pauli basis: entries T[q][p] equal the
// normalized trace of (P_q g^dag P_p g). Columns give the expansion of
// g^dag P_p g; the matrix is real orthogonal.
struct GateTransfer1 {
    std::array<std::array<double, 4>, 4> m{};
};
struct GateTransfer2 {
    std::array<std::array<double, 16>, 16> m{};
};

GateTransfer1 gate_transfer(const circuits::SingleQubitGate& g);
GateTransfer2 gate_transfer(const circuits::TwoQubitGate& g);

// Caches two-qubit transfers per distinct conditional phase.
class TransferCache {
public:
    const GateTransfer2& get(const circuits::TwoQubitGate& g);

private:
    std::unordered_map<std::uint64_t, GateTransfer2> by_phase_bits_;
};

// Heisenberg operator in the Pauli basis: map from symbol string to real
// coefficient, squared-normalized for a Pauli initial operator.
class SparseOperator {
public:
    using Map = std::unordered_map<PauliKey, double, PauliKeyHash>;

    SparseOperator() = default;
    SparseOperator(int n, Map terms) : n_(n), terms_(std::move(terms)) {}
    static SparseOperator from_pauli(const PauliString& p);

    int n() const { return n_; }
    const Map& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    double coeff(const PauliKey& k) const;
    double norm_sq() const;  // compensated sum of squared coefficients
    void scale(double f);

    std::string dump_top(std::size_t count) const;  // debug: largest |coeff| terms

    Map& mutable_terms() { return terms_; }

private:
    int n_ = 0;
    Map terms_;
};

void apply_gate(SparseOperator& op, const circuits::SingleQubitGate& g, const GateTransfer1& t);
void apply_gate(SparseOperator& op, const circuits::TwoQubitGate& g, const GateTransfer2& t);
// Conjugation by a Pauli layer (diagonal in the Pauli basis, signs only).
void apply_pauli_layer(SparseOperator& op, const circuits::PauliLayer& lay);

// Heisenberg evolution B -> U^dag B U restricted to circuit cycles
// [first_cycle, last_cycle] (1-based, inclusive). The cycle adjacent to the
// butterfly operator is the last circuit cycle, so cycles are consumed in
// descending order, each with its internal gate order reversed.
void evolve_cycles(SparseOperator& op, const circuits::CircuitInstance& inst, int first_cycle,
                   int last_cycle, TransferCache& cache);

// +1 iff P and M commute; the (-1)^{P,M} trace sign.
int trace_sign(const PauliString& p, const PauliString& m);

// Single-site trace condition: Tr[abcd] != 0 iff the product is proportional
// to the identity.
bool quadruple_trace_nonzero(PauliSym a, PauliSym b, PauliSym c, PauliSym d);
int count_quadruples_nonzero();       // over all 4^4 = 256
int count_quadruples_pairwise();      // restricted to a=b, c=d

// psi = sum_P b_P P|0..0>, as a sparse map basis-state -> amplitude.
std::unordered_map<std::uint64_t, std::complex<double>> wavefunction_on_zero(
    const SparseOperator& op);
// <psi| Z_qm |psi> for the wavefunction above.
double z_expectation_on_zero(const SparseOperator& op, int q_m);

}  // namespace otoc::liouville
