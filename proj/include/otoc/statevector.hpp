#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "otoc/circuits.hpp"
#include "otoc/pauli.hpp"

namespace otoc::sv {

using cplx = std::complex<double>;

// Kernel execution policy. The parallel path uses OpenMP; the serial path is
// the reference implementation the parallel kernels are tested against.
enum class Exec { serial, parallel };

struct Limits {
    int dense_qubits = 26;     // statevector cap
    int spectrum_qubits = 12;  // dense-diagonalization cap
};
Limits& limits();

struct StateVector {
    int n = 0;
    std::vector<cplx> amp;

    static StateVector zero_state(int n);
    static StateVector bitstring(int n, std::uint64_t bits);
    double norm() const;
};

// --- kernels -----------------------------------------------------------------
namespace kernels {
void apply_1q(std::span<cplx> amp, int site, const Eigen::Matrix2cd& u, Exec ex);
void apply_2q(std::span<cplx> amp, int a, int b, const Eigen::Matrix4cd& u, Exec ex);
// X on all sites in xmask, Z on all in zmask (Y where both), with exact phases
void apply_pauli(std::span<cplx> amp, std::uint64_t xmask, std::uint64_t zmask, Exec ex);
cplx inner(std::span<const cplx> a, std::span<const cplx> b, Exec ex);
double sum_sq(std::span<const cplx> a, Exec ex);
}  // namespace kernels

// --- circuit application -----------------------------------------------------
enum class Direction { forward, inverse };

void apply_circuit(const circuits::CircuitInstance& inst, StateVector& psi,
                   Direction dir = Direction::forward, Exec ex = Exec::parallel);
// Cycles [first_cycle, last_cycle] only (1-based, inclusive).
void apply_circuit_range(const circuits::CircuitInstance& inst, StateVector& psi, int first_cycle,
                         int last_cycle, Direction dir = Direction::forward,
                         Exec ex = Exec::parallel);
StateVector evolve(const circuits::CircuitInstance& inst, const StateVector& initial,
                   Exec ex = Exec::parallel);

void apply_pauli_string(StateVector& psi, const PauliString& p, Exec ex = Exec::parallel);

// --- observables -------------------------------------------------------------
struct Initial {
    enum class Kind { zero_state, bitstring, infinite_temperature } kind = Kind::zero_state;
    std::uint64_t bits = 0;       // for bitstring
    int samples = 64;             // for infinite_temperature
    bool exhaustive = false;      // average all 2^n bitstrings
    std::uint64_t seed = 1;

    static Initial zero() { return {}; }
    static Initial bits_of(std::uint64_t b) { return {Kind::bitstring, b, 0, false, 0}; }
    static Initial inf_temp(int samples, std::uint64_t seed) {
        return {Kind::infinite_temperature, 0, samples, false, seed};
    }
    static Initial inf_temp_exhaustive() {
        return {Kind::infinite_temperature, 0, 0, true, 0};
    }
};

struct Estimate {
    double value = 0.0;
    double stderr = 0.0;
};

// C^(2k) = <(B(t) M)^{2k}>, M = Z at q_m, B = X at each q_b site.
double otoc_k(const circuits::CircuitInstance& inst, int k, const Initial& initial = {},
              Exec ex = Exec::parallel);
// Same correlator with per-copy circuits: copies[j] supplies the unitary for
// the j-th B(t) block (j = 0..2k-1). Used for copy-dependent Pauli insertion.
double otoc_k_multi(std::span<const circuits::CircuitInstance* const> copies, int k,
                    const Initial& initial = {}, Exec ex = Exec::parallel);

// <M(t) M> averaged over the two eigenstates of M.
double toc(const circuits::CircuitInstance& inst, Exec ex = Exec::parallel);

struct SamplingSpec {
    bool exhaustive = false;
    int n_samples = 1000;
    std::uint64_t seed = 1;
    int exhaustive_cap = 1 << 16;  // max enumerated insertions
};

// Mean over the inserted-Pauli ensemble of otoc_k on the modified instance.
// independent_copies draws one insertion per copy pair (k draws per sample).
Estimate pauli_averaged_otoc(const circuits::CircuitInstance& inst,
                             const circuits::PauliInsertionPlan& plan, int k,
                             const SamplingSpec& spec, const Initial& initial = {},
                             Exec ex = Exec::parallel);

// --- correlation-operator spectra ---------------------------------------------
struct SpectralSample {
    std::vector<double> eigenphases;  // ascending, in (-pi, pi]
    std::string instance_id;
};

// signed_phases resolves each eigenphase's sign exactly (needs eigenvectors);
// mirrored reconstructs the multiset from |cos phi| eigenvalues using the
// exact parity symmetry S(phi)=S(-phi), at a fraction of the cost.
enum class SpectrumMethod { signed_phases, mirrored };

SpectralSample correlation_spectrum(const circuits::CircuitInstance& inst,
                                    SpectrumMethod method = SpectrumMethod::signed_phases,
                                    Exec ex = Exec::parallel);

// Largest empty arc containing pi/2, from binned counts (bin width 2*pi/256 by
// default, >= 3 consecutive empty bins); returns half-width of the arc.
double spectral_gap(const SpectralSample& s, int bins = 256, int min_run = 3);

// --- noise --------------------------------------------------------------------
// Uniform local depolarizing noise: after each gate, with the given probability
// a uniformly random Pauli (identity included) is applied to the gate's support.
Estimate depolarized_otoc(const circuits::CircuitInstance& inst, int k, double p_1q, double p_2q,
                          int n_trajectories, std::uint64_t seed, const Initial& initial = {},
                          Exec ex = Exec::parallel);

// --- raw-matrix circuits (Haar ensembles) --------------------------------------
struct RawGate {
    int a = 0;
    int b = 0;
    Eigen::Matrix4cd u;
};
struct RawCircuit {
    int n = 0;
    std::vector<std::vector<RawGate>> layers;
};

// 1D brickwork circuit of Haar-random two-qubit gates.
RawCircuit haar_brickwork_chain(int n, int layers, std::uint64_t seed);
Eigen::Matrix4cd haar_unitary_4(Philox& rng);

void apply_raw(const RawCircuit& c, StateVector& psi, Direction dir, Exec ex = Exec::parallel);
double otoc_k_raw(const RawCircuit& c, int k, int q_m, const std::vector<int>& q_b,
                  const Initial& initial = {}, Exec ex = Exec::parallel);
SpectralSample correlation_spectrum_raw(const RawCircuit& c, int q_m, int q_b,
                                        SpectrumMethod method = SpectrumMethod::signed_phases,
                                        Exec ex = Exec::parallel);

// Eigenphase closest to +-pi/2, found by Lanczos on 1 - K^2 with
// K = (C + C^dag)/2 applied through circuit passes; no dense matrix is formed.
// The empty-arc width around pi/2 equals twice the returned distance.
double min_phase_distance_to_half_pi(const RawCircuit& c, int q_m, int q_b, int iterations = 600,
                                     std::uint64_t seed = 1, Exec ex = Exec::parallel);

}  // namespace otoc::sv
