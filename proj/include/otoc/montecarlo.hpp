#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "otoc/circuits.hpp"
#include "otoc/liouville.hpp"
#include "otoc/statevector.hpp"

namespace otoc::mc {

struct McEstimate {
    double value = 0.0;
    double stderr = 0.0;
    long long samples = 0;
    std::map<std::string, double> diagnostics;
};

// Pauli-path sampling gate by gate from |<Q|G|P>|^2; the per-sample observable
// is the commutation sign with M. Estimates the all-cuts Pauli-averaged OTOC^1.
// Gates with a deterministic transfer column consume no randomness, so path
// streams are stable under gate removal.
McEstimate vanilla_mc_otoc1(const circuits::CircuitInstance& inst, int samples,
                            std::uint64_t seed, sv::Exec ex = sv::Exec::parallel);

enum class SitePolicy { far_from_qm };

struct CmcConfig {
    std::size_t cache_limit = 1u << 20;
    double tol = 0.001;                     // truncation threshold: b^2 < tol/|cache|
    SitePolicy projection_site_policy = SitePolicy::far_from_qm;
    int samples = 100;
    std::uint64_t seed = 1;
    // Projections applied after the given cycles regardless of cache pressure.
    std::vector<std::pair<int, int>> forced_projections;  // (cycle, site)
};

// Sparse Heisenberg evolution with stochastic single-site projections when the
// cache overfills, small-element truncation, and the wave-function readout
// <psi| M |psi> with psi = sum_P b_P P |0...0>.
McEstimate cached_mc_otoc1(const circuits::CircuitInstance& inst, const CmcConfig& cfg,
                           sv::Exec ex = sv::Exec::parallel);

enum class PairingKind { AABB, ABAB, ABBA, AAAA, sum_of_four };
enum class FirstHalf { cached, vanilla };

struct PairingConfig {
    int cut_cycle = 0;
    PairingKind pairing = PairingKind::sum_of_four;
    int samples = 100;
    std::uint64_t seed = 1;
    FirstHalf first_half = FirstHalf::cached;
    std::size_t first_half_cap = 1u << 22;
};

// OTOC^2 from the classically samplable pairings: strings drawn at the cut
// from |b_P(1)|^2, the four-string expectation evaluated exactly on the
// second half. sum_of_four = AABB + ABAB + ABBA - 2 AAAA.
McEstimate diagonal_pairings_otoc2(const circuits::CircuitInstance& inst,
                                   const PairingConfig& cfg, sv::Exec ex = sv::Exec::parallel);

// Heisenberg evolution with a hard Pauli-weight cap L (renormalizing after
// each truncation), then C^(4) = <0|BMBMBMB|0> by the staged sparse algorithm.
double pauli_weight_truncated_otoc2(const circuits::CircuitInstance& inst, int max_weight,
                                    double r_cap = 8e6);

// 192 p^4 - 192 p^3 + 72 p^2 - 12 p + 1: per-site probability that four
// independently drawn symbols with distribution (1-3p, p, p, p) have a
// trace-nonzero product.
double weight_count_polynomial(double p);

// log K(L) = n log P(L/(3n)) + 4 L log 3 + 4 log C(n, L) for L = 0..n.
std::vector<double> log_contribution_curve(int n);
int contribution_peak(int n);

struct GateImpact {
    circuits::GateRef gate;
    double proxy_snr = 0.0;  // SNR of the proxy with this gate removed vs baseline
};

struct GateRankingResult {
    std::vector<GateImpact> ranking;     // least impactful first
    std::vector<double> cumulative_snr;  // proxy SNR after removing the first N gates
    double fit_amplitude = 0.0;          // SNR(N) ~ A exp(-N / tau)
    double fit_tau = 0.0;
};

// Orders two-qubit gates by the SNR reduction their removal causes in the
// vanilla-MC OTOC^1 proxy over an ensemble sharing one gate layout.
GateRankingResult gate_removal_ranking(const std::vector<circuits::CircuitInstance>& ensemble,
                                       int proxy_samples, std::uint64_t seed,
                                       sv::Exec ex = sv::Exec::parallel);

// Synthetic model of the four-copy projection step: 64 trace-nonzero symbol
// combinations whose weights do not form a probability distribution, so the
// measure is reweighted by sum |W| (about 4) at every projection.
struct SignProblemDiag {
    std::vector<double> stderr_by_projection;  // stderr of the reweighted mean
    double mean_sum_abs_w = 0.0;
    double min_growth_factor = 0.0;  // min over consecutive projections
};
SignProblemDiag otoc2_projection_reweighting_demo(int n_projections, int samples,
                                                  std::uint64_t seed);

}  // namespace otoc::mc
