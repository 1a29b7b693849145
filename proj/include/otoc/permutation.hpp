#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "otoc/rng.hpp"

namespace otoc::perm {

// Permutation of {0..r-1} stored by images.
struct Permutation {
    std::vector<int> images;

    static Permutation identity(int r);
    static Permutation from_cycle(int r, const std::vector<int>& cycle);  // e.g. {0,1,2,3}
    int r() const { return static_cast<int>(images.size()); }
    Permutation inverse() const;
    Permutation after(const Permutation& first) const;  // (*this) o first
    int n_cycles() const;
    int transpositions() const { return r() - n_cycles(); }  // |sigma|
    bool operator==(const Permutation&) const = default;
    std::string cycle_str() const;
};

// Minimum number of elementary transpositions taking a to b: |a^-1 b|.
int perm_distance(const Permutation& a, const Permutation& b);

// Group tables for S_r (r <= 5 is plenty here).
class SymmetricGroup {
public:
    explicit SymmetricGroup(int r);
    int r() const { return r_; }
    int size() const { return static_cast<int>(perms_.size()); }
    const Permutation& perm(int i) const { return perms_[static_cast<std::size_t>(i)]; }
    int index_of(const Permutation& p) const;
    int compose(int a, int b) const { return comp_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]; }
    int inverse(int a) const { return inv_[static_cast<std::size_t>(a)]; }
    int dist(int a, int b) const { return dist_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]; }

private:
    int r_;
    std::vector<Permutation> perms_;
    std::vector<std::vector<int>> comp_;
    std::vector<int> inv_;
    std::vector<std::vector<int>> dist_;  // |a^-1 b|
};

const SymmetricGroup& s4();
const SymmetricGroup& group_of(int r);

// Weingarten function for dimension D: inverse of the Gram matrix
// G[s][t] = D^{r - |s^-1 t|}.
struct WeingartenTable {
    int r = 0;
    double D = 0.0;
    Eigen::MatrixXd wg;    // wg = G^{-1}, indexed by group element pairs
    Eigen::MatrixXd gram;
};
WeingartenTable weingarten(int r, double D);

// Two-qudit Haar-average transfer tensor over single-site permutation labels:
//   T[tau; mu, nu] = sum_sigma Wg_{d^2}(tau sigma^-1) <sigma|mu>_d <sigma|nu>_d,
// rescaled (when omega is given) by <omega|tau>^2 / (<omega|mu><omega|nu>), which
// makes the total output weight exactly 1 for every input pair.
struct TransferTensor {
    int r = 0;
    int d = 0;
    int R = 0;  // r!
    bool rescaled = false;
    int omega = 0;          // group index of the rescaling permutation
    std::vector<double> t;  // [tau + R*(mu + R*nu)]
    double at(int tau, int mu, int nu) const {
        return t[static_cast<std::size_t>(tau) + static_cast<std::size_t>(R) * (static_cast<std::size_t>(mu) + static_cast<std::size_t>(R) * static_cast<std::size_t>(nu))];
    }
};
TransferTensor transfer_tensor(int r, int d);
TransferTensor transfer_tensor_rescaled(int r, int d, const Permutation& omega);

// Single-site overlap <a|b> = d^{r - |a^-1 b|}.
double overlap(const SymmetricGroup& g, int a, int b, int d, int r);

// Solutions of |omega^-1 a| + |a| = |omega| in S_4.
std::vector<Permutation> stable_permutations(const Permutation& omega);

// --- mean OTOC^1 front (r = 2 biased walk) -------------------------------------

// Exact mean OTOC^1(x, t) for the 1D brickwork Haar circuit: domain-wall walk
// with hop probability p = d^2/(d^2+1), exact binomial evolution.
struct WalkProfile {
    int chain = 0;
    int layers = 0;
    std::vector<double> profile;       // mean OTOC^1 at sites 1..chain (0-based index)
    std::vector<double> wall_weights;  // quasi-probabilities of wall positions 0..chain
};
WalkProfile otoc1_walk_profile(int d, int chain, int layers);
// Closed-form front value at one site.
double otoc1_front_closed_form(int d, int t, int x, int x0);

double butterfly_velocity(int d);   // (d^2-1)/(d^2+1)
double front_diffusion(int d);      // 2 d^2/(d^2+1)^2

// --- exact short-chain permutation evolution ------------------------------------

struct PermEvolutionResult {
    // final rescaled coefficients per configuration (site labels packed base r!)
    std::unordered_map<std::uint64_t, double> coefficients;
    std::vector<double> mean_otoc_profile;  // per measurement site
    double total_weight = 0.0;              // conserved, = 1 for a Pauli butterfly
};

// 1D brickwork layout, butterfly = non-identity Pauli on site 0. For r=2 this
// is the exact domain-wall walk computed through the transfer tensor; r=4
// gives the mean OTOC^2 profile.
PermEvolutionResult exact_perm_evolution(int r, int d, int chain, int layers,
                                         std::size_t config_cap = 1u << 24);

// --- trajectory sampler for the mean OTOC^2 -------------------------------------

struct ChainLayout {
    int chain = 0;
    int layers = 0;
    std::vector<std::vector<std::pair<int, int>>> gates;  // per layer (brickwork)
    static ChainLayout brickwork(int chain, int layers);
    int total_gates() const;
};

enum class SamplerBasis { b1_full24, b2_independent14 };

struct TrajectoryDiagnostics {
    double var_omega = 0.0;
    double mean_sign = 0.0;
    std::vector<double> var_omega_by_gate;       // after each applied gate
    std::vector<double> log10_weight_histogram;  // 50 bins
    double hist_lo = 0.0, hist_hi = 0.0;
};

struct TrajectoryResult {
    double estimate = 0.0;  // sum(omega M) / sum(omega)
    double stderr = 0.0;
    TrajectoryDiagnostics diag;
};

// Incremental per-gate categorical sampling p ~ |T| with sign/magnitude
// reweighting; the estimate targets the mean OTOC^2 at the chain's far end.
TrajectoryResult trajectory_sampler_c4(const ChainLayout& layout, int d, int n_trajectories,
                                       std::uint64_t seed, int measure_site = -1,
                                       SamplerBasis basis = SamplerBasis::b1_full24);

}  // namespace otoc::perm
