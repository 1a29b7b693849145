#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "otoc/statevector.hpp"

namespace otoc::rmt {

inline constexpr double kGammaStar = 1.0 / 3.0;

struct SelfEnergySolution {
    double phi = 0.0;
    double gamma = 0.0;
    std::complex<double> epsilon;  // physical branch, Im <= 0
    std::string branch;            // "complex" or "real" (gap region)
    double residual = 0.0;
};

// One solution of the self-consistency relation per grid point, tracked by a
// homotopy in gamma from the flat-density solution at gamma = 2.
SelfEnergySolution solve_self_energy(double gamma, double phi);
std::vector<SelfEnergySolution> solve_self_energy_curve(double gamma,
                                                        const std::vector<double>& phi_grid);

struct SpectralDensityCurve {
    std::vector<double> phi_grid;
    std::vector<double> density;
};

SpectralDensityCurve spectral_density(double gamma, const std::vector<double>& phi_grid);
// Density at a single angle.
double spectral_density_at(double gamma, double phi);

// Closed-form gap half-width: sqrt(108/17) (gamma*-gamma)^{3/2} below the
// transition, zero above.
double gap(double gamma);
// Support edge measured from the solver: smallest |phi - pi/2| where the
// self-energy turns complex (bisection to the given tolerance).
double measured_gap(double gamma, double tol = 1e-10);

// Closed forms for C^(2k)(gamma), k = 1, 2, 3.
double closed_form_otoc(double gamma, int k);
// Semicircle-regime form J_1(8 k sqrt(gamma)) / (4 k sqrt(gamma)).
double semicircle_otoc(double gamma, int k);
// Deep-k asymptote cos(8 sqrt(gamma) k - 3 pi/4) / (8 sqrt(pi) gamma^{3/4} k^{3/2}).
double semicircle_otoc_asymptote(double gamma, int k);

enum class ScalingSide { above, below };
// Critical scaling functions R+/- including the step at |x| = sqrt(108/17).
double scaling_function(double x, ScalingSide side);

struct EnsembleSample {
    std::vector<double> eigenphases;           // pooled over draws, ascending
    std::vector<double> otoc_mean;             // C^(2k) ensemble means, k = 1..k_max
    std::vector<double> otoc_stderr;
    int n_draws = 0;
};

// GUE H with <H_ij H_kl> = (gamma/D_H) delta_il delta_jk, U = (1-iH)/(1+iH),
// C = Z_M U^dag Z_B U with Z_M, Z_B on qubits 0 and 1. Moments come from the
// exact spectrum of the Hermitian part (cos phi suffices for cos(2k phi)).
EnsembleSample sample_ensemble(double gamma, int dim, int n_draws, std::uint64_t seed,
                               int k_max = 3, bool keep_phases = false);

struct GammaOfDepth {
    std::vector<int> t;
    std::vector<double> gap_full_width;  // empty-arc width around pi/2
    std::vector<double> gamma;           // inverted through the gap law
    std::vector<bool> gapless;
};

// Median circuit-spectrum gap per depth, inverted through gap(gamma); gapless
// samples are reported as gamma >= gamma*.
GammaOfDepth match_gamma_to_depth(const std::vector<std::vector<sv::SpectralSample>>& per_t,
                                  const std::vector<int>& t_values);

}  // namespace otoc::rmt
