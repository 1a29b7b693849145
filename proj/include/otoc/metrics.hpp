#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace otoc::metrics {

// Per-instance signal values, optionally paired with exact references.
struct SignalSet {
    std::vector<double> values;
    std::string label;
    std::optional<std::vector<double>> exact;
};

// Sets with zero spread produce the capped sentinel instead of an infinity so
// CSV consumers stay finite.
constexpr double kSnrCap = 1e9;

// (x - mean) / sigma with the population sigma (1/M normalization).
SignalSet rescale(const SignalSet& s);

double pearson(const SignalSet& a, const SignalSet& b);
// 1 / sqrt(mean squared rescaled difference) = 1 / sqrt(2 (1 - rho)).
double snr(const SignalSet& a, const SignalSet& b);

// Mean SNR between two uncorrelated mean-subtracted Gaussian signal sets over
// M instances: sqrt(M/2) * E[1/chi_{M-1}].
double uncorrelated_snr_baseline(int m_instances);

struct NoiseModelParams {
    double g = 1.0;        // damping mean
    double c = 0.0;        // additive mean
    double sigma_m = 0.0;  // multiplicative spread
    double sigma_a = 0.0;  // additive spread
    Eigen::Matrix4d covariance = Eigen::Matrix4d::Zero();

    double se(int i) const { return std::sqrt(std::max(0.0, covariance(i, i))); }
};

// C_nois = s C_ex + eps with s ~ N(g, g sigma_m), eps ~ N(c, sigma_a).
SignalSet simulate_noise_model(const SignalSet& exact, const NoiseModelParams& p,
                               std::uint64_t seed);

double noise_model_log_likelihood(const std::vector<double>& nois,
                                  const std::vector<double>& exact, double g, double c,
                                  double sigma_m, double sigma_a);

// Maximum-likelihood fit of (g, c, sigma_m, sigma_a); covariance from the
// inverse numerical Hessian of the negative log-likelihood.
NoiseModelParams fit_noise_model_mle(const SignalSet& nois, const SignalSet& exact);

// Consistency predictions of the model.
double predicted_c(const SignalSet& nois, const SignalSet& exact, double g);
double predicted_g(const SignalSet& nois, const SignalSet& exact);  // from rho identity
double predicted_rho(const SignalSet& nois, const SignalSet& exact, const NoiseModelParams& p);

struct SnrProjection {
    std::vector<double> snr_samples;
    double median = 0.0;
    double ci_lo = 0.0;  // 2.5 percentile
    double ci_hi = 0.0;  // 97.5 percentile
};

// The five-step resampling procedure: multiplicative N(1, sigma_m), additive
// N(0, sigma_a), shot N(0, sigma_s), SNR against the original set, repeated.
SnrProjection project_snr(const SignalSet& measured, const NoiseModelParams& p, double shot_sigma,
                          int n_resamples, std::uint64_t seed);

// C_hybrid = C_cls + (sigma(C_cls) / sigma(C_cls_exp)) * (C_exp - C_cls_exp).
SignalSet hybrid_estimate(const SignalSet& classical, const SignalSet& experiment,
                          const SignalSet& classical_on_experiment);

}  // namespace otoc::metrics
