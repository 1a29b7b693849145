#include "otoc/metrics.hpp"

#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "otoc/rng.hpp"
#include "otoc/stats.hpp"

namespace otoc::metrics {

namespace {
void require_pair(const SignalSet& a, const SignalSet& b, std::size_t min_len) {
    if (a.values.size() != b.values.size())
        throw std::invalid_argument("signal sets must have equal lengths");
    if (a.values.size() < min_len)
        throw std::invalid_argument("signal sets too short for this operation");
}
}  // namespace

SignalSet rescale(const SignalSet& s) {
    if (s.values.size() < 2) throw std::invalid_argument("rescale: need >= 2 instances");
    double m = stats::mean_of(s.values);
    double sd = stats::stdev_of(s.values);
    if (sd <= 0.0) throw std::invalid_argument("rescale: zero variance");
    SignalSet out = s;
    for (auto& v : out.values) v = (v - m) / sd;
    return out;
}

double pearson(const SignalSet& a, const SignalSet& b) {
    require_pair(a, b, 3);
    return stats::pearson_of(a.values, b.values);
}

double snr(const SignalSet& a, const SignalSet& b) {
    require_pair(a, b, 3);
    SignalSet ra = rescale(a), rb = rescale(b);
    double msd = 0.0;
    for (std::size_t i = 0; i < ra.values.size(); ++i) {
        double d = ra.values[i] - rb.values[i];
        msd += d * d;
    }
    msd /= static_cast<double>(ra.values.size());
    if (msd < 1.0 / (kSnrCap * kSnrCap)) return kSnrCap;
    return 1.0 / std::sqrt(msd);
}

double uncorrelated_snr_baseline(int m) {
    if (m < 3) throw std::invalid_argument("uncorrelated_snr_baseline: M >= 3");
    // sqrt(M/2) E[1/chi_{M-1}], E[1/chi_k] = Gamma((k-1)/2) / (sqrt(2) Gamma(k/2))
    double k = m - 1;
    return std::sqrt(m / 2.0) *
           std::exp(std::lgamma((k - 1.0) / 2.0) - std::lgamma(k / 2.0)) / std::sqrt(2.0);
}

SignalSet simulate_noise_model(const SignalSet& exact, const NoiseModelParams& p,
                               std::uint64_t seed) {
    if (p.sigma_m < 0 || p.sigma_a < 0)
        throw std::invalid_argument("simulate_noise_model: negative spreads");
    SignalSet out;
    out.label = exact.label + "_nois";
    out.values.reserve(exact.values.size());
    for (std::size_t i = 0; i < exact.values.size(); ++i) {
        Philox rng = substream(seed, 0x6d6f64, i);
        double s = p.g + p.g * p.sigma_m * gaussian(rng);
        double eps = p.c + p.sigma_a * gaussian(rng);
        out.values.push_back(s * exact.values[i] + eps);
    }
    return out;
}

double noise_model_log_likelihood(const std::vector<double>& nois,
                                  const std::vector<double>& exact, double g, double c,
                                  double sigma_m, double sigma_a) {
    double ll = 0.0;
    for (std::size_t i = 0; i < nois.size(); ++i) {
        double var = sigma_a * sigma_a + exact[i] * exact[i] * g * g * sigma_m * sigma_m;
        if (var < 1e-300) var = 1e-300;
        double d = nois[i] - g * exact[i] - c;
        ll += -0.5 * std::log(var) - d * d / (2.0 * var);
    }
    return ll;
}

namespace {

struct MleData {
    const std::vector<double>* nois;
    const std::vector<double>* exact;
};

double neg_ll(const gsl_vector* v, void* params) {
    auto* d = static_cast<MleData*>(params);
    return -noise_model_log_likelihood(*d->nois, *d->exact, gsl_vector_get(v, 0),
                                       gsl_vector_get(v, 1), gsl_vector_get(v, 2),
                                       gsl_vector_get(v, 3));
}

Eigen::Vector4d run_simplex(const MleData& data, const Eigen::Vector4d& start, double step,
                            double* fmin) {
    gsl_multimin_function f;
    f.n = 4;
    f.f = &neg_ll;
    f.params = const_cast<MleData*>(&data);
    gsl_vector* x = gsl_vector_alloc(4);
    gsl_vector* ss = gsl_vector_alloc(4);
    for (int i = 0; i < 4; ++i) {
        gsl_vector_set(x, i, start(i));
        gsl_vector_set(ss, i, step * std::max(0.05, std::abs(start(i))));
    }
    gsl_multimin_fminimizer* m =
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 4);
    gsl_multimin_fminimizer_set(m, &f, x, ss);
    int status = GSL_CONTINUE;
    for (int it = 0; it < 4000 && status == GSL_CONTINUE; ++it) {
        if (gsl_multimin_fminimizer_iterate(m) != 0) break;
        status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(m), 1e-10);
    }
    Eigen::Vector4d out;
    for (int i = 0; i < 4; ++i) out(i) = gsl_vector_get(m->x, i);
    if (fmin) *fmin = m->fval;
    gsl_multimin_fminimizer_free(m);
    gsl_vector_free(x);
    gsl_vector_free(ss);
    if (status != GSL_SUCCESS && status != GSL_CONTINUE)
        throw std::runtime_error("fit_noise_model_mle: simplex failed to converge");
    return out;
}

}  // namespace

double predicted_g(const SignalSet& nois, const SignalSet& exact) {
    return stats::pearson_of(nois.values, exact.values) * stats::stdev_of(nois.values) /
           stats::stdev_of(exact.values);
}

double predicted_c(const SignalSet& nois, const SignalSet& exact, double g) {
    return stats::mean_of(nois.values) - g * stats::mean_of(exact.values);
}

double predicted_rho(const SignalSet& nois, const SignalSet& exact, const NoiseModelParams& p) {
    double mean_sq = 0.0;
    for (double v : exact.values) mean_sq += v * v;
    mean_sq /= static_cast<double>(exact.values.size());
    double sn = stats::stdev_of(nois.values);
    double val = 1.0 - (p.sigma_a * p.sigma_a + p.g * p.g * p.sigma_m * p.sigma_m * mean_sq) /
                           (sn * sn);
    return val > 0 ? std::sqrt(val) : 0.0;
}

NoiseModelParams fit_noise_model_mle(const SignalSet& nois, const SignalSet& exact) {
    require_pair(nois, exact, 10);
    MleData data{&nois.values, &exact.values};

    // moment-based starting point, then restarts around it
    double g0 = predicted_g(nois, exact);
    double c0 = predicted_c(nois, exact, g0);
    Eigen::Vector4d best;
    double best_f = 1e300;
    const double sd_n = stats::stdev_of(nois.values);
    for (double sm0 : {0.05, 0.2, 0.5}) {
        for (double sa0 : {0.1 * sd_n, 0.5 * sd_n}) {
            double f = 0.0;
            Eigen::Vector4d start(g0, c0, sm0, sa0);
            Eigen::Vector4d sol = run_simplex(data, start, 0.4, &f);
            // polish
            sol = run_simplex(data, sol, 0.05, &f);
            if (f < best_f) {
                best_f = f;
                best = sol;
            }
        }
    }
    NoiseModelParams p;
    p.g = best(0);
    p.c = best(1);
    p.sigma_m = std::abs(best(2));  // likelihood depends on sigma^2 only
    p.sigma_a = std::abs(best(3));

    // covariance from the inverse Hessian (central differences)
    Eigen::Vector4d x(p.g, p.c, p.sigma_m, p.sigma_a);
    Eigen::Matrix4d hess;
    auto nll = [&](const Eigen::Vector4d& v) {
        return -noise_model_log_likelihood(nois.values, exact.values, v(0), v(1), v(2), v(3));
    };
    const double f0 = nll(x);
    for (int i = 0; i < 4; ++i) {
        double hi = 1e-4 * std::max(0.05, std::abs(x(i)));
        for (int j = i; j < 4; ++j) {
            double hj = 1e-4 * std::max(0.05, std::abs(x(j)));
            if (i == j) {
                Eigen::Vector4d xp = x, xm = x;
                xp(i) += hi;
                xm(i) -= hi;
                hess(i, i) = (nll(xp) - 2 * f0 + nll(xm)) / (hi * hi);
            } else {
                Eigen::Vector4d xpp = x, xpm = x, xmp = x, xmm = x;
                xpp(i) += hi; xpp(j) += hj;
                xpm(i) += hi; xpm(j) -= hj;
                xmp(i) -= hi; xmp(j) += hj;
                xmm(i) -= hi; xmm(j) -= hj;
                hess(i, j) = hess(j, i) =
                    (nll(xpp) - nll(xpm) - nll(xmp) + nll(xmm)) / (4 * hi * hj);
            }
        }
    }
    Eigen::FullPivLU<Eigen::Matrix4d> lu(hess);
    if (lu.isInvertible()) p.covariance = lu.inverse();
    return p;
}

SnrProjection project_snr(const SignalSet& measured, const NoiseModelParams& p, double shot_sigma,
                          int n_resamples, std::uint64_t seed) {
    SnrProjection out;
    out.snr_samples.reserve(static_cast<std::size_t>(n_resamples));
    const std::size_t m = measured.values.size();
    for (int rep = 0; rep < n_resamples; ++rep) {
        Philox rng = substream(seed, 0x70726f, static_cast<std::uint64_t>(rep));
        SignalSet replica;
        replica.values.reserve(m);
        for (std::size_t i = 0; i < m; ++i) {
            double v = measured.values[i];
            v *= 1.0 + p.sigma_m * gaussian(rng);   // step 1: multiplicative N(1, sigma_m)
            v += p.sigma_a * gaussian(rng);         // step 2: additive N(0, sigma_a)
            v += shot_sigma * gaussian(rng);        // step 3: shot noise N(0, sigma_s)
            replica.values.push_back(v);
        }
        out.snr_samples.push_back(snr(replica, measured));  // step 4
    }
    std::vector<double> sorted = out.snr_samples;
    std::sort(sorted.begin(), sorted.end());
    auto pct = [&](double q) {
        double idx = q * static_cast<double>(sorted.size() - 1);
        std::size_t lo = static_cast<std::size_t>(idx);
        std::size_t hi = std::min(lo + 1, sorted.size() - 1);
        double w = idx - static_cast<double>(lo);
        return sorted[lo] * (1 - w) + sorted[hi] * w;
    };
    out.median = pct(0.5);
    out.ci_lo = pct(0.025);
    out.ci_hi = pct(0.975);
    return out;
}

SignalSet hybrid_estimate(const SignalSet& classical, const SignalSet& experiment,
                          const SignalSet& classical_on_experiment) {
    require_pair(classical, experiment, 2);
    require_pair(classical, classical_on_experiment, 2);
    double s_cls = stats::stdev_of(classical.values);
    double s_ce = stats::stdev_of(classical_on_experiment.values);
    if (s_ce <= 0.0) throw std::invalid_argument("hybrid_estimate: zero sigma(C_cls,exp)");
    SignalSet out;
    out.label = "hybrid";
    for (std::size_t i = 0; i < classical.values.size(); ++i) {
        double off = experiment.values[i] - classical_on_experiment.values[i];
        out.values.push_back(classical.values[i] + s_cls / s_ce * off);
    }
    return out;
}

}  // namespace otoc::metrics
