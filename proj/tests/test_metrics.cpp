#include <doctest.h>

#include <cmath>

#include "otoc/metrics.hpp"
#include "otoc/rng.hpp"
#include "otoc/stats.hpp"

using namespace otoc;
using namespace otoc::metrics;

namespace {
SignalSet gaussians(int m, std::uint64_t seed, double mean = 0.0, double sd = 1.0) {
    SignalSet s;
    Philox rng(seed, 0x5e7);
    for (int i = 0; i < m; ++i) s.values.push_back(mean + sd * gaussian(rng));
    return s;
}
}  // namespace

TEST_CASE("rescale: affine invariance, idempotence, moments, zero-variance error") {
    SignalSet s = gaussians(50, 3, 0.7, 2.5);
    SignalSet r = rescale(s);
    CHECK(std::abs(stats::mean_of(r.values)) < 1e-12);
    CHECK(stats::stdev_of(r.values) == doctest::Approx(1.0).epsilon(1e-12));
    SignalSet shifted = s;
    for (auto& v : shifted.values) v = 3.0 * v - 11.0;
    SignalSet r2 = rescale(shifted);
    for (std::size_t i = 0; i < r.values.size(); ++i)
        CHECK(r.values[i] == doctest::Approx(r2.values[i]).epsilon(1e-10));
    SignalSet rr = rescale(r);
    for (std::size_t i = 0; i < r.values.size(); ++i)
        CHECK(rr.values[i] == doctest::Approx(r.values[i]).epsilon(1e-12));
    SignalSet flat;
    flat.values = {1.0, 1.0, 1.0};
    CHECK_THROWS(rescale(flat));
}

TEST_CASE("snr identity with pearson holds to 1e-10; identical sets hit the cap") {
    SignalSet a = gaussians(80, 5), b = gaussians(80, 6);
    for (std::size_t i = 0; i < b.values.size(); ++i)
        b.values[i] = 0.6 * a.values[i] + 0.8 * b.values[i];
    double rho = pearson(a, b);
    CHECK(snr(a, b) == doctest::Approx(1.0 / std::sqrt(2.0 * (1.0 - rho))).epsilon(1e-10));
    CHECK(snr(a, a) == doctest::Approx(kSnrCap));
}

TEST_CASE("synthetic correlated pair with rho=0.5 gives SNR 1 through the identity") {
    // construct x, y with exact sample correlation 1/2 via Gram-Schmidt
    SignalSet x = gaussians(200, 7), g = gaussians(200, 8);
    x = rescale(x);
    // orthogonalize g against x, then mix
    double proj = 0.0;
    for (std::size_t i = 0; i < g.values.size(); ++i) proj += x.values[i] * g.values[i];
    proj /= static_cast<double>(g.values.size());
    SignalSet y;
    for (std::size_t i = 0; i < g.values.size(); ++i)
        y.values.push_back(g.values[i] - proj * x.values[i]);
    y = rescale(y);
    const double rho = 0.5;
    SignalSet mix;
    for (std::size_t i = 0; i < y.values.size(); ++i)
        mix.values.push_back(rho * x.values[i] + std::sqrt(1 - rho * rho) * y.values[i]);
    CHECK(pearson(x, mix) == doctest::Approx(rho).epsilon(1e-10));
    CHECK(snr(x, mix) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("uncorrelated baseline: closed form, asymptote, Monte Carlo at M=3 and M=50") {
    CHECK(uncorrelated_snr_baseline(1000000) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-4));
    CHECK(std::abs(uncorrelated_snr_baseline(50) - 0.724) < 2e-3);
    CHECK(uncorrelated_snr_baseline(50) ==
          doctest::Approx((1.0 + 5.0 / 200.0) / std::sqrt(2.0)).epsilon(1e-3));
    // Monte Carlo over mean-subtracted Gaussian pairs
    for (int m : {3, 50}) {
        Philox rng(11, m);
        stats::MeanVar mv;
        const int trials = (m == 3) ? 200000 : 20000;
        for (int tr = 0; tr < trials; ++tr) {
            std::vector<double> d(static_cast<std::size_t>(m));
            double mean = 0;
            for (auto& v : d) {
                v = gaussian(rng) - gaussian(rng);
                mean += v;
            }
            mean /= m;
            double msd = 0;
            for (double v : d) msd += (v - mean) * (v - mean);
            msd /= m;
            mv.add(1.0 / std::sqrt(msd));
        }
        CHECK(std::abs(mv.mean - uncorrelated_snr_baseline(m)) < 4.0 * mv.stderr_mean());
    }
}

TEST_CASE("noise model simulation: identity limit, damping mean, correlation prediction") {
    SignalSet exact = gaussians(10000, 13, 0.0, 0.08);
    NoiseModelParams ident;
    ident.g = 1.0;
    auto same = simulate_noise_model(exact, ident, 3);
    for (std::size_t i = 0; i < exact.values.size(); ++i)
        CHECK(same.values[i] == doctest::Approx(exact.values[i]));

    NoiseModelParams p;
    p.g = 0.5;
    p.sigma_m = 0.1;
    p.sigma_a = 0.01;
    auto nois = simulate_noise_model(exact, p, 5);
    double ratio = stats::mean_of(nois.values) / stats::mean_of(exact.values);
    (void)ratio;  // means are near zero; check the damping through the regression instead
    double g_est = predicted_g(nois, exact);
    CHECK(std::abs(g_est - 0.5) < 0.02);
    double rho_pred = predicted_rho(nois, exact, p);
    CHECK(std::abs(stats::pearson_of(nois.values, exact.values) - rho_pred) < 0.02);

    // explicit damping-mean check on a shifted set
    SignalSet shifted = gaussians(20000, 17, 1.0, 0.05);
    auto nois2 = simulate_noise_model(shifted, p, 7);
    CHECK(stats::mean_of(nois2.values) / stats::mean_of(shifted.values) ==
          doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("MLE recovers synthetic parameters within three standard errors") {
    SignalSet exact = gaussians(500, 23, 0.0, 0.12);
    NoiseModelParams truth;
    truth.g = 0.6;
    truth.c = 0.01;
    truth.sigma_m = 0.2;
    truth.sigma_a = 0.05;
    auto nois = simulate_noise_model(exact, truth, 29);
    NoiseModelParams fit = fit_noise_model_mle(nois, exact);
    CHECK(std::abs(fit.g - truth.g) < 3.0 * fit.se(0) + 1e-9);
    CHECK(std::abs(fit.c - truth.c) < 3.0 * fit.se(1) + 1e-9);
    CHECK(std::abs(fit.sigma_m - truth.sigma_m) < 3.0 * fit.se(2) + 1e-9);
    CHECK(std::abs(fit.sigma_a - truth.sigma_a) < 3.0 * fit.se(3) + 1e-9);
    // g from the MLE agrees with the moment prediction within joint errors
    CHECK(std::abs(fit.g - predicted_g(nois, exact)) < 4.0 * fit.se(0) + 0.02);
    CHECK(std::abs(predicted_c(nois, exact, fit.g) - fit.c) < 4.0 * fit.se(1) + 0.01);
}

TEST_CASE("MLE with zero multiplicative noise stays consistent with zero") {
    SignalSet exact = gaussians(400, 31, 0.0, 0.1);
    NoiseModelParams truth;
    truth.g = 0.7;
    truth.c = 0.0;
    truth.sigma_m = 0.0;
    truth.sigma_a = 0.03;
    auto nois = simulate_noise_model(exact, truth, 37);
    NoiseModelParams fit = fit_noise_model_mle(nois, exact);
    CHECK(std::abs(fit.sigma_m) < 3.0 * fit.se(2) + 0.02);
}

TEST_CASE("MLE error shrinks roughly as 1/sqrt(N)") {
    std::vector<double> logn, logerr;
    for (int n : {50, 200, 800, 3200}) {
        double err_acc = 0.0;
        const int reps = 6;
        for (int rep = 0; rep < reps; ++rep) {
            SignalSet exact = gaussians(n, 41 + static_cast<std::uint64_t>(rep) * 100 + n, 0.0, 0.1);
            NoiseModelParams truth;
            truth.g = 0.6;
            truth.c = 0.01;
            truth.sigma_m = 0.25;
            truth.sigma_a = 0.04;
            auto nois = simulate_noise_model(exact, truth, 43 + static_cast<std::uint64_t>(rep));
            NoiseModelParams fit = fit_noise_model_mle(nois, exact);
            err_acc += std::abs(fit.g - truth.g);
        }
        logn.push_back(std::log(n));
        logerr.push_back(std::log(err_acc / reps));
    }
    double slope = stats::linear_fit(logn, logerr).slope;
    CHECK(slope == doctest::Approx(-0.5).epsilon(0.3));  // -0.5 +/- 0.15
}

TEST_CASE("snr projection: zero noise caps, shot noise strictly lowers the median") {
    SignalSet measured = gaussians(60, 51, 0.0, 0.2);
    NoiseModelParams none;
    none.g = 1.0;
    auto proj = project_snr(measured, none, 0.0, 500, 3);
    CHECK(proj.median == doctest::Approx(kSnrCap));

    NoiseModelParams p;
    p.sigma_m = 0.15;
    p.sigma_a = 0.02;
    double prev = 1e300;
    for (double shot : {0.0, 0.05, 0.15, 0.4}) {
        auto pr = project_snr(measured, p, shot, 2000, 7);
        CHECK(pr.median < prev);
        prev = pr.median;
        CHECK(pr.ci_lo <= pr.median);
        CHECK(pr.median <= pr.ci_hi);
    }
}

TEST_CASE("snr projection CI covers a held-out noisy replica most of the time") {
    SignalSet measured = gaussians(60, 61, 0.0, 0.2);
    NoiseModelParams p;
    p.g = 1.0;
    p.sigma_m = 0.15;
    p.sigma_a = 0.02;
    auto proj = project_snr(measured, p, 0.01, 4000, 11);
    int covered = 0;
    const int trials = 40;
    for (int tr = 0; tr < trials; ++tr) {
        auto replica = simulate_noise_model(measured, p, 100 + static_cast<std::uint64_t>(tr));
        Philox rng(500 + static_cast<std::uint64_t>(tr));
        for (auto& v : replica.values) v += 0.01 * gaussian(rng);
        double got = snr(replica, measured);
        if (got >= proj.ci_lo && got <= proj.ci_hi) ++covered;
    }
    CHECK(covered >= trials * 9 / 10);
}

TEST_CASE("hybrid estimator: exact identity cases and the synthetic improvement") {
    SignalSet cls = gaussians(50, 71, 0.0, 0.1);
    SignalSet cls_exp = gaussians(50, 72, 0.0, 0.05);
    // experiment sees exactly the classical approximation: hybrid = classical
    auto same = hybrid_estimate(cls, cls_exp, cls_exp);
    for (std::size_t i = 0; i < cls.values.size(); ++i)
        CHECK(same.values[i] == doctest::Approx(cls.values[i]));

    // synthetic exact signal = classical part + residual; the experiment sees a
    // noise-damped version of both with measurable residual
    Philox rng(77);
    SignalSet exact, classical, exp_full, exp_cls;
    const double f_noise = 0.3;
    for (int i = 0; i < 60; ++i) {
        double c = 0.2 * gaussian(rng);
        double r = 0.1 * gaussian(rng);
        double shot1 = 0.004 * gaussian(rng), shot2 = 0.004 * gaussian(rng);
        classical.values.push_back(c);
        exact.values.push_back(c + r);
        exp_full.values.push_back(f_noise * (c + r) + shot1);
        exp_cls.values.push_back(f_noise * c + shot2);
    }
    auto hyb = hybrid_estimate(classical, exp_full, exp_cls);
    CHECK(snr(hyb, exact) > snr(classical, exact));

    // affine covariance: scaling the classical simulation by a constant scales
    // the hybrid by the same constant
    SignalSet cls2 = classical;
    for (auto& v : cls2.values) v *= 2.0;
    auto hyb2 = hybrid_estimate(cls2, exp_full, exp_cls);
    for (std::size_t i = 0; i < hyb.values.size(); ++i)
        CHECK(hyb2.values[i] == doctest::Approx(2.0 * hyb.values[i]).epsilon(1e-9));
}
