#include "otoc/rmt.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "otoc/eig.hpp"
#include "otoc/stats.hpp"

namespace otoc::rmt {

namespace {

constexpr double kPi = 3.14159265358979323846;
using cplx = std::complex<double>;

// Clearing denominators in the self-consistency relation (with cot(phi/2) and
// tan(phi/2) combined through c*s = 1, c - s = 2 cot(phi)) gives the quintic
//   e^5 - 4k e^4 + (g-6) e^3 + k(4-3g) e^2 + (1-3g) e + g k = 0,  k = cot(phi).
std::array<cplx, 5> quintic_roots(double gamma, double phi) {
    double k = 1.0 / std::tan(phi);
    Eigen::Matrix<double, 5, 5> comp = Eigen::Matrix<double, 5, 5>::Zero();
    const double c[5] = {gamma * k, (1 - 3 * gamma), k * (4 - 3 * gamma), (gamma - 6.0), -4 * k};
    for (int i = 1; i < 5; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < 5; ++i) comp(i, 4) = -c[i];
    Eigen::EigenSolver<Eigen::Matrix<double, 5, 5>> es(comp);
    std::array<cplx, 5> roots;
    for (int i = 0; i < 5; ++i) roots[static_cast<std::size_t>(i)] = es.eigenvalues()[i];
    return roots;
}

double relation_residual(double gamma, double phi, cplx e) {
    double c = 1.0 / std::tan(phi / 2), s = std::tan(phi / 2);
    cplx a = (e - c) / (1.0 - e * e + 2.0 * e * c);
    cplx b = (e + s) / (1.0 - e * e - 2.0 * e * s);
    return std::abs(e - 0.5 * gamma * (a + b));
}

// Continuity tracking: start from the flat-density solution eps = -i at
// gamma = 2 and walk gamma to the target, picking the nearest root each step.
cplx track_epsilon(double gamma, double phi) {
    cplx eps(0.0, -1.0);
    const int steps = 64;
    for (int s = 1; s <= steps; ++s) {
        double g = 2.0 + (gamma - 2.0) * static_cast<double>(s) / steps;
        auto roots = quintic_roots(g, phi);
        cplx best = roots[0];
        double bd = 1e300;
        for (const auto& r : roots) {
            double d = std::abs(r - eps);
            if (d < bd) {
                bd = d;
                best = r;
            }
        }
        eps = best;
    }
    if (eps.imag() > 0) eps = std::conj(eps);  // physical branch: Im <= 0
    return eps;
}

// lambda * TrG / D_H for one self-energy branch; stable for |w| > 1 as well.
cplx half_plane_term(cplx lam, cplx e) {
    cplx w = (e + cplx(0, 1)) / (e - cplx(0, 1));
    if (std::abs(w) <= 1.0) {
        cplx w2 = w * w;
        return lam * 0.5 * (1.0 / (lam - w2) + 1.0 / (lam + w2));
    }
    cplx y = 1.0 / (w * w);
    return lam * 0.5 * (-y / (1.0 - lam * y) + y / (1.0 + lam * y));
}

double density_from_epsilon(double phi, cplx eps) {
    cplx lam = std::polar(1.0, phi);
    cplx outside = half_plane_term(lam, eps);
    cplx inside = half_plane_term(lam, std::conj(eps));
    double s = ((outside - inside) / (2.0 * kPi)).real();
    return std::max(0.0, s);
}

double fold_phi(double phi) {
    // exploit S(phi) = S(-phi) = S(phi + pi): fold into (0, pi)
    phi = std::abs(phi);
    phi = std::fmod(phi, 2.0 * kPi);
    if (phi > kPi) phi = 2.0 * kPi - phi;
    return std::clamp(phi, 1e-9, kPi - 1e-9);
}

}  // namespace

SelfEnergySolution solve_self_energy(double gamma, double phi) {
    if (gamma < 0) throw std::invalid_argument("solve_self_energy: gamma must be >= 0");
    double pf = fold_phi(phi);
    SelfEnergySolution sol;
    sol.phi = phi;
    sol.gamma = gamma;
    sol.epsilon = track_epsilon(gamma, pf);
    sol.residual = relation_residual(gamma, pf, sol.epsilon);
    sol.branch = std::abs(sol.epsilon.imag()) > 1e-12 ? "complex" : "real";
    if (sol.residual > 1e-8)
        throw std::runtime_error("solve_self_energy: no admissible root, residual=" +
                                 std::to_string(sol.residual) + " at gamma=" +
                                 std::to_string(gamma) + ", phi=" + std::to_string(phi));
    return sol;
}

std::vector<SelfEnergySolution> solve_self_energy_curve(double gamma,
                                                        const std::vector<double>& phi_grid) {
    std::vector<SelfEnergySolution> out;
    out.reserve(phi_grid.size());
    for (double phi : phi_grid) out.push_back(solve_self_energy(gamma, phi));
    return out;
}

double spectral_density_at(double gamma, double phi) {
    double pf = fold_phi(phi);
    return density_from_epsilon(pf, track_epsilon(gamma, pf));
}

SpectralDensityCurve spectral_density(double gamma, const std::vector<double>& phi_grid) {
    SpectralDensityCurve c;
    c.phi_grid = phi_grid;
    c.density.reserve(phi_grid.size());
    for (double phi : phi_grid) c.density.push_back(spectral_density_at(gamma, phi));
    return c;
}

double gap(double gamma) {
    if (gamma < 0) throw std::invalid_argument("gap: gamma must be >= 0");
    if (gamma >= kGammaStar) return 0.0;
    return std::sqrt(108.0 / 17.0) * std::pow(kGammaStar - gamma, 1.5);
}

double measured_gap(double gamma, double tol) {
    auto is_gapless_at = [&](double dist) {
        cplx e = track_epsilon(gamma, kPi / 2 + dist);
        return std::abs(e.imag()) > 1e-12;
    };
    if (is_gapless_at(0.0)) return 0.0;
    double lo = 0.0, hi = kPi / 2 - 1e-6;
    if (!is_gapless_at(hi)) return hi;  // fully gapped quadrant (tiny gamma)
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (is_gapless_at(mid))
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

double closed_form_otoc(double gamma, int k) {
    if (gamma < 0) throw std::invalid_argument("closed_form_otoc: gamma must be >= 0");
    double s = std::sqrt(4.0 * gamma + 1.0);
    double base = (3.0 - s) / (1.0 + s);
    switch (k) {
        case 1:
            return std::pow(base, 4);
        case 2:
            return std::pow(base, 6) * ((4 * gamma - 22) * s + 26 - 24 * gamma) /
                   (s * (1 + s) * (1 + s));
        case 3: {
            double g = gamma;
            double num = (241 + 240 * g - 78 * g * g + 8 * g * g * g) * s -
                         (239 + 814 * g - 736 * g * g + 96 * g * g * g);
            return 8.0 * std::pow(base, 8) * num / (std::pow(1 + 4 * g, 1.5) * std::pow(1 + s, 4));
        }
    }
    throw std::invalid_argument("closed_form_otoc: k must be 1, 2 or 3");
}

double semicircle_otoc(double gamma, int k) {
    double x = 8.0 * k * std::sqrt(gamma);
    if (x < 1e-12) return 1.0;
    return std::cyl_bessel_j(1, x) / (4.0 * k * std::sqrt(gamma));
}

double semicircle_otoc_asymptote(double gamma, int k) {
    return std::cos(8.0 * std::sqrt(gamma) * k - 0.75 * kPi) /
           (8.0 * std::sqrt(kPi) * std::pow(gamma, 0.75) * std::pow(k, 1.5));
}

double scaling_function(double x, ScalingSide side) {
    const double c = std::sqrt(3.0) / (std::pow(34.0, 1.0 / 3.0) * kPi);
    const double step = 108.0 / 17.0;
    if (side == ScalingSide::above) {
        double rad = std::sqrt(x * x + step);
        return c * (std::cbrt(rad + x) + std::cbrt(rad - x));
    }
    double ax = std::abs(x);
    if (ax * ax <= step) return 0.0;
    double rad = std::sqrt(ax * ax - step);
    return c * (std::cbrt(ax + rad) - std::cbrt(ax - rad));
}

EnsembleSample sample_ensemble(double gamma, int dim, int n_draws, std::uint64_t seed, int k_max,
                               bool keep_phases) {
    if (dim < 4 || (dim & (dim - 1)) != 0)
        throw std::invalid_argument("sample_ensemble: dim must be a power of 2, >= 4");
    EnsembleSample out;
    out.n_draws = n_draws;
    std::vector<stats::MeanVar> mom(static_cast<std::size_t>(k_max));
    for (int draw = 0; draw < n_draws; ++draw) {
        Philox rng = substream(seed, 0x475545, static_cast<std::uint64_t>(draw));
        Eigen::MatrixXcd h(dim, dim);
        const double off_sd = std::sqrt(gamma / (2.0 * dim));
        for (int i = 0; i < dim; ++i) {
            h(i, i) = cplx(gaussian(rng) * std::sqrt(gamma / dim), 0.0);
            for (int j = i + 1; j < dim; ++j) {
                cplx v(gaussian(rng) * off_sd, gaussian(rng) * off_sd);
                h(i, j) = v;
                h(j, i) = std::conj(v);
            }
        }
        Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(dim, dim) + cplx(0, 1) * h;
        Eigen::MatrixXcd b = Eigen::MatrixXcd::Identity(dim, dim) - cplx(0, 1) * h;
        Eigen::MatrixXcd u = a.partialPivLu().solve(b);
        // C = Z_M U^dag Z_B U, Z_M on qubit 0, Z_B on qubit 1
        Eigen::VectorXd zb(dim);
        for (int i = 0; i < dim; ++i) zb(i) = (i & 2) ? -1.0 : 1.0;
        Eigen::MatrixXcd c = u.adjoint() * (zb.asDiagonal() * u);
        for (int i = 0; i < dim; ++i)
            if (i & 1) c.row(i) = -c.row(i);  // Z_M from the left
        Eigen::MatrixXcd k = 0.5 * (c + c.adjoint());
        Eigen::VectorXd cosv;
        la::hermitian_eig(k, cosv, false);
        // Chebyshev: cos(2k phi) = T_{2k}(cos phi); moments need no signs
        for (int kk = 1; kk <= k_max; ++kk) {
            double acc = 0.0;
            for (int i = 0; i < dim; ++i)
                acc += std::cos(2.0 * kk * std::acos(std::clamp(cosv(i), -1.0, 1.0)));
            mom[static_cast<std::size_t>(kk - 1)].add(acc / dim);
        }
        if (keep_phases) {
            for (int i = 0; i + 1 < dim; i += 2) {
                double c0 = std::clamp(cosv(i), -1.0, 1.0), c1 = std::clamp(cosv(i + 1), -1.0, 1.0);
                double phi = std::acos(0.5 * (c0 + c1));
                out.eigenphases.push_back(phi);
                out.eigenphases.push_back(phi > kPi - 1e-12 ? kPi : (phi < 1e-12 ? 0.0 : -phi));
            }
        }
    }
    std::sort(out.eigenphases.begin(), out.eigenphases.end());
    for (int kk = 1; kk <= k_max; ++kk) {
        out.otoc_mean.push_back(mom[static_cast<std::size_t>(kk - 1)].mean);
        out.otoc_stderr.push_back(mom[static_cast<std::size_t>(kk - 1)].stderr_mean());
    }
    return out;
}

GammaOfDepth match_gamma_to_depth(const std::vector<std::vector<sv::SpectralSample>>& per_t,
                                  const std::vector<int>& t_values) {
    if (per_t.size() != t_values.size())
        throw std::invalid_argument("match_gamma_to_depth: size mismatch");
    GammaOfDepth out;
    for (std::size_t i = 0; i < per_t.size(); ++i) {
        std::vector<double> gaps;
        for (const auto& s : per_t[i]) gaps.push_back(sv::spectral_gap(s));
        std::sort(gaps.begin(), gaps.end());
        double med = gaps[gaps.size() / 2];
        out.t.push_back(t_values[i]);
        out.gap_full_width.push_back(med);
        double half = med / 2.0;  // phi_gap is the half-width of the empty arc
        if (half <= 0.0) {
            out.gamma.push_back(kGammaStar);
            out.gapless.push_back(true);
        } else {
            double dg = std::pow(half / std::sqrt(108.0 / 17.0), 2.0 / 3.0);
            out.gamma.push_back(std::max(0.0, kGammaStar - dg));
            out.gapless.push_back(false);
        }
    }
    return out;
}

}  // namespace otoc::rmt
