#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "otoc/eig.hpp"
#include "otoc/statevector.hpp"

namespace otoc::sv {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Dense matrix of C = M B(t) = M U^dag B U from a column-wise circuit application.
template <typename ApplyU>
Eigen::MatrixXcd correlation_matrix(int n, int q_m, std::uint64_t b_mask, ApplyU&& apply_u) {
    const std::int64_t dim = std::int64_t{1} << n;
    Eigen::MatrixXcd C(dim, dim);
    std::vector<cplx> col(static_cast<std::size_t>(dim));
    for (std::int64_t j = 0; j < dim; ++j) {
        std::fill(col.begin(), col.end(), cplx{0, 0});
        col[static_cast<std::size_t>(j)] = 1.0;
        apply_u(col, Direction::forward);
        kernels::apply_pauli(col, b_mask, 0, Exec::parallel);
        apply_u(col, Direction::inverse);
        kernels::apply_pauli(col, 0, 1ull << q_m, Exec::parallel);
        for (std::int64_t i = 0; i < dim; ++i) C(i, j) = col[static_cast<std::size_t>(i)];
    }
    return C;
}

std::vector<double> phases_from_matrix(const Eigen::MatrixXcd& C, SpectrumMethod method) {
    const auto dim = C.rows();
    Eigen::MatrixXcd K = 0.5 * (C + C.adjoint());
    Eigen::VectorXd cosv;
    if (method == SpectrumMethod::mirrored) {
        la::hermitian_eig(K, cosv, false);
        std::vector<double> phases;
        phases.reserve(static_cast<std::size_t>(dim));
        // parity symmetry pairs +phi with -phi; eigenvalues come sorted, so
        // consecutive entries belong to the same pair
        for (Eigen::Index i = 0; i + 1 < dim; i += 2) {
            double c0 = std::clamp(cosv[i], -1.0, 1.0);
            double c1 = std::clamp(cosv[i + 1], -1.0, 1.0);
            double phi = std::acos(0.5 * (c0 + c1));
            phases.push_back(phi);
            phases.push_back(phi > kPi - 1e-12 ? kPi : (phi < 1e-12 ? 0.0 : -phi));
        }
        std::sort(phases.begin(), phases.end());
        return phases;
    }
    la::hermitian_eig(K, cosv, true);  // K now holds eigenvectors
    Eigen::MatrixXcd A = (C - C.adjoint()) * cplx(0.0, -0.5);  // Hermitian, eigvals sin(phi)
    std::vector<double> phases;
    phases.reserve(static_cast<std::size_t>(dim));
    Eigen::Index i = 0;
    const double tol = 1e-9;
    while (i < dim) {
        Eigen::Index j = i + 1;
        while (j < dim && cosv[j] - cosv[j - 1] < tol) ++j;
        const Eigen::Index m = j - i;
        Eigen::MatrixXcd V = K.middleCols(i, m);
        Eigen::MatrixXcd Asub = V.adjoint() * (A * V);
        Asub = 0.5 * (Asub + Asub.adjoint());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Asub, Eigen::EigenvaluesOnly);
        for (Eigen::Index l = 0; l < m; ++l) {
            double s = std::clamp(es.eigenvalues()[l], -1.0, 1.0);
            double c = std::clamp(cosv[i], -1.0, 1.0);
            double phi = std::atan2(s, c);
            if (phi <= -kPi + 1e-15) phi = kPi;
            phases.push_back(phi);
        }
        i = j;
    }
    std::sort(phases.begin(), phases.end());
    return phases;
}

std::uint64_t mask_of(const std::vector<int>& sites) {
    std::uint64_t m = 0;
    for (int s : sites) m |= 1ull << s;
    return m;
}

}  // namespace

SpectralSample correlation_spectrum(const circuits::CircuitInstance& inst, SpectrumMethod method,
                                    Exec ex) {
    if (inst.n() > limits().spectrum_qubits)
        throw std::invalid_argument("correlation_spectrum: size limit exceeded");
    StateVector scratch = StateVector::zero_state(inst.n());
    auto apply_u = [&](std::vector<cplx>& col, Direction d) {
        scratch.amp.swap(col);
        apply_circuit(inst, scratch, d, ex);
        scratch.amp.swap(col);
    };
    Eigen::MatrixXcd C = correlation_matrix(inst.n(), inst.q_m, mask_of(inst.q_b), apply_u);
    SpectralSample out;
    out.eigenphases = phases_from_matrix(C, method);
    out.instance_id = "seed" + std::to_string(inst.seed);
    return out;
}

SpectralSample correlation_spectrum_raw(const RawCircuit& c, int q_m, int q_b,
                                        SpectrumMethod method, Exec ex) {
    if (c.n > limits().spectrum_qubits)
        throw std::invalid_argument("correlation_spectrum: size limit exceeded");
    StateVector scratch = StateVector::zero_state(c.n);
    auto apply_u = [&](std::vector<cplx>& col, Direction d) {
        scratch.amp.swap(col);
        apply_raw(c, scratch, d, ex);
        scratch.amp.swap(col);
    };
    Eigen::MatrixXcd C = correlation_matrix(c.n, q_m, 1ull << q_b, apply_u);
    SpectralSample out;
    out.eigenphases = phases_from_matrix(C, method);
    return out;
}

double min_phase_distance_to_half_pi(const RawCircuit& c, int q_m, int q_b, int iterations,
                                     std::uint64_t seed, Exec ex) {
    const std::size_t dim = std::size_t{1} << c.n;
    const std::uint64_t bmask = 1ull << q_b;
    std::vector<cplx> scratch(dim);
    StateVector sv_scratch = StateVector::zero_state(c.n);
    auto apply_c = [&](const std::vector<cplx>& in, std::vector<cplx>& out) {
        out = in;
        sv_scratch.amp.swap(out);
        apply_raw(c, sv_scratch, Direction::forward, ex);
        kernels::apply_pauli(sv_scratch.amp, bmask, 0, ex);
        apply_raw(c, sv_scratch, Direction::inverse, ex);
        kernels::apply_pauli(sv_scratch.amp, 0, 1ull << q_m, ex);
        sv_scratch.amp.swap(out);
    };
    auto apply_c_dag = [&](const std::vector<cplx>& in, std::vector<cplx>& out) {
        out = in;
        sv_scratch.amp.swap(out);
        kernels::apply_pauli(sv_scratch.amp, 0, 1ull << q_m, ex);
        apply_raw(c, sv_scratch, Direction::forward, ex);
        kernels::apply_pauli(sv_scratch.amp, bmask, 0, ex);
        apply_raw(c, sv_scratch, Direction::inverse, ex);
        sv_scratch.amp.swap(out);
    };
    std::vector<cplx> t1(dim), t2(dim);
    auto apply_a = [&](const std::vector<cplx>& in, std::vector<cplx>& out) {
        // A = 1 - K^2, K = (C + C^dag)/2; the top of A sits at the phases
        // closest to +-pi/2
        apply_c(in, t1);
        apply_c_dag(in, t2);
        for (std::size_t i = 0; i < dim; ++i) t1[i] = 0.5 * (t1[i] + t2[i]);
        apply_c(t1, out);
        apply_c_dag(t1, t2);
        for (std::size_t i = 0; i < dim; ++i) out[i] = in[i] - 0.5 * (out[i] + t2[i]);
    };

    // plain Lanczos with full re-orthogonalization against a bounded window
    Philox rng(seed, 0x4c616e);
    std::vector<std::vector<cplx>> basis;
    std::vector<double> alpha, beta;
    std::vector<cplx> v(dim);
    for (auto& x : v) x = {gaussian(rng), gaussian(rng)};
    double nrm = std::sqrt(kernels::sum_sq(v, ex));
    for (auto& x : v) x /= nrm;
    basis.push_back(v);
    std::vector<cplx> w(dim);
    double best = -1.0;
    int stall = 0;
    for (int it = 0; it < iterations; ++it) {
        apply_a(basis.back(), w);
        cplx a = kernels::inner(basis.back(), w, ex);
        alpha.push_back(a.real());
        for (std::size_t i = 0; i < dim; ++i) w[i] -= a.real() * basis.back()[i];
        if (basis.size() >= 2) {
            double b_prev = beta.back();
            const auto& prev = basis[basis.size() - 2];
            for (std::size_t i = 0; i < dim; ++i) w[i] -= b_prev * prev[i];
        }
        // re-orthogonalize against the recent window to tame drift
        std::size_t lo = basis.size() > 24 ? basis.size() - 24 : 0;
        for (std::size_t k = lo; k < basis.size(); ++k) {
            cplx ov = kernels::inner(basis[k], w, ex);
            for (std::size_t i = 0; i < dim; ++i) w[i] -= ov * basis[k][i];
        }
        double b = std::sqrt(kernels::sum_sq(w, ex));
        if (b < 1e-12) break;
        beta.push_back(b);
        for (auto& x : w) x /= b;
        basis.push_back(w);
        if (basis.size() > 48) basis.erase(basis.begin());  // bounded memory window

        if (it % 16 == 15 || it == iterations - 1) {
            const int m = static_cast<int>(alpha.size());
            Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
            for (int i = 0; i < m; ++i) {
                tri(i, i) = alpha[static_cast<std::size_t>(i)];
                if (i + 1 < m) {
                    tri(i, i + 1) = beta[static_cast<std::size_t>(i)];
                    tri(i + 1, i) = beta[static_cast<std::size_t>(i)];
                }
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri, Eigen::EigenvaluesOnly);
            double top = es.eigenvalues().maxCoeff();
            if (top <= best + 1e-12) {
                if (++stall >= 3) break;
            } else {
                stall = 0;
                best = top;
            }
        }
    }
    best = std::clamp(best, 0.0, 1.0);
    double min_abs_cos = std::sqrt(std::max(0.0, 1.0 - best));
    return std::asin(std::clamp(min_abs_cos, 0.0, 1.0));
}

double spectral_gap(const SpectralSample& s, int bins, int min_run) {
    // counts per bin over (-pi, pi]
    std::vector<int> count(static_cast<std::size_t>(bins), 0);
    const double w = 2.0 * kPi / bins;
    for (double phi : s.eigenphases) {
        int b = static_cast<int>(std::floor((phi + kPi) / w));
        b = std::clamp(b, 0, bins - 1);
        ++count[static_cast<std::size_t>(b)];
    }
    const int target = static_cast<int>(std::floor((kPi / 2 + kPi) / w));
    if (count[static_cast<std::size_t>(target)] != 0) return 0.0;
    // grow the empty run around the target bin (circularly)
    int lo = target, hi = target, len = 1;
    while (len < bins) {
        int next_lo = (lo - 1 + bins) % bins;
        if (count[static_cast<std::size_t>(next_lo)] != 0) break;
        lo = next_lo;
        ++len;
    }
    while (len < bins) {
        int next_hi = (hi + 1) % bins;
        if (count[static_cast<std::size_t>(next_hi)] != 0) break;
        hi = next_hi;
        ++len;
    }
    if (len < min_run) return 0.0;
    return len * w;  // full arc width; at t=0 this evaluates to ~pi
}

}  // namespace otoc::sv
