#pragma once

// Brute-force reference implementations used only by tests. Everything here is
// built from explicit dense matrices on <= 2^10 dimensions, independent of the
// statevector kernels, the sparse Pauli propagation and the samplers it checks.

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <vector>

#include "otoc/circuits.hpp"
#include "otoc/pauli.hpp"

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using otoc::PauliKey;
using otoc::PauliSym;

inline Mat pauli_1(int code) {  // 0=I,1=X,2=Y,3=Z
    using namespace std::complex_literals;
    Mat m(2, 2);
    switch (code) {
        case 0: m << 1, 0, 0, 1; break;
        case 1: m << 0, 1, 1, 0; break;
        case 2: m << 0, -1i, 1i, 0; break;
        default: m << 1, 0, 0, -1; break;
    }
    return m;
}

// Full-system operator with `op` on `site` (site = bit index, little-endian).
inline Mat embed_1q(int n, int site, const Mat& op) {
    Mat full = Mat::Identity(1, 1);
    for (int s = 0; s < n; ++s) {
        const Mat& cur = (s == site) ? op : Mat::Identity(2, 2).eval();
        Mat next(full.rows() * 2, full.cols() * 2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) next.block(i * full.rows(), j * full.cols(), full.rows(), full.cols()) = cur(i, j) * full;
        full = std::move(next);
    }
    return full;
}

inline Mat dense_pauli(int n, const otoc::PauliString& p) {
    Mat full = Mat::Identity(1 << n, 1 << n);
    for (int s = 0; s < n; ++s) {
        int code = static_cast<int>(p.get(s));
        if (code == 0) continue;
        full = embed_1q(n, s, pauli_1(code)) * full;
    }
    return static_cast<double>(p.sign) * full;
}

// Embed a 4x4 two-qubit gate (basis |q_a q_b>, q_b low bit) on sites (a, b).
inline Mat embed_2q(int n, int a, int b, const Eigen::Matrix4cd& u) {
    const int dim = 1 << n;
    Mat full = Mat::Zero(dim, dim);
    for (int col = 0; col < dim; ++col) {
        int ba = (col >> a) & 1, bb = (col >> b) & 1;
        int gcol = 2 * ba + bb;
        for (int grow = 0; grow < 4; ++grow) {
            int row = col;
            row = (row & ~(1 << a)) | (((grow >> 1) & 1) << a);
            row = (row & ~(1 << b)) | ((grow & 1) << b);
            full(row, col) += u(grow, gcol);
        }
    }
    return full;
}

// Full unitary of one instance, gates applied in circuit order.
inline Mat dense_unitary(const otoc::circuits::CircuitInstance& inst) {
    const int n = inst.n();
    Mat u = Mat::Identity(1 << n, 1 << n);
    auto layer_pauli = [&](const otoc::circuits::PauliLayer& lay) {
        Mat m = Mat::Identity(1 << n, 1 << n);
        for (int s = 0; s < n; ++s) {
            int code = static_cast<int>(lay.symbols[static_cast<std::size_t>(s)]);
            if (code) m = embed_1q(n, s, pauli_1(code)) * m;
        }
        return m;
    };
    if (inst.pre && !inst.pre->trivial()) u = layer_pauli(*inst.pre) * u;
    for (const auto& cy : inst.cycles) {
        for (const auto& g : cy.sq) u = embed_1q(n, g.site, otoc::circuits::sq_matrix(g)) * u;
        for (const auto& g : cy.tq) u = embed_2q(n, g.a, g.b, otoc::circuits::tq_matrix(g)) * u;
        if (cy.ins && !cy.ins->trivial()) u = layer_pauli(*cy.ins) * u;
    }
    return u;
}

inline Mat butterfly_op(const otoc::circuits::CircuitInstance& inst) {
    otoc::PauliString b = otoc::PauliString::identity(inst.n());
    for (int s : inst.q_b) b.set(s, PauliSym::X);
    return dense_pauli(inst.n(), b);
}

inline Mat measure_op(const otoc::circuits::CircuitInstance& inst) {
    return dense_pauli(inst.n(), otoc::PauliString::single(inst.n(), inst.q_m, PauliSym::Z));
}

inline Mat heisenberg_b(const otoc::circuits::CircuitInstance& inst) {
    Mat u = dense_unitary(inst);
    return u.adjoint() * butterfly_op(inst) * u;
}

inline double otoc_trace(const otoc::circuits::CircuitInstance& inst, int k) {
    Mat c = heisenberg_b(inst) * measure_op(inst);
    Mat p = Mat::Identity(c.rows(), c.cols());
    for (int i = 0; i < 2 * k; ++i) p = p * c;
    return p.trace().real() / static_cast<double>(c.rows());
}

inline double otoc_state(const otoc::circuits::CircuitInstance& inst, int k,
                         std::uint64_t bits = 0) {
    Mat c = heisenberg_b(inst) * measure_op(inst);
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(c.rows());
    v(static_cast<Eigen::Index>(bits)) = 1.0;
    Eigen::VectorXcd w = v;
    for (int i = 0; i < 2 * k; ++i) w = c * w;
    return (v.adjoint() * w)(0, 0).real();
}

// Pauli coefficients of a dense Hermitian operator.
inline std::map<std::pair<std::uint64_t, std::uint64_t>, double> pauli_coeffs(
    int n, const Mat& op, double drop_below = 1e-13) {
    std::map<std::pair<std::uint64_t, std::uint64_t>, double> out;
    const int total = 1 << (2 * n);
    for (int code = 0; code < total; ++code) {
        otoc::PauliString p = otoc::PauliString::identity(n);
        int c = code;
        for (int s = 0; s < n; ++s) {
            p.set(s, static_cast<PauliSym>(c & 3));
            c >>= 2;
        }
        cplx v = (dense_pauli(n, p) * op).trace() / static_cast<double>(op.rows());
        if (std::abs(v) > drop_below) out[{p.x, p.z}] = v.real();
    }
    return out;
}

// Exhaustive all-cut Pauli averaging: evolve the probability vector over the
// 4^n Pauli strings through element-wise squared single- and two-site
// conjugation actions, computed from dense matrices.
class PopulationDynamics {
public:
    explicit PopulationDynamics(int n) : n_(n), p_(std::size_t{1} << (2 * n), 0.0) {}

    void set_start(const otoc::PauliString& b) { p_.assign(p_.size(), 0.0); p_[index_of(b)] = 1.0; }

    void apply_1q(int site, const Mat& u) {
        // squared transfer on one site
        double t[4][4];
        for (int pp = 0; pp < 4; ++pp) {
            Mat conj = u.adjoint() * pauli_1(pp) * u;
            for (int q = 0; q < 4; ++q) {
                double w = ((pauli_1(q) * conj).trace() / 2.0).real();
                t[q][pp] = w * w;
            }
        }
        std::vector<double> next(p_.size(), 0.0);
        for (std::size_t i = 0; i < p_.size(); ++i) {
            if (p_[i] == 0.0) continue;
            int code = static_cast<int>((i >> (2 * site)) & 3u);
            std::size_t base = i & ~(std::size_t{3} << (2 * site));
            for (int q = 0; q < 4; ++q)
                next[base | (static_cast<std::size_t>(q) << (2 * site))] += p_[i] * t[q][code];
        }
        p_ = std::move(next);
    }

    void apply_2q(int a, int b, const Eigen::Matrix4cd& u) {
        Mat u4 = u;
        double t[16][16];
        auto pauli2 = [&](int s) {
            Mat m(4, 4);
            Mat pa = pauli_1(s >> 2), pb = pauli_1(s & 3);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) m.block(2 * i, 2 * j, 2, 2) = pa(i, j) * pb;
            return m;
        };
        for (int pp = 0; pp < 16; ++pp) {
            Mat conj = u4.adjoint() * pauli2(pp) * u4;
            for (int q = 0; q < 16; ++q) {
                double w = ((pauli2(q) * conj).trace() / 4.0).real();
                t[q][pp] = w * w;
            }
        }
        std::vector<double> next(p_.size(), 0.0);
        for (std::size_t i = 0; i < p_.size(); ++i) {
            if (p_[i] == 0.0) continue;
            int ca = static_cast<int>((i >> (2 * a)) & 3u);
            int cb = static_cast<int>((i >> (2 * b)) & 3u);
            int code = 4 * ca + cb;
            std::size_t base = i & ~((std::size_t{3} << (2 * a)) | (std::size_t{3} << (2 * b)));
            for (int q = 0; q < 16; ++q) {
                std::size_t j = base | (static_cast<std::size_t>(q >> 2) << (2 * a)) |
                                (static_cast<std::size_t>(q & 3) << (2 * b));
                next[j] += p_[i] * t[q][code];
            }
        }
        p_ = std::move(next);
    }

    void apply_instance(const otoc::circuits::CircuitInstance& inst) {
        for (const auto& cy : inst.cycles) {
            for (const auto& g : cy.sq) apply_1q(g.site, otoc::circuits::sq_matrix(g));
            for (const auto& g : cy.tq) apply_2q(g.a, g.b, otoc::circuits::tq_matrix(g));
        }
    }

    // sum_P p_P (-1)^{P anticommutes with Z_qm}
    double z_sign_expectation(int q_m) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < p_.size(); ++i) {
            if (p_[i] == 0.0) continue;
            int code = static_cast<int>((i >> (2 * q_m)) & 3u);  // 0=I,1=X,2=Y,3=Z
            bool anti = (code == 1 || code == 2);
            acc += anti ? -p_[i] : p_[i];
        }
        return acc;
    }

private:
    std::size_t index_of(const otoc::PauliString& b) const {
        std::size_t idx = 0;
        for (int s = 0; s < n_; ++s)
            idx |= static_cast<std::size_t>(static_cast<int>(b.get(s))) << (2 * s);
        return idx;
    }

    int n_;
    std::vector<double> p_;
};

}  // namespace oracle
