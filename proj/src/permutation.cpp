#include "otoc/permutation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "otoc/stats.hpp"

namespace otoc::perm {

Permutation Permutation::identity(int r) {
    Permutation p;
    p.images.resize(static_cast<std::size_t>(r));
    std::iota(p.images.begin(), p.images.end(), 0);
    return p;
}

Permutation Permutation::from_cycle(int r, const std::vector<int>& cycle) {
    Permutation p = identity(r);
    for (std::size_t i = 0; i < cycle.size(); ++i)
        p.images[static_cast<std::size_t>(cycle[i])] =
            cycle[(i + 1) % cycle.size()];
    return p;
}

Permutation Permutation::inverse() const {
    Permutation q;
    q.images.resize(images.size());
    for (std::size_t i = 0; i < images.size(); ++i)
        q.images[static_cast<std::size_t>(images[i])] = static_cast<int>(i);
    return q;
}

Permutation Permutation::after(const Permutation& first) const {
    Permutation q;
    q.images.resize(images.size());
    for (std::size_t i = 0; i < images.size(); ++i)
        q.images[i] = images[static_cast<std::size_t>(first.images[i])];
    return q;
}

int Permutation::n_cycles() const {
    std::vector<bool> seen(images.size(), false);
    int c = 0;
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (seen[i]) continue;
        ++c;
        std::size_t j = i;
        while (!seen[j]) {
            seen[j] = true;
            j = static_cast<std::size_t>(images[j]);
        }
    }
    return c;
}

std::string Permutation::cycle_str() const {
    std::vector<bool> seen(images.size(), false);
    std::ostringstream os;
    bool any = false;
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (seen[i] || images[i] == static_cast<int>(i)) {
            seen[i] = true;
            continue;
        }
        os << "(";
        std::size_t j = i;
        bool first = true;
        while (!seen[j]) {
            seen[j] = true;
            if (!first) os << " ";
            os << (j + 1);
            first = false;
            j = static_cast<std::size_t>(images[j]);
        }
        os << ")";
        any = true;
    }
    if (!any) os << "e";
    return os.str();
}

int perm_distance(const Permutation& a, const Permutation& b) {
    if (a.r() != b.r()) throw std::invalid_argument("perm_distance: size mismatch");
    return b.after(a.inverse()).transpositions();
}

SymmetricGroup::SymmetricGroup(int r) : r_(r) {
    Permutation p = Permutation::identity(r);
    std::vector<int> v = p.images;
    do {
        Permutation q;
        q.images = v;
        perms_.push_back(q);
    } while (std::next_permutation(v.begin(), v.end()));
    const int R = size();
    comp_.assign(static_cast<std::size_t>(R), std::vector<int>(static_cast<std::size_t>(R), 0));
    inv_.resize(static_cast<std::size_t>(R));
    dist_.assign(static_cast<std::size_t>(R), std::vector<int>(static_cast<std::size_t>(R), 0));
    for (int a = 0; a < R; ++a) {
        inv_[static_cast<std::size_t>(a)] = index_of(perms_[static_cast<std::size_t>(a)].inverse());
        for (int b = 0; b < R; ++b)
            comp_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
                index_of(perms_[static_cast<std::size_t>(a)].after(perms_[static_cast<std::size_t>(b)]));
    }
    for (int a = 0; a < R; ++a)
        for (int b = 0; b < R; ++b)
            dist_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
                perm_distance(perms_[static_cast<std::size_t>(a)], perms_[static_cast<std::size_t>(b)]);
}

int SymmetricGroup::index_of(const Permutation& p) const {
    auto it = std::lower_bound(perms_.begin(), perms_.end(), p,
                               [](const Permutation& a, const Permutation& b) {
                                   return a.images < b.images;
                               });
    if (it == perms_.end() || !(*it == p))
        throw std::invalid_argument("permutation not in group");
    return static_cast<int>(it - perms_.begin());
}

const SymmetricGroup& s4() {
    static SymmetricGroup g(4);
    return g;
}

const SymmetricGroup& group_of(int r) {
    static SymmetricGroup g1(1), g2(2), g3(3), g4(4);
    switch (r) {
        case 1: return g1;
        case 2: return g2;
        case 3: return g3;
        case 4: return g4;
    }
    throw std::invalid_argument("group_of: supported r are 1..4");
}

double overlap(const SymmetricGroup& g, int a, int b, int d, int r) {
    return std::pow(static_cast<double>(d), r - g.dist(a, b));
}

WeingartenTable weingarten(int r, double D) {
    const SymmetricGroup& g = group_of(r);
    const int R = g.size();
    WeingartenTable w;
    w.r = r;
    w.D = D;
    w.gram.resize(R, R);
    for (int a = 0; a < R; ++a)
        for (int b = 0; b < R; ++b) w.gram(a, b) = std::pow(D, r - g.dist(a, b));
    Eigen::FullPivLU<Eigen::MatrixXd> lu(w.gram);
    if (!lu.isInvertible())
        throw std::invalid_argument("weingarten: singular Gram matrix (D=" + std::to_string(D) +
                                    ", r=" + std::to_string(r) + ")");
    w.wg = lu.inverse();
    double resid = (w.wg * w.gram - Eigen::MatrixXd::Identity(R, R)).cwiseAbs().maxCoeff();
    if (resid > 1e-8)
        throw std::runtime_error("weingarten: ill-conditioned Gram inversion, residual=" +
                                 std::to_string(resid));
    return w;
}

namespace {

TransferTensor build_transfer(int r, int d, const Permutation* omega) {
    const SymmetricGroup& g = group_of(r);
    const int R = g.size();
    WeingartenTable wg = weingarten(r, static_cast<double>(d) * d);
    TransferTensor t;
    t.r = r;
    t.d = d;
    t.R = R;
    t.rescaled = omega != nullptr;
    t.omega = omega ? g.index_of(*omega) : 0;
    t.t.assign(static_cast<std::size_t>(R) * R * R, 0.0);
    std::vector<std::vector<double>> ov(static_cast<std::size_t>(R),
                                        std::vector<double>(static_cast<std::size_t>(R)));
    for (int a = 0; a < R; ++a)
        for (int b = 0; b < R; ++b) ov[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = overlap(g, a, b, d, r);
    for (int nu = 0; nu < R; ++nu)
        for (int mu = 0; mu < R; ++mu)
            for (int tau = 0; tau < R; ++tau) {
                double acc = 0.0;
                for (int sg = 0; sg < R; ++sg)
                    acc += wg.wg(tau, sg) * ov[static_cast<std::size_t>(sg)][static_cast<std::size_t>(mu)] *
                           ov[static_cast<std::size_t>(sg)][static_cast<std::size_t>(nu)];
                if (omega) {
                    double om_t = ov[static_cast<std::size_t>(t.omega)][static_cast<std::size_t>(tau)];
                    double om_m = ov[static_cast<std::size_t>(t.omega)][static_cast<std::size_t>(mu)];
                    double om_n = ov[static_cast<std::size_t>(t.omega)][static_cast<std::size_t>(nu)];
                    acc *= om_t * om_t / (om_m * om_n);
                }
                t.t[static_cast<std::size_t>(tau) + static_cast<std::size_t>(R) * (static_cast<std::size_t>(mu) + static_cast<std::size_t>(R) * static_cast<std::size_t>(nu))] = acc;
            }
    return t;
}

}  // namespace

TransferTensor transfer_tensor(int r, int d) { return build_transfer(r, d, nullptr); }

TransferTensor transfer_tensor_rescaled(int r, int d, const Permutation& omega) {
    return build_transfer(r, d, &omega);
}

std::vector<Permutation> stable_permutations(const Permutation& omega) {
    const SymmetricGroup& g = group_of(omega.r());
    const int w = omega.transpositions();
    const int iw = g.index_of(omega);
    std::vector<Permutation> out;
    for (int a = 0; a < g.size(); ++a) {
        int d1 = g.dist(iw, a);  // |omega^-1 a|
        int d2 = g.perm(a).transpositions();
        if (d1 + d2 == w) out.push_back(g.perm(a));
    }
    return out;
}

// --- r = 2 domain wall walk -----------------------------------------------------

double butterfly_velocity(int d) {
    double dd = static_cast<double>(d) * d;
    return (dd - 1.0) / (dd + 1.0);
}

double front_diffusion(int d) {
    double dd = static_cast<double>(d) * d;
    return 2.0 * dd / ((dd + 1.0) * (dd + 1.0));
}

namespace {

// Initial two-site rescaled coefficients after the first gate hits the pristine
// butterfly Pauli: c_tau = sum_sigma Wg(tau sigma^-1) <sigma|P^r> <sigma|I^r>,
// rescaled by <omega|tau>^2 / d^2.
std::vector<double> init_gate_coeffs(int r, int d, int omega_idx) {
    const SymmetricGroup& g = group_of(r);
    const int R = g.size();
    WeingartenTable wg = weingarten(r, static_cast<double>(d) * d);
    auto pauli_overlap = [&](int sigma) {
        // product over cycles of Tr[P^len]: d for even len, 0 for odd
        const Permutation& p = g.perm(sigma);
        std::vector<bool> seen(static_cast<std::size_t>(r), false);
        double acc = 1.0;
        for (int i = 0; i < r; ++i) {
            if (seen[static_cast<std::size_t>(i)]) continue;
            int len = 0, j = i;
            while (!seen[static_cast<std::size_t>(j)]) {
                seen[static_cast<std::size_t>(j)] = true;
                j = p.images[static_cast<std::size_t>(j)];
                ++len;
            }
            acc *= (len % 2 == 0) ? static_cast<double>(d) : 0.0;
        }
        return acc;
    };
    std::vector<double> out(static_cast<std::size_t>(R), 0.0);
    const int id = g.index_of(Permutation::identity(r));
    for (int tau = 0; tau < R; ++tau) {
        double acc = 0.0;
        for (int sg = 0; sg < R; ++sg)
            acc += wg.wg(tau, sg) * pauli_overlap(sg) * overlap(g, sg, id, d, r);
        double om_t = overlap(g, omega_idx, tau, d, r);
        out[static_cast<std::size_t>(tau)] = acc * om_t * om_t / (static_cast<double>(d) * d);
    }
    return out;
}

// Measurement factor in the rescaled basis: 1 iff all cycles of omega^-1 alpha
// are even, else 0 (M traceless with M^2 = 1).
bool all_cycles_even(const SymmetricGroup& g, int omega_idx, int alpha) {
    int rel = g.compose(g.inverse(omega_idx), alpha);
    const Permutation& p = g.perm(rel);
    std::vector<bool> seen(static_cast<std::size_t>(p.r()), false);
    for (int i = 0; i < p.r(); ++i) {
        if (seen[static_cast<std::size_t>(i)]) continue;
        int len = 0, j = i;
        while (!seen[static_cast<std::size_t>(j)]) {
            seen[static_cast<std::size_t>(j)] = true;
            j = p.images[static_cast<std::size_t>(j)];
            ++len;
        }
        if (len % 2 != 0) return false;
    }
    return true;
}

int cycle_omega_index(int r) {
    std::vector<int> cyc(static_cast<std::size_t>(r));
    std::iota(cyc.begin(), cyc.end(), 0);
    return group_of(r).index_of(Permutation::from_cycle(r, cyc));
}

}  // namespace

WalkProfile otoc1_walk_profile(int d, int chain, int layers) {
    if (chain < 2) throw std::invalid_argument("walk: chain must have >= 2 sites");
    const SymmetricGroup& g = group_of(2);
    int omega = cycle_omega_index(2);  // the swap
    TransferTensor t = transfer_tensor_rescaled(2, d, g.perm(omega));
    int id = g.index_of(Permutation::identity(2));
    double p_right = t.at(omega, omega, id);  // (S,I) -> SS
    double p_left = t.at(id, omega, id);      // (S,I) -> II
    std::vector<double> init = init_gate_coeffs(2, d, omega);

    // wall position a = number of swap-labeled sites from the left
    std::vector<double> w(static_cast<std::size_t>(chain) + 1, 0.0);
    w[2] = init[static_cast<std::size_t>(omega)];
    w[0] = init[static_cast<std::size_t>(id)];
    for (int lay = 2; lay <= layers; ++lay) {
        std::vector<double> nw(w.size(), 0.0);
        nw[0] = w[0];
        nw[static_cast<std::size_t>(chain)] = w[static_cast<std::size_t>(chain)];
        for (int a = 1; a < chain; ++a) {
            double v = w[static_cast<std::size_t>(a)];
            if (v == 0.0) continue;
            int bond = a - 1;  // boundary bond (a-1, a)
            bool active = (lay % 2 == 1) ? (bond % 2 == 0) : (bond % 2 == 1);
            if (!active) {
                nw[static_cast<std::size_t>(a)] += v;
                continue;
            }
            nw[static_cast<std::size_t>(a + 1)] += v * p_right;
            nw[static_cast<std::size_t>(a - 1)] += v * p_left;
        }
        w = std::move(nw);
    }
    WalkProfile out;
    out.chain = chain;
    out.layers = layers;
    out.wall_weights = w;
    out.profile.resize(static_cast<std::size_t>(chain));
    double cum = 0.0;
    for (int x = 0; x < chain; ++x) {
        cum += w[static_cast<std::size_t>(x)];
        out.profile[static_cast<std::size_t>(x)] = cum;  // P(wall <= x) = P(site x is I)
    }
    return out;
}

double otoc1_front_closed_form(int d, int t, int x, int x0) {
    if (t < 1) throw std::invalid_argument("closed form: t >= 1");
    double dd = static_cast<double>(d) * d;
    double p = dd / (dd + 1.0);
    double w_s = dd * dd / (dd * dd - 1.0);
    double w_i = -1.0 / (dd * dd - 1.0);
    // wall starts at x0 + 2 after the first layer, then walks with absorption at x0
    int lo = x0, hi = x0 + t + 2;
    std::vector<double> w(static_cast<std::size_t>(hi - lo + 1), 0.0);
    w[static_cast<std::size_t>(x0 + 2 - lo)] = 1.0;
    for (int lay = 2; lay <= t; ++lay) {
        std::vector<double> nw(w.size(), 0.0);
        nw[0] = w[0];  // the shrunk-to-nothing domain is stationary
        for (std::size_t a = 1; a + 1 < w.size(); ++a) {
            nw[a + 1] += w[a] * p;
            nw[a - 1] += w[a] * (1.0 - p);
        }
        w = std::move(nw);
    }
    // P(wall <= x); the uniform-identity component has its wall at x0 <= x always
    double cdf = 0.0;
    for (int a = lo; a <= std::min(x, hi); ++a) cdf += w[static_cast<std::size_t>(a - lo)];
    return w_i + w_s * cdf;
}

// --- exact permutation evolution ---------------------------------------------------

PermEvolutionResult exact_perm_evolution(int r, int d, int chain, int layers,
                                         std::size_t config_cap) {
    if (r != 2 && r != 4) throw std::invalid_argument("exact_perm_evolution: r must be 2 or 4");
    if (chain < 2) throw std::invalid_argument("exact_perm_evolution: chain too short");
    const SymmetricGroup& g = group_of(r);
    const int R = g.size();
    if (std::pow(static_cast<double>(R), chain) > 9e18)
        throw std::invalid_argument("exact_perm_evolution: chain too long to pack");
    const int omega = cycle_omega_index(r);
    const int id = g.index_of(Permutation::identity(r));
    TransferTensor t = transfer_tensor_rescaled(r, d, g.perm(omega));

    auto site_label = [&](std::uint64_t cfg, int site) -> int {
        for (int s = 0; s < site; ++s) cfg /= static_cast<std::uint64_t>(R);
        return static_cast<int>(cfg % static_cast<std::uint64_t>(R));
    };
    auto with_labels = [&](std::uint64_t cfg, int i, int j, int tau) -> std::uint64_t {
        std::uint64_t pi = 1, pj = 1;
        for (int s = 0; s < i; ++s) pi *= static_cast<std::uint64_t>(R);
        for (int s = 0; s < j; ++s) pj *= static_cast<std::uint64_t>(R);
        int li = site_label(cfg, i), lj = site_label(cfg, j);
        return cfg + pi * static_cast<std::uint64_t>(tau - li) + pj * static_cast<std::uint64_t>(tau - lj);
    };

    std::unordered_map<std::uint64_t, double> state;
    {
        std::vector<double> init = init_gate_coeffs(r, d, omega);
        // configuration: sites 0,1 = tau, the rest identity (identity has index id)
        std::uint64_t base = 0;
        std::uint64_t mult = 1;
        for (int s = 0; s < chain; ++s) {
            base += mult * static_cast<std::uint64_t>(id);
            mult *= static_cast<std::uint64_t>(R);
        }
        for (int tau = 0; tau < R; ++tau) {
            if (std::abs(init[static_cast<std::size_t>(tau)]) < 1e-300) continue;
            state[with_labels(base, 0, 1, tau)] = init[static_cast<std::size_t>(tau)];
        }
    }

    ChainLayout layout = ChainLayout::brickwork(chain, layers);
    bool first_gate_skipped = false;
    for (int lay = 0; lay < layers; ++lay) {
        for (const auto& [i, j] : layout.gates[static_cast<std::size_t>(lay)]) {
            if (!first_gate_skipped && lay == 0 && i == 0) {
                first_gate_skipped = true;  // consumed by the initial projection
                continue;
            }
            std::unordered_map<std::uint64_t, double> next;
            next.reserve(state.size() * 4);
            for (const auto& [cfg, c] : state) {
                int mu = site_label(cfg, i), nu = site_label(cfg, j);
                if (mu == nu) {
                    // uniform inputs are stationary with weight exactly 1
                    next[cfg] += c;
                    continue;
                }
                for (int tau = 0; tau < R; ++tau) {
                    double w = t.at(tau, mu, nu);
                    if (std::abs(w) < 1e-14) continue;
                    next[with_labels(cfg, i, j, tau)] += c * w;
                }
            }
            if (next.size() > config_cap)
                throw std::runtime_error("exact_perm_evolution: configuration cap exceeded");
            state = std::move(next);
        }
    }

    PermEvolutionResult res;
    res.coefficients = state;
    double tot = 0.0;
    for (const auto& [cfg, c] : state) tot += c;
    res.total_weight = tot;
    res.mean_otoc_profile.assign(static_cast<std::size_t>(chain), 0.0);
    std::vector<char> f(static_cast<std::size_t>(R));
    for (int a = 0; a < R; ++a) f[static_cast<std::size_t>(a)] = all_cycles_even(g, omega, a) ? 1 : 0;
    for (const auto& [cfg, c] : state) {
        std::uint64_t rest = cfg;
        for (int x = 0; x < chain; ++x) {
            int lab = static_cast<int>(rest % static_cast<std::uint64_t>(R));
            rest /= static_cast<std::uint64_t>(R);
            if (f[static_cast<std::size_t>(lab)]) res.mean_otoc_profile[static_cast<std::size_t>(x)] += c;
        }
    }
    return res;
}

// --- trajectory sampler --------------------------------------------------------------

ChainLayout ChainLayout::brickwork(int chain, int layers) {
    ChainLayout l;
    l.chain = chain;
    l.layers = layers;
    for (int lay = 1; lay <= layers; ++lay) {
        std::vector<std::pair<int, int>> gates;
        int start = (lay % 2 == 1) ? 0 : 1;
        for (int i = start; i + 1 < chain; i += 2) gates.push_back({i, i + 1});
        l.gates.push_back(std::move(gates));
    }
    return l;
}

int ChainLayout::total_gates() const {
    int c = 0;
    for (const auto& lay : gates) c += static_cast<int>(lay.size());
    return c;
}

TrajectoryResult trajectory_sampler_c4(const ChainLayout& layout, int d, int n_trajectories,
                                       std::uint64_t seed, int measure_site, SamplerBasis basis) {
    const int r = 4;
    const SymmetricGroup& g = group_of(r);
    const int R = g.size();
    const int omega = cycle_omega_index(r);
    const int id = g.index_of(Permutation::identity(r));
    if (measure_site < 0) measure_site = layout.chain - 1;
    TransferTensor t = transfer_tensor_rescaled(r, d, g.perm(omega));
    if (basis == SamplerBasis::b2_independent14 && d != 2)
        throw std::invalid_argument("trajectory sampler: B2 basis is defined for d = 2");

    // B1: outputs are the 24 diagonal pairs (tau, tau).
    // B2: re-express each pi_tau in the 14 independent permutations; outputs
    // become label pairs and the per-gate tables grow accordingly.
    std::vector<int> labels;  // group indices of the sampler labels
    Eigen::MatrixXd rehat;    // [tau][label]: rescaled expansion, rows sum to 1
    if (basis == SamplerBasis::b1_full24) {
        labels.resize(static_cast<std::size_t>(R));
        std::iota(labels.begin(), labels.end(), 0);
    } else {
        for (const auto& p : stable_permutations(g.perm(omega))) labels.push_back(g.index_of(p));
        const int L = static_cast<int>(labels.size());
        // dense rep of pi_sigma on (C_2)^{x4} as 256-dim vectors
        auto pvec = [&](int gi) {
            Eigen::VectorXd v = Eigen::VectorXd::Zero(256);
            const Permutation& p = g.perm(gi);
            Permutation pinv = p.inverse();
            for (int b = 0; b < 16; ++b) {
                int nb = 0;
                for (int j = 0; j < 4; ++j) nb |= ((b >> pinv.images[static_cast<std::size_t>(j)]) & 1) << j;
                v(nb * 16 + b) = 1.0;
            }
            return v;
        };
        Eigen::MatrixXd basis_mat(256, L);
        for (int l = 0; l < L; ++l) basis_mat.col(l) = pvec(labels[static_cast<std::size_t>(l)]);
        Eigen::MatrixXd expand(R, L);
        for (int tau = 0; tau < R; ++tau) {
            Eigen::VectorXd rhs = pvec(tau);
            Eigen::VectorXd sol = basis_mat.colPivHouseholderQr().solve(rhs);
            double resid = (basis_mat * sol - rhs).norm();
            if (resid > 1e-8) throw std::runtime_error("B2 basis does not span the permutations");
            expand.row(tau) = sol.transpose();
        }
        rehat.resize(R, L);
        for (int tau = 0; tau < R; ++tau)
            for (int l = 0; l < L; ++l)
                rehat(tau, l) = expand(tau, l) * overlap(g, omega, labels[static_cast<std::size_t>(l)], d, r) /
                                overlap(g, omega, tau, d, r);
    }
    const int L = static_cast<int>(labels.size());

    // per input pair (mu, nu) over labels: output categorical tables
    struct Row {
        std::vector<double> cdf;   // over outputs
        std::vector<int> out_a, out_b;
        std::vector<double> sign;
        double z = 0.0;  // sum |T|
    };
    std::vector<Row> rows(static_cast<std::size_t>(L) * L);
    for (int mi = 0; mi < L; ++mi)
        for (int ni = 0; ni < L; ++ni) {
            Row& row = rows[static_cast<std::size_t>(mi) * L + ni];
            int mu = labels[static_cast<std::size_t>(mi)], nu = labels[static_cast<std::size_t>(ni)];
            auto add = [&](double w, int a, int b) {
                if (std::abs(w) < 1e-14) return;
                row.z += std::abs(w);
                row.cdf.push_back(row.z);
                row.out_a.push_back(a);
                row.out_b.push_back(b);
                row.sign.push_back(w >= 0 ? 1.0 : -1.0);
            };
            if (basis == SamplerBasis::b1_full24) {
                for (int tau = 0; tau < R; ++tau) add(t.at(tau, mu, nu), tau, tau);
            } else {
                for (int la = 0; la < L; ++la)
                    for (int lb = 0; lb < L; ++lb) {
                        double w = 0.0;
                        for (int tau = 0; tau < R; ++tau)
                            w += t.at(tau, mu, nu) * rehat(tau, la) * rehat(tau, lb);
                        add(w, la, lb);
                    }
            }
        }

    // initial two-site distribution from the projected butterfly
    std::vector<double> init24 = init_gate_coeffs(r, d, omega);
    std::vector<double> init_w;
    std::vector<std::pair<int, int>> init_lab;
    double init_z = 0.0;
    std::vector<double> init_sign;
    if (basis == SamplerBasis::b1_full24) {
        for (int tau = 0; tau < R; ++tau) {
            double w = init24[static_cast<std::size_t>(tau)];
            if (std::abs(w) < 1e-14) continue;
            init_z += std::abs(w);
            init_w.push_back(init_z);
            init_lab.push_back({tau, tau});
            init_sign.push_back(w >= 0 ? 1.0 : -1.0);
        }
    } else {
        for (int la = 0; la < L; ++la)
            for (int lb = 0; lb < L; ++lb) {
                double w = 0.0;
                for (int tau = 0; tau < R; ++tau)
                    w += init24[static_cast<std::size_t>(tau)] * rehat(tau, la) * rehat(tau, lb);
                if (std::abs(w) < 1e-12) continue;
                init_z += std::abs(w);
                init_w.push_back(init_z);
                init_lab.push_back({la, lb});
                init_sign.push_back(w >= 0 ? 1.0 : -1.0);
            }
    }

    std::vector<char> f(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l)
        f[static_cast<std::size_t>(l)] = all_cycles_even(g, omega, labels[static_cast<std::size_t>(l)]) ? 1 : 0;
    int id_label = -1;
    for (int l = 0; l < L; ++l)
        if (labels[static_cast<std::size_t>(l)] == id) id_label = l;

    const int total_g = layout.total_gates();
    std::vector<stats::MeanVar> omega_by_gate(static_cast<std::size_t>(total_g));
    std::vector<double> omegas(static_cast<std::size_t>(n_trajectories));
    std::vector<double> numer(static_cast<std::size_t>(n_trajectories));
    for (int tr = 0; tr < n_trajectories; ++tr) {
        Philox rng = substream(seed, 0x7261, static_cast<std::uint64_t>(tr));
        std::vector<int> site(static_cast<std::size_t>(layout.chain), id_label);
        // initial draw
        double u = rng.uniform() * init_z;
        std::size_t pick = init_w.size() - 1;
        for (std::size_t q = 0; q < init_w.size(); ++q)
            if (u < init_w[q]) {
                pick = q;
                break;
            }
        site[0] = init_lab[pick].first;
        site[1] = init_lab[pick].second;
        double w_traj = init_sign[pick] * init_z;
        int gate_idx = 0;
        bool first_skipped = false;
        for (int lay = 0; lay < layout.layers; ++lay) {
            for (const auto& [i, j] : layout.gates[static_cast<std::size_t>(lay)]) {
                if (!first_skipped && lay == 0 && i == 0) {
                    first_skipped = true;
                    omega_by_gate[static_cast<std::size_t>(gate_idx++)].add(w_traj);
                    continue;
                }
                const Row& row =
                    rows[static_cast<std::size_t>(site[static_cast<std::size_t>(i)]) * L +
                         site[static_cast<std::size_t>(j)]];
                if (row.cdf.size() == 1) {
                    site[static_cast<std::size_t>(i)] = row.out_a[0];
                    site[static_cast<std::size_t>(j)] = row.out_b[0];
                    w_traj *= row.sign[0] * row.z;
                } else {
                    double v = rng.uniform() * row.z;
                    std::size_t q = std::lower_bound(row.cdf.begin(), row.cdf.end(), v) -
                                    row.cdf.begin();
                    if (q >= row.cdf.size()) q = row.cdf.size() - 1;
                    site[static_cast<std::size_t>(i)] = row.out_a[q];
                    site[static_cast<std::size_t>(j)] = row.out_b[q];
                    w_traj *= row.sign[q] * row.z;
                }
                omega_by_gate[static_cast<std::size_t>(gate_idx++)].add(w_traj);
            }
        }
        omegas[static_cast<std::size_t>(tr)] = w_traj;
        numer[static_cast<std::size_t>(tr)] =
            w_traj * (f[static_cast<std::size_t>(site[static_cast<std::size_t>(measure_site)])] ? 1.0 : 0.0);
    }

    TrajectoryResult res;
    double sw = std::accumulate(omegas.begin(), omegas.end(), 0.0);
    double sn = std::accumulate(numer.begin(), numer.end(), 0.0);
    res.estimate = sn / sw;
    // jackknife over batches for the ratio estimator
    const int nb = 20;
    std::vector<double> batch_ratio;
    std::size_t per = omegas.size() / nb;
    if (per >= 1) {
        for (int b = 0; b < nb; ++b) {
            std::size_t lo = static_cast<std::size_t>(b) * per;
            std::size_t hi = (b == nb - 1) ? omegas.size() : lo + per;
            double bw = 0, bn = 0;
            for (std::size_t i = lo; i < hi; ++i) {
                bw += omegas[i];
                bn += numer[i];
            }
            if (bw != 0.0) batch_ratio.push_back(bn / bw);
        }
        if (batch_ratio.size() > 1) {
            stats::MeanVar mv;
            for (double v : batch_ratio) mv.add(v);
            res.stderr = std::sqrt(mv.variance() / static_cast<double>(batch_ratio.size()));
        }
    }
    stats::MeanVar momega;
    double pos = 0;
    for (double w : omegas) {
        momega.add(w);
        if (w > 0) pos += 1.0;
    }
    res.diag.var_omega = momega.variance();
    res.diag.mean_sign = 2.0 * pos / static_cast<double>(omegas.size()) - 1.0;
    for (const auto& mv : omega_by_gate) res.diag.var_omega_by_gate.push_back(mv.variance());
    // log10 |omega| histogram, 50 bins
    double lo = 1e300, hi = -1e300;
    for (double w : omegas) {
        double l10 = std::log10(std::max(std::abs(w), 1e-300));
        lo = std::min(lo, l10);
        hi = std::max(hi, l10);
    }
    if (hi <= lo) hi = lo + 1.0;
    res.diag.hist_lo = lo;
    res.diag.hist_hi = hi;
    res.diag.log10_weight_histogram.assign(50, 0.0);
    for (double w : omegas) {
        double l10 = std::log10(std::max(std::abs(w), 1e-300));
        int b = std::clamp(static_cast<int>((l10 - lo) / (hi - lo) * 50.0), 0, 49);
        res.diag.log10_weight_histogram[static_cast<std::size_t>(b)] += 1.0;
    }
    return res;
}

}  // namespace otoc::perm
