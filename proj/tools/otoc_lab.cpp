// otoc-lab: batch front-end wiring circuit generation, the exact oracle, the
// Monte Carlo estimators, the statistical models, and the metrics pipeline.
//
//   otoc-lab <command> --config <file> [--seed N] [--out PATH]
//            [--format csv|json] [--threads K]
//
// Config files are JSON; the "ensemble" block uses the circuit schema
// documented in docs/circuit_schema.md plus generator parameters.

#include <omp.h>

#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>

#include "otoc/circuits.hpp"
#include "otoc/io.hpp"
#include "otoc/learning.hpp"
#include "otoc/metrics.hpp"
#include "otoc/montecarlo.hpp"
#include "otoc/permutation.hpp"
#include "otoc/rmt.hpp"
#include "otoc/statevector.hpp"

using json = nlohmann::ordered_json;
using namespace otoc;

namespace {

struct Common {
    std::string config_path;
    std::uint64_t seed = 1;
    std::string out;
    std::string format = "csv";
    int threads = 0;
};

json load_config(const Common& c) {
    if (c.config_path.empty()) throw std::invalid_argument("--config is required");
    return json::parse(io::read_file(c.config_path));
}

// file references inside a config resolve relative to the config itself
std::string resolve_near_config(const Common& c, const std::string& path) {
    if (path.empty() || path.front() == '/') return path;
    auto slash = c.config_path.find_last_of('/');
    if (slash == std::string::npos) return path;
    return c.config_path.substr(0, slash + 1) + path;
}

void emit(const Common& c, const std::string& text) {
    if (c.out.empty())
        std::cout << text;
    else
        io::write_file(c.out, text);
}

std::vector<circuits::CircuitInstance> make_ensemble(const json& cfg, std::uint64_t seed) {
    if (!cfg.contains("ensemble")) throw std::invalid_argument("config needs an 'ensemble' block");
    const json& e = cfg["ensemble"];
    std::vector<GridPos> disabled;
    if (e["grid"].contains("disabled"))
        for (const auto& d : e["grid"]["disabled"]) disabled.push_back({d[0], d[1]});
    QubitGrid grid(e["grid"]["rows"], e["grid"]["cols"], disabled);
    circuits::GenerateOptions opts;
    if (e.value("theta_mode", "ensemble") == std::string("fixed_half_pi"))
        opts.theta_mode = circuits::ThetaMode::fixed_half_pi;
    opts.phase_2q = e.value("phase_2q", 0.35);
    GridPos qm{e["q_m"][0], e["q_m"][1]};
    std::vector<GridPos> qb;
    for (const auto& b : e["q_b"]) qb.push_back({b[0], b[1]});
    int t = e["t"];
    int count = e.value("instances", 1);
    std::uint64_t seed0 = e.value("seed0", seed);
    auto pattern = circuits::pattern_from_name(e["pattern"]);
    std::vector<circuits::CircuitInstance> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        out.push_back(circuits::generate_instance(grid, pattern, t, qm, qb,
                                                  hash_mix(seed0, static_cast<std::uint64_t>(i)),
                                                  opts));
    if (e.value("lightcone_prune", false))
        for (auto& inst : out) inst = circuits::lightcone_prune(inst);
    return out;
}

std::string render_records(const Common& c, std::vector<io::Record> recs) {
    std::sort(recs.begin(), recs.end(),
              [](const io::Record& a, const io::Record& b) { return a.instance_id < b.instance_id; });
    return c.format == "json" ? io::to_json(recs) : io::to_csv(recs);
}

std::string instance_id_of(std::size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "i%04zu", index);
    return buf;
}

sv::Initial initial_from(const json& blk) {
    std::string kind = blk.value("initial", "zero");
    if (kind == "zero") return sv::Initial::zero();
    if (kind == "infinite_temperature") {
        if (blk.value("exhaustive", false)) return sv::Initial::inf_temp_exhaustive();
        return sv::Initial::inf_temp(blk.value("initial_samples", 64),
                                     blk.value("initial_seed", 7ull));
    }
    throw std::invalid_argument("unknown initial state: " + kind);
}

int cmd_generate(const Common& c) {
    json cfg = load_config(c);
    auto ensemble = make_ensemble(cfg, c.seed);
    json out = json::array();
    for (const auto& inst : ensemble) out.push_back(json::parse(circuits::serialize(inst)));
    emit(c, out.dump(2) + "\n");
    return 0;
}

int cmd_exact(const Common& c) {
    json cfg = load_config(c);
    auto ensemble = make_ensemble(cfg, c.seed);
    const json blk = cfg.value("exact", json::object());
    int k = blk.value("k", 1);
    sv::Initial init = initial_from(blk);
    std::vector<io::Record> recs(ensemble.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(ensemble.size()); ++i) {
        const auto& inst = ensemble[static_cast<std::size_t>(i)];
        double v = sv::otoc_k(inst, k, init, sv::Exec::serial);
        recs[static_cast<std::size_t>(i)] = {instance_id_of(static_cast<std::size_t>(i)),
                                             "otoc", k, v, 0.0, inst.seed};
    }
    emit(c, render_records(c, std::move(recs)));
    return 0;
}

int cmd_mc(const Common& c) {
    json cfg = load_config(c);
    auto ensemble = make_ensemble(cfg, c.seed);
    const json blk = cfg.value("mc", json::object());
    int samples = blk.value("samples", 100000);
    std::vector<io::Record> recs;
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        auto est = mc::vanilla_mc_otoc1(ensemble[i], samples, hash_mix(c.seed, i));
        recs.push_back({instance_id_of(i), "otoc_mc", 1, est.value, est.stderr,
                        ensemble[i].seed});
    }
    emit(c, render_records(c, std::move(recs)));
    return 0;
}

int cmd_cmc(const Common& c) {
    json cfg = load_config(c);
    auto ensemble = make_ensemble(cfg, c.seed);
    const json blk = cfg.value("cmc", json::object());
    mc::CmcConfig mcc;
    mcc.cache_limit = blk.value("cache_limit", 1u << 20);
    mcc.tol = blk.value("tol", 0.001);
    mcc.samples = blk.value("samples", 100);
    std::vector<io::Record> recs;
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        mcc.seed = hash_mix(c.seed, i);
        auto est = mc::cached_mc_otoc1(ensemble[i], mcc);
        recs.push_back({instance_id_of(i), "otoc_cmc", 1, est.value, est.stderr,
                        ensemble[i].seed});
    }
    emit(c, render_records(c, std::move(recs)));
    return 0;
}

int cmd_pairings(const Common& c) {
    json cfg = load_config(c);
    auto ensemble = make_ensemble(cfg, c.seed);
    const json blk = cfg.value("pairings", json::object());
    mc::PairingConfig pc;
    pc.cut_cycle = blk.value("cut_cycle", (ensemble[0].t() + 1) / 2);
    pc.samples = blk.value("samples", 200);
    std::string kind = blk.value("pairing", "sum_of_four");
    if (kind == "AABB") pc.pairing = mc::PairingKind::AABB;
    else if (kind == "ABAB") pc.pairing = mc::PairingKind::ABAB;
    else if (kind == "ABBA") pc.pairing = mc::PairingKind::ABBA;
    else if (kind == "AAAA") pc.pairing = mc::PairingKind::AAAA;
    else pc.pairing = mc::PairingKind::sum_of_four;
    bool with_exact = blk.value("with_exact", true);
    std::vector<io::Record> recs;
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        pc.seed = hash_mix(c.seed, i);
        auto est = mc::diagonal_pairings_otoc2(ensemble[i], pc);
        recs.push_back({instance_id_of(i), "otoc2_pairing_" + kind, 2, est.value, est.stderr,
                        ensemble[i].seed});
        if (with_exact)
            recs.push_back({instance_id_of(i), "otoc2_exact", 2, sv::otoc_k(ensemble[i], 2), 0.0,
                            ensemble[i].seed});
    }
    emit(c, render_records(c, std::move(recs)));
    return 0;
}

int cmd_gate_rank(const Common& c) {
    json cfg = load_config(c);
    auto ensemble = make_ensemble(cfg, c.seed);
    const json blk = cfg.value("gate_rank", json::object());
    auto res = mc::gate_removal_ranking(ensemble, blk.value("proxy_samples", 2000), c.seed);
    json out;
    out["ranking"] = json::array();
    for (const auto& gi : res.ranking) {
        const auto& g = ensemble[0]
                            .cycles[static_cast<std::size_t>(gi.gate.cycle - 1)]
                            .tq[static_cast<std::size_t>(gi.gate.index)];
        GridPos pa = ensemble[0].grid.position(g.a), pb = ensemble[0].grid.position(g.b);
        out["ranking"].push_back({{"cycle", gi.gate.cycle},
                                  {"sites", {{pa.r, pa.c}, {pb.r, pb.c}}},
                                  {"proxy_snr", gi.proxy_snr}});
    }
    out["cumulative_snr"] = res.cumulative_snr;
    out["fit"] = {{"amplitude", res.fit_amplitude}, {"tau", res.fit_tau}};
    emit(c, out.dump(2) + "\n");
    return 0;
}

int cmd_perm(const Common& c) {
    json cfg = load_config(c);
    const json blk = cfg.value("perm", json::object());
    std::string mode = blk.value("mode", "walk");
    int d = blk.value("d", 2);
    if (mode == "walk") {
        int chain = blk.value("chain", 200);
        int layers = blk.value("layers", 120);
        auto w = perm::otoc1_walk_profile(d, chain, layers);
        std::string csv = "x,t,value\n";
        for (int x = 0; x < chain; ++x)
            csv += std::to_string(x) + "," + std::to_string(layers) + "," +
                   io::format_double(w.profile[static_cast<std::size_t>(x)]) + "\n";
        emit(c, csv);
        return 0;
    }
    if (mode == "exact") {
        int r = blk.value("r", 4);
        int chain = blk.value("chain", 4);
        int layers = blk.value("layers", 3);
        auto res = perm::exact_perm_evolution(r, d, chain, layers);
        std::string csv = "x,t,value\n";
        for (int x = 0; x < chain; ++x)
            csv += std::to_string(x) + "," + std::to_string(layers) + "," +
                   io::format_double(res.mean_otoc_profile[static_cast<std::size_t>(x)]) + "\n";
        emit(c, csv);
        return 0;
    }
    if (mode == "sampler") {
        auto layout = perm::ChainLayout::brickwork(blk.value("chain", 8), blk.value("layers", 6));
        auto res = perm::trajectory_sampler_c4(layout, d, blk.value("trajectories", 20000), c.seed);
        json out;
        out["estimate"] = res.estimate;
        out["stderr"] = res.stderr;
        out["var_omega"] = res.diag.var_omega;
        out["mean_sign"] = res.diag.mean_sign;
        out["var_omega_by_gate"] = res.diag.var_omega_by_gate;
        out["log10_weight_histogram"] = {{"lo", res.diag.hist_lo},
                                         {"hi", res.diag.hist_hi},
                                         {"counts", res.diag.log10_weight_histogram}};
        emit(c, out.dump(2) + "\n");
        return 0;
    }
    throw std::invalid_argument("perm: unknown mode " + mode);
}

int cmd_rmt(const Common& c) {
    json cfg = load_config(c);
    const json blk = cfg.value("rmt", json::object());
    std::string mode = blk.value("mode", "density");
    if (mode == "density") {
        double gamma = blk.value("gamma", 0.3);
        int points = blk.value("points", 801);
        std::string csv = "phi,density\n";
        for (int i = 0; i < points; ++i) {
            double phi = 1e-4 + (3.14159265358979 - 2e-4) * i / (points - 1);
            csv += io::format_double(phi) + "," +
                   io::format_double(rmt::spectral_density_at(gamma, phi)) + "\n";
        }
        emit(c, csv);
        return 0;
    }
    if (mode == "otoc") {
        std::string csv = "gamma,k,closed_form,semicircle\n";
        for (double g = 0.0; g <= blk.value("gamma_max", 2.0) + 1e-9; g += blk.value("step", 0.05))
            for (int k = 1; k <= 3; ++k)
                csv += io::format_double(g) + "," + std::to_string(k) + "," +
                       io::format_double(rmt::closed_form_otoc(g, k)) + "," +
                       io::format_double(g > 0 ? rmt::semicircle_otoc(g, k) : 1.0) + "\n";
        emit(c, csv);
        return 0;
    }
    if (mode == "ensemble") {
        auto s = rmt::sample_ensemble(blk.value("gamma", 0.3), blk.value("dim", 1024),
                                      blk.value("draws", 200), c.seed, 3, false);
        json out;
        out["otoc_mean"] = s.otoc_mean;
        out["otoc_stderr"] = s.otoc_stderr;
        out["draws"] = s.n_draws;
        emit(c, out.dump(2) + "\n");
        return 0;
    }
    if (mode == "gamma_of_t") {
        int n = blk.value("n", 10);
        int instances = blk.value("instances", 5);
        std::vector<int> ts;
        for (const auto& t : blk.value("t_values", json::array({6, 8, 10}))) ts.push_back(t);
        std::vector<std::vector<sv::SpectralSample>> per_t;
        for (int t : ts) {
            std::vector<sv::SpectralSample> row;
            for (int i = 0; i < instances; ++i) {
                auto circ = sv::haar_brickwork_chain(
                    n, t, hash_mix(c.seed, static_cast<std::uint64_t>(t * 1000 + i)));
                row.push_back(sv::correlation_spectrum_raw(circ, n - 1, 0,
                                                           sv::SpectrumMethod::mirrored));
            }
            per_t.push_back(std::move(row));
        }
        auto res = rmt::match_gamma_to_depth(per_t, ts);
        json out;
        out["t"] = res.t;
        out["gap_full_width"] = res.gap_full_width;
        out["gamma"] = res.gamma;
        out["gapless"] = res.gapless;
        emit(c, out.dump(2) + "\n");
        return 0;
    }
    throw std::invalid_argument("rmt: unknown mode " + mode);
}

int cmd_fit_noise(const Common& c) {
    json cfg = load_config(c);
    const json blk = cfg.at("fit_noise");
    auto nois_rows = io::column_from_csv(io::read_file(resolve_near_config(c, blk.at("nois_csv"))));
    auto exact_rows = io::column_from_csv(io::read_file(resolve_near_config(c, blk.at("exact_csv"))));
    metrics::SignalSet nois, exact;
    for (const auto& [id, v] : nois_rows) nois.values.push_back(v);
    for (const auto& [id, v] : exact_rows) exact.values.push_back(v);
    auto p = metrics::fit_noise_model_mle(nois, exact);
    json out;
    out["g"] = p.g;
    out["c"] = p.c;
    out["sigma_m"] = p.sigma_m;
    out["sigma_a"] = p.sigma_a;
    out["covariance"] = json::array();
    for (int i = 0; i < 4; ++i) {
        json row = json::array();
        for (int j = 0; j < 4; ++j) row.push_back(p.covariance(i, j));
        out["covariance"].push_back(row);
    }
    emit(c, out.dump(2) + "\n");
    return 0;
}

int cmd_snr(const Common& c) {
    json cfg = load_config(c);
    const json blk = cfg.at("snr");
    auto a_rows = io::column_from_csv(io::read_file(resolve_near_config(c, blk.at("a_csv"))));
    auto b_rows = io::column_from_csv(io::read_file(resolve_near_config(c, blk.at("b_csv"))));
    metrics::SignalSet a, b;
    for (const auto& [id, v] : a_rows) a.values.push_back(v);
    for (const auto& [id, v] : b_rows) b.values.push_back(v);
    json out;
    out["snr"] = metrics::snr(a, b);
    out["rho"] = metrics::pearson(a, b);
    out["instances"] = a.values.size();
    emit(c, out.dump(2) + "\n");
    return 0;
}

int cmd_learn_phase(const Common& c) {
    json cfg = load_config(c);
    auto ensemble = make_ensemble(cfg, c.seed);
    const json blk = cfg.value("learn_phase", json::object());
    learning::LearnPhaseConfig lc;
    lc.ensemble = std::move(ensemble);
    lc.seed = c.seed;
    lc.diag_samples = blk.value("diag_samples", 96);
    lc.xi_star = blk.at("xi_star");
    if (blk.contains("gate")) {
        lc.target_gate = {blk["gate"].at("cycle"), blk["gate"].at("index")};
    } else {
        lc.target_gate = learning::default_target_gate(lc.ensemble[0]);
    }
    double start = blk.at("xi_grid").at("start");
    double stop = blk.at("xi_grid").at("stop");
    double step = blk.at("xi_grid").at("step");
    for (double x = start; x <= stop + 1e-12; x += step) lc.xi_grid.push_back(x);
    auto res = learning::learn_phase(lc);
    json out;
    out["xi_grid"] = res.xi_grid;
    out["cost"] = res.cost;
    out["argmin"] = res.argmin;
    out["target_gate"] = {{"cycle", lc.target_gate.cycle}, {"index", lc.target_gate.index}};
    emit(c, out.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"otoc-lab: classical OTOC simulation toolkit"};
    app.require_subcommand(1);
    Common common;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "JSON config file")->required();
        sub->add_option("--seed", common.seed, "global seed (default 1)");
        sub->add_option("--out", common.out, "output path (default stdout)");
        sub->add_option("--format", common.format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--threads", common.threads, "worker thread cap");
    };

    std::map<std::string, int (*)(const Common&)> handlers = {
        {"generate", cmd_generate},   {"exact", cmd_exact},
        {"mc", cmd_mc},               {"cmc", cmd_cmc},
        {"pairings", cmd_pairings},   {"gate-rank", cmd_gate_rank},
        {"perm", cmd_perm},           {"rmt", cmd_rmt},
        {"fit-noise", cmd_fit_noise}, {"snr", cmd_snr},
        {"learn-phase", cmd_learn_phase}};
    std::map<std::string, std::string> help = {
        {"generate", "emit circuit instances in the lossless schema"},
        {"exact", "exact statevector OTOC^k per instance"},
        {"mc", "vanilla Monte Carlo OTOC^1 per instance"},
        {"cmc", "cached Monte Carlo OTOC^1 per instance"},
        {"pairings", "diagonal-pairing OTOC^2 estimates (with exact refs)"},
        {"gate-rank", "vanilla-MC gate-removal ranking and cumulative SNR"},
        {"perm", "Haar-average statistical model (walk/exact/sampler)"},
        {"rmt", "random-matrix spectral model (density/otoc/ensemble/gamma_of_t)"},
        {"fit-noise", "MLE fit of the multiplicative/additive error model"},
        {"snr", "rescaled SNR and Pearson rho between two value columns"},
        {"learn-phase", "one-parameter conditional-phase learning demo"}};
    for (auto& [name, fn] : handlers) add_common(app.add_subcommand(name, help[name]));

    CLI11_PARSE(app, argc, argv);
    try {
        if (common.threads > 0) omp_set_num_threads(common.threads);
        for (auto& [name, fn] : handlers)
            if (app.got_subcommand(name)) return fn(common);
        std::cerr << "no subcommand selected\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
