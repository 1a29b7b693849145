// Serial-reference vs OpenMP-kernel comparison for the hot loops: statevector
// gate application, Pauli application, inner products, and the Monte Carlo
// samplers that parallelize over independent samples.

#include <benchmark/benchmark.h>

#include "otoc/circuits.hpp"
#include "otoc/montecarlo.hpp"
#include "otoc/statevector.hpp"

using namespace otoc;

namespace {

sv::StateVector random_state(int n, std::uint64_t seed) {
    sv::StateVector s = sv::StateVector::zero_state(n);
    Philox rng(seed);
    for (auto& a : s.amp) a = {gaussian(rng), gaussian(rng)};
    double norm = std::sqrt(sv::kernels::sum_sq(s.amp, sv::Exec::serial));
    for (auto& a : s.amp) a /= norm;
    return s;
}

circuits::CircuitInstance bench_instance(int n, int t) {
    QubitGrid grid(1, n);
    return circuits::generate_instance(grid, circuits::Pattern::brickwork_1d, t, {0, 0},
                                       {{0, n - 1}}, 7);
}

template <sv::Exec ex>
void bm_apply_1q(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    auto psi = random_state(n, 3);
    Eigen::Matrix2cd u = circuits::sq_matrix({1.1, 0.3, 0});
    for (auto _ : state) {
        sv::kernels::apply_1q(psi.amp, n / 2, u, ex);
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * (1ll << n));
}

template <sv::Exec ex>
void bm_apply_2q(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    auto psi = random_state(n, 3);
    Eigen::Matrix4cd u = circuits::tq_matrix({0.35, 0, 1});
    for (auto _ : state) {
        sv::kernels::apply_2q(psi.amp, n / 2, n / 2 + 1, u, ex);
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * (1ll << n));
}

template <sv::Exec ex>
void bm_evolve(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    auto inst = bench_instance(n, 8);
    auto psi = random_state(n, 5);
    for (auto _ : state) {
        sv::apply_circuit(inst, psi, sv::Direction::forward, ex);
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * (1ll << n) * 8);
}

template <sv::Exec ex>
void bm_vanilla_mc(benchmark::State& state) {
    auto inst = bench_instance(10, 8);
    for (auto _ : state) {
        auto est = mc::vanilla_mc_otoc1(inst, 2000, 11, ex);
        benchmark::DoNotOptimize(est.value);
    }
    state.SetItemsProcessed(state.iterations() * 2000);
}

}  // namespace

BENCHMARK_TEMPLATE(bm_apply_1q, sv::Exec::serial)->Arg(16)->Arg(20);
BENCHMARK_TEMPLATE(bm_apply_1q, sv::Exec::parallel)->Arg(16)->Arg(20);
BENCHMARK_TEMPLATE(bm_apply_2q, sv::Exec::serial)->Arg(16)->Arg(20);
BENCHMARK_TEMPLATE(bm_apply_2q, sv::Exec::parallel)->Arg(16)->Arg(20);
BENCHMARK_TEMPLATE(bm_evolve, sv::Exec::serial)->Arg(14)->Arg(18);
BENCHMARK_TEMPLATE(bm_evolve, sv::Exec::parallel)->Arg(14)->Arg(18);
BENCHMARK_TEMPLATE(bm_vanilla_mc, sv::Exec::serial);
BENCHMARK_TEMPLATE(bm_vanilla_mc, sv::Exec::parallel);

BENCHMARK_MAIN();
