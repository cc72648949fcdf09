#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "eastlab/graphical.hpp"
#include "eastlab/kernels.hpp"

using namespace eastlab;

namespace {

std::vector<double> random_vector(int L) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(std::size_t(1) << L);
    for (auto& x : v) x = u(rng);
    return v;
}

template <void (*F)(int, double, const double*, double*)>
void BM_matvec(benchmark::State& st) {
    const int L = int(st.range(0));
    auto x = random_vector(L);
    std::vector<double> y(x.size());
    for (auto _ : st) {
        F(L, 0.2, x.data(), y.data());
        benchmark::DoNotOptimize(y.data());
    }
    st.SetItemsProcessed(st.iterations() * (long long)x.size());
}

template <std::vector<std::uint8_t> (*F)(int)>
void BM_astar(benchmark::State& st) {
    const int L = int(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(F(L));
    st.SetItemsProcessed(st.iterations() * (1LL << L));
}

template <void (*F)(std::vector<StateId>&, int, int)>
void BM_ring(benchmark::State& st) {
    const int L = int(st.range(0));
    std::vector<StateId> states(std::size_t(1) << L);
    for (StateId s = 0; s < states.size(); ++s) states[s] = s;
    int x = 1;
    for (auto _ : st) {
        F(states, x, x & 1);
        x = x % L + 1;
    }
    st.SetItemsProcessed(st.iterations() * (long long)states.size());
}

void BM_hitting(benchmark::State& st) {
    ModelParams mp(6, 0.2);
    const bool par = st.range(0) != 0;
    for (auto _ : st)
        benchmark::DoNotOptimize(
            hitting_trials(Configuration::ones_then_zero(6), HitTarget{6, 1}, mp, 11, 2000, 1e6, par));
}

}  // namespace

BENCHMARK(BM_matvec<kernels::serial::sym_matvec>)->Arg(14)->Arg(18)->Name("sym_matvec/serial");
BENCHMARK(BM_matvec<kernels::parallel::sym_matvec>)->Arg(14)->Arg(18)->Name("sym_matvec/parallel");
BENCHMARK(BM_matvec<kernels::serial::generator_apply>)->Arg(14)->Arg(18)->Name("generator_apply/serial");
BENCHMARK(BM_matvec<kernels::parallel::generator_apply>)->Arg(14)->Arg(18)->Name("generator_apply/parallel");
BENCHMARK(BM_astar<kernels::serial::astar_scan>)->Arg(12)->Arg(16)->Name("astar_scan/serial");
BENCHMARK(BM_astar<kernels::parallel::astar_scan>)->Arg(12)->Arg(16)->Name("astar_scan/parallel");
BENCHMARK(BM_ring<kernels::serial::ring_update>)->Arg(10)->Arg(12)->Name("ring_update/serial");
BENCHMARK(BM_ring<kernels::parallel::ring_update>)->Arg(10)->Arg(12)->Name("ring_update/parallel");
BENCHMARK(BM_hitting)->Arg(0)->Arg(1)->Name("hitting_trials/serial_vs_parallel")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
