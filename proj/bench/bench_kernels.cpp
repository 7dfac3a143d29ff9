// Serial vs OpenMP kernels: batch h-cut reduction and multi-start QP solve.

#include <benchmark/benchmark.h>

#include "generators.hpp"
#include "tt2fr/regression.hpp"

using namespace tt2fr;

namespace {

std::vector<Tt2Number> batch(std::size_t n) {
    testing::Gen gen(7);
    std::vector<Tt2Number> v;
    v.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        v.push_back(gen.tt2());
    }
    return v;
}

void BM_reduce_all_serial(benchmark::State& state) {
    const auto v = batch(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(reduce_all_serial(v, 0.4));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_reduce_all_parallel(benchmark::State& state) {
    const auto v = batch(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(reduce_all(v, 0.4));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

QpProblem regression_problem(int q) {
    testing::Gen gen(11);
    const auto data = gen.exact_dataset(gen.coefficients(static_cast<std::size_t>(q)), 60);
    FitConfig cfg;
    return assemble_it2fr(reduce_dataset(data, cfg.h), cfg);
}

void solve_bench(benchmark::State& state, bool parallel) {
    const auto p = regression_problem(static_cast<int>(state.range(0)));
    SolverConfig cfg;
    cfg.parallel = parallel;
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve(p, cfg));
    }
}

void BM_solve_serial(benchmark::State& state) { solve_bench(state, false); }
void BM_solve_parallel(benchmark::State& state) { solve_bench(state, true); }

}  // namespace

BENCHMARK(BM_reduce_all_serial)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_reduce_all_parallel)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_solve_serial)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_solve_parallel)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
