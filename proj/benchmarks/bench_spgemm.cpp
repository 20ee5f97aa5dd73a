#include <benchmark/benchmark.h>

#include "bench_inputs.hpp"
#include "slap/spgemm.hpp"

using namespace slap;

namespace {

void BM_SpGemmHeap(benchmark::State& state) {
    auto a = bench::rmat_local(static_cast<int>(state.range(0)), 8, 1);
    for (auto _ : state) {
        auto c = local_spgemm(a, a, PlusTimesF64{}, SpGemmAlg::heap);
        benchmark::DoNotOptimize(c);
    }
    state.SetItemsProcessed(state.iterations() * estimate_flops(a, a).total_flops);
}
BENCHMARK(BM_SpGemmHeap)->Arg(9)->Arg(11);

void BM_SpGemmHash(benchmark::State& state) {
    auto a = bench::rmat_local(static_cast<int>(state.range(0)), 8, 1);
    for (auto _ : state) {
        auto c = local_spgemm(a, a, PlusTimesF64{}, SpGemmAlg::hash);
        benchmark::DoNotOptimize(c);
    }
    state.SetItemsProcessed(state.iterations() * estimate_flops(a, a).total_flops);
}
BENCHMARK(BM_SpGemmHash)->Arg(9)->Arg(11);

void BM_SpGemmHybrid(benchmark::State& state) {
    auto a = bench::rmat_local(static_cast<int>(state.range(0)), 8, 1);
    for (auto _ : state) {
        auto c = local_spgemm(a, a, PlusTimesF64{}, SpGemmAlg::hybrid);
        benchmark::DoNotOptimize(c);
    }
    state.SetItemsProcessed(state.iterations() * estimate_flops(a, a).total_flops);
}
BENCHMARK(BM_SpGemmHybrid)->Arg(9)->Arg(11);

void BM_SpGemmSymbolic(benchmark::State& state) {
    auto a = bench::rmat_local(static_cast<int>(state.range(0)), 8, 1);
    for (auto _ : state) {
        auto counts = symbolic_nnz(a, a);
        benchmark::DoNotOptimize(counts);
    }
}
BENCHMARK(BM_SpGemmSymbolic)->Arg(11);

} // namespace
