#include <benchmark/benchmark.h>

#include "bench_inputs.hpp"
#include "slap/spmspv.hpp"
#include "slap/spmv.hpp"

using namespace slap;

namespace {

void BM_SpMV(benchmark::State& state) {
    auto a = bench::rmat_local(12, 8, 2);
    LocalDenseVec<double> x;
    Rng rng(3);
    for (std::int32_t i = 0; i < a.ncols(); ++i) x.vals.push_back(rng.next_double());
    const auto part = state.range(0) == 0 ? SpMVPart::row : SpMVPart::col;
    for (auto _ : state) {
        auto y = local_spmv(a, x, PlusTimesF64{}, part);
        benchmark::DoNotOptimize(y);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(a.nnz()));
    state.SetLabel(part == SpMVPart::row ? "row" : "col");
}
BENCHMARK(BM_SpMV)->Arg(0)->Arg(1);

void BM_SpMSpV(benchmark::State& state) {
    auto a = bench::rmat_local(12, 8, 2);
    // density sweep mirrors the regimes where the variants trade places
    const double density = 1.0 / static_cast<double>(state.range(1));
    auto x = bench::random_sparse_vec(a.ncols(), density, 4);
    const auto alg = static_cast<SpMSpVAlg>(state.range(0));
    for (auto _ : state) {
        auto y = local_spmspv(a, x, PlusTimesF64{}, alg);
        benchmark::DoNotOptimize(y);
    }
    const char* names[] = {"heap", "spa", "bucket"};
    state.SetLabel(std::string(names[state.range(0)]) + "/f=1/" + std::to_string(state.range(1)));
}
BENCHMARK(BM_SpMSpV)
    ->Args({0, 1000})
    ->Args({1, 1000})
    ->Args({2, 1000})
    ->Args({0, 100})
    ->Args({1, 100})
    ->Args({2, 100})
    ->Args({0, 10})
    ->Args({1, 10})
    ->Args({2, 10});

void BM_SpMM(benchmark::State& state) {
    auto a = bench::rmat_local(11, 8, 2);
    const auto k = state.range(0);
    auto x = LocalDenseMat<double>::zeros(a.ncols(), k);
    Rng rng(5);
    for (auto& v : x.vals) v = rng.next_double();
    for (auto _ : state) {
        auto y = local_spmm(a, x, PlusTimesF64{});
        benchmark::DoNotOptimize(y);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(a.nnz()) * k);
}
BENCHMARK(BM_SpMM)->Arg(4)->Arg(16);

} // namespace

BENCHMARK_MAIN();
