#include <benchmark/benchmark.h>

#include "bench_inputs.hpp"
#include "slap/spgemm3d.hpp"
#include "slap/summa.hpp"

using namespace slap;

namespace {

Triples<GlobalIdx, double> rmat_global(int scale, int edge_factor, std::uint64_t seed) {
    Triples<GlobalIdx, double> out;
    run_world(1, [&](Comm& c) {
        auto g = make_square_grid2d(c);
        RmatParams p;
        p.scale = scale;
        p.edge_factor = edge_factor;
        p.seed = seed;
        out = gather_matrix(gen_rmat(p, g));
    });
    return out;
}

/// Whole-pipeline cost of a simulated 2D SUMMA square, p ranks as threads.
void BM_Summa2D(benchmark::State& state) {
    const int p = static_cast<int>(state.range(0));
    auto t = rmat_global(9, 8, 7);
    for (auto _ : state) {
        run_world(p, [&](Comm& c) {
            auto g = make_square_grid2d(c);
            Triples<GlobalIdx, double> mine;
            mine.nrows = t.nrows;
            mine.ncols = t.ncols;
            if (c.rank() == 0) mine = t;
            auto first = [](const double& a, const double&) { return a; };
            auto a = distribute_triples(mine, g, t.nrows, t.ncols, first);
            auto prod = summa2d_spgemm(a, a, PlusTimesF64{}, SpGemmAlg::hash);
            benchmark::DoNotOptimize(prod.local_nnz());
        });
    }
}
BENCHMARK(BM_Summa2D)->Arg(1)->Arg(4)->Arg(9)->Unit(benchmark::kMillisecond);

/// 3D variant with the inter-layer exchange, including 2D->3D conversion.
void BM_Ca3D(benchmark::State& state) {
    const int layers = static_cast<int>(state.range(0));
    const int p = 4 * layers; // layer grids stay 2x2
    auto t = rmat_global(9, 8, 7);
    for (auto _ : state) {
        run_world(p, [&](Comm& c) {
            auto g = make_grid2d(c, 2, p / 2);
            Triples<GlobalIdx, double> mine;
            mine.nrows = t.nrows;
            mine.ncols = t.ncols;
            if (c.rank() == 0) mine = t;
            auto first = [](const double& a, const double&) { return a; };
            auto a = distribute_triples(mine, g, t.nrows, t.ncols, first);
            auto g3 = make_grid3d(c, layers);
            auto c3 = ca3d_spgemm(redistribute_3d(a, g3, SplitDim::cols),
                                  redistribute_3d(a, g3, SplitDim::rows), PlusTimesF64{}, SpGemmAlg::hash);
            benchmark::DoNotOptimize(c3.local.nnz());
        });
    }
}
BENCHMARK(BM_Ca3D)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

} // namespace
