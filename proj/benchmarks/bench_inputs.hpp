#pragma once

#include "slap/algorithms.hpp"
#include "slap/comm.hpp"
#include "slap/local_matrix.hpp"

namespace bench {

/// R-MAT pattern matrix gathered into one local CSC block (2^scale square,
/// values 1.0).
inline slap::CscMatrix<std::int32_t, double> rmat_local(int scale, int edge_factor, std::uint64_t seed) {
    slap::Triples<std::int32_t, double> t;
    slap::run_world(1, [&](slap::Comm& c) {
        auto g = slap::make_square_grid2d(c);
        slap::RmatParams p;
        p.scale = scale;
        p.edge_factor = edge_factor;
        p.seed = seed;
        auto a = slap::gen_rmat(p, g);
        auto gt = slap::gather_matrix(a);
        t.nrows = static_cast<std::int32_t>(gt.nrows);
        t.ncols = static_cast<std::int32_t>(gt.ncols);
        for (std::size_t k = 0; k < gt.size(); ++k)
            t.push_back(static_cast<std::int32_t>(gt.rows[k]), static_cast<std::int32_t>(gt.cols[k]), gt.vals[k]);
    });
    return slap::build_csc(t, [](const double& a, const double&) { return a; });
}

/// Uniformly random sparse vector with the given fill fraction.
inline slap::LocalSparseVec<std::int32_t, double> random_sparse_vec(std::int32_t n, double density,
                                                                    std::uint64_t seed) {
    slap::LocalSparseVec<std::int32_t, double> x;
    x.n = n;
    slap::Rng rng(seed);
    for (std::int32_t i = 0; i < n; ++i) {
        if (rng.next_double() < density) {
            x.idx.push_back(i);
            x.vals.push_back(rng.next_double());
        }
    }
    return x;
}

} // namespace bench
