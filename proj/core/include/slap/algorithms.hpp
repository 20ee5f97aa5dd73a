#pragma once

#include <cstdint>

#include "slap/dist_matrix.hpp"
#include "slap/dist_matrix3d.hpp"
#include "slap/dist_vector.hpp"
#include "slap/spgemm.hpp"
#include "slap/spmspv.hpp"

namespace slap {

struct RmatParams {
    int scale = 10;       // n = 2^scale vertices
    int edge_factor = 16; // directed edge draws per vertex
    double a = 0.57;      // Graph500 quadrant probabilities
    double b = 0.19;
    double c = 0.19;
    double d = 0.05;
    std::uint64_t seed = 1;
};

/// Recursive-quadrant random graph, symmetrized, self-loops dropped,
/// duplicate edges collapsed, values 1. Edge draws are keyed by (seed, edge
/// index) so the generated matrix does not depend on the grid shape.
DistSparseMat2D<double> gen_rmat(const RmatParams& params, const Grid2D& grid);

/// Unweighted hop distance from root (-1 where unreachable). Frontier
/// expansion is a sparse matrix-sparse vector product over a boolean
/// algebra; visited vertices are filtered out of each new frontier.
DistDenseVec<std::int64_t> bfs(const DistSparseMat2D<double>& a, GlobalIdx root, SpMSpVAlg alg = SpMSpVAlg::spa,
                               int threads = 1);

struct CcResult {
    DistDenseVec<std::int64_t> labels; // component id per vertex (min vertex id in component)
    std::int64_t components = 0;
    int iterations = 0;
};

/// Connected components by iterated min-hooking and shortcutting: each
/// round extracts grandparents, proposes the minimum neighboring
/// grandparent through a (min, select-second) matrix-vector product, hooks
/// parents through a min-combining scatter, then shortcuts until the parent
/// vector is a fixed point. Expects a symmetric pattern.
CcResult fastsv_cc(const DistSparseMat2D<double>& a, int threads = 1);

/// Power iteration on the column-stochastic walk matrix built from the
/// transpose (dangling columns redistribute uniformly):
///   x <- damping * M x + ((1-damping) + damping * dangling_mass) / n.
/// Stops when the L1 step change drops below tol. The result always sums
/// to 1.
DistDenseVec<double> pagerank(const DistSparseMat2D<double>& a, double damping, double tol, int max_iters,
                              int threads = 1);

struct MclOptions {
    double inflation = 2.0;
    double prune_threshold = 1e-4;
    int layers = 1; // >1 runs the expansion on a 3D grid
    ConvertVariant variant = ConvertVariant::regular;
    SpGemmAlg alg = SpGemmAlg::hybrid;
    int threads = 1;
};

/// One Markov-clustering step: expansion (A*A), inflation (entrywise power),
/// pruning below the threshold, and column renormalization. Input and
/// output are column-stochastic (checked to 1e-9).
DistSparseMat2D<double> mcl_step(const DistSparseMat2D<double>& a, const MclOptions& opt);

} // namespace slap
