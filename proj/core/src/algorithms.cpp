#include "slap/algorithms.hpp"

#include <cmath>

#include "slap/dist_spmv.hpp"
#include "slap/rng.hpp"
#include "slap/spgemm3d.hpp"
#include "slap/summa.hpp"

namespace slap {

namespace {

/// Structural reachability algebra for double-valued adjacency: a stored
/// entry passes the frontier flag through, add is logical or.
struct ReachSemiring {
    using left_type = double;
    using right_type = std::uint8_t;
    using result_type = std::uint8_t;
    std::uint8_t multiply(double, std::uint8_t x) const { return x; }
    std::uint8_t add(std::uint8_t a, std::uint8_t b) const { return (a || b) ? 1 : 0; }
    std::uint8_t zero() const { return 0; }
    std::string_view name() const { return "or_and(structural)"; }
};

void require_square(const DistSparseMat2D<double>& a, const char* who) {
    if (a.nrows != a.ncols)
        throw ShapeError(std::string(who) + " needs a square matrix, got " +
                         std::to_string(static_cast<long long>(a.nrows)) + "x" +
                         std::to_string(static_cast<long long>(a.ncols)));
}

double dist_dot(const DistDenseVec<double>& a, const DistDenseVec<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.local.size(); ++i) s += a.local[i] * b.local[i];
    Comm c = a.grid.comm;
    return c.allreduce<double>(s, [](double x, double y) { return x + y; }, 0.0);
}

/// Column sums of this rank's block, reduced over the process column so
/// every rank sees the sums for its full column block.
std::vector<double> block_column_sums(const DistSparseMat2D<double>& a) {
    std::vector<double> sums(static_cast<std::size_t>(a.local_cols()), 0.0);
    a.local.for_each_col([&](ColView<LocalIdx, double> cv) {
        double s = 0;
        for (std::size_t k = 0; k < cv.nnz(); ++k) s += cv.vals[k];
        sums[static_cast<std::size_t>(cv.col)] = s;
    });
    Comm col = a.grid.col_comm;
    return col.allreduce_vec(sums, [](double x, double y) { return x + y; });
}

/// Divides every entry of column j by scale[j] (block-local j), keeping
/// zero-scale columns untouched.
DistSparseMat2D<double> scale_columns(const DistSparseMat2D<double>& a, const std::vector<double>& scale) {
    Triples<LocalIdx, double> t;
    t.nrows = a.local.nrows();
    t.ncols = a.local.ncols();
    a.local.for_each_col([&](ColView<LocalIdx, double> cv) {
        const double s = scale[static_cast<std::size_t>(cv.col)];
        for (std::size_t k = 0; k < cv.nnz(); ++k)
            t.push_back(cv.rows[k], cv.col, s != 0.0 ? cv.vals[k] / s : cv.vals[k]);
    });
    DistSparseMat2D<double> out = a;
    out.local = build_dcsc(t, [](const double& x, const double&) { return x; });
    return out;
}

} // namespace

DistSparseMat2D<double> gen_rmat(const RmatParams& params, const Grid2D& grid) {
    if (params.scale < 1) throw ShapeError("rmat scale must be >= 1");
    const double psum = params.a + params.b + params.c + params.d;
    if (std::abs(psum - 1.0) > 1e-12)
        throw ShapeError("rmat quadrant probabilities sum to " + std::to_string(psum) + ", need 1");

    const GlobalIdx n = GlobalIdx{1} << params.scale;
    const GlobalIdx edges = static_cast<GlobalIdx>(params.edge_factor) * n;
    const int p = grid.comm.size();
    const int me = grid.comm.rank();
    const GlobalIdx lo = edges * me / p;
    const GlobalIdx hi = edges * (me + 1) / p;

    Triples<GlobalIdx, double> mine;
    mine.nrows = n;
    mine.ncols = n;
    const double ab = params.a + params.b;
    const double abc = ab + params.c;
    for (GlobalIdx e = lo; e < hi; ++e) {
        Rng rng(params.seed, static_cast<std::uint64_t>(e) + 0x524d4154ULL);
        GlobalIdx i = 0, j = 0;
        for (int level = 0; level < params.scale; ++level) {
            const double u = rng.next_double();
            int qi = 0, qj = 0;
            if (u < params.a) {
            } else if (u < ab) {
                qj = 1;
            } else if (u < abc) {
                qi = 1;
            } else {
                qi = 1;
                qj = 1;
            }
            i = (i << 1) | qi;
            j = (j << 1) | qj;
        }
        if (i == j) continue; // no self-loops
        mine.push_back(i, j, 1.0);
        mine.push_back(j, i, 1.0);
    }
    auto keep_one = [](const double& x, const double&) { return x; };
    return distribute_triples(mine, grid, n, n, keep_one);
}

DistDenseVec<std::int64_t> bfs(const DistSparseMat2D<double>& a, GlobalIdx root, SpMSpVAlg alg, int threads) {
    require_square(a, "bfs");
    if (root < 0 || root >= a.nrows)
        throw IndexError("bfs root " + std::to_string(static_cast<long long>(root)) + " outside 0.." +
                         std::to_string(static_cast<long long>(a.nrows - 1)));
    // frontier expansion follows edges (u, v): next = A^T x
    auto at = dist_transpose(a);

    auto levels = make_const_vec<std::int64_t>(a.grid, a.nrows, -1);
    DistSparseVec<std::uint8_t> frontier;
    frontier.grid = a.grid;
    frontier.n = a.nrows;
    frontier.local.n = static_cast<LocalIdx>(levels.my_len());
    {
        auto o = levels.layout().owner(root);
        if (o.row == a.grid.myrow && o.col == a.grid.mycol) {
            frontier.local.idx.push_back(static_cast<LocalIdx>(o.offset));
            frontier.local.vals.push_back(1);
            levels.local[static_cast<std::size_t>(o.offset)] = 0;
        }
    }

    std::int64_t depth = 0;
    while (dist_nnz(frontier) > 0) {
        ++depth;
        auto next = dist_spmspv(at, frontier, ReachSemiring{}, alg, threads);
        // mask out visited vertices and record levels for the rest
        DistSparseVec<std::uint8_t> fresh;
        fresh.grid = next.grid;
        fresh.n = next.n;
        fresh.local.n = next.local.n;
        for (std::size_t k = 0; k < next.local.nnz(); ++k) {
            const auto off = static_cast<std::size_t>(next.local.idx[k]);
            if (levels.local[off] == -1) {
                levels.local[off] = depth;
                fresh.local.idx.push_back(next.local.idx[k]);
                fresh.local.vals.push_back(1);
            }
        }
        frontier = std::move(fresh);
    }
    return levels;
}

CcResult fastsv_cc(const DistSparseMat2D<double>& a, int threads) {
    require_square(a, "connected components");
    const GlobalIdx n = a.nrows;
    MinSelect2nd<double, std::int64_t> hook_sr;
    auto minf = [](std::int64_t x, std::int64_t y) { return x < y ? x : y; };

    auto f = make_iota_vec(a.grid, n);
    Comm world = a.grid.comm;
    int iterations = 0;
    for (;;) {
        ++iterations;
        auto f_before = f;

        // grandparents
        auto g = vec_extract(f, f);
        // minimum neighboring grandparent per vertex
        auto cand = dist_spmv(a, g, hook_sr, threads);
        // hook the parent of v toward the candidate, and v itself
        vec_assign(f, f_before, cand, minf);
        for (std::size_t k = 0; k < f.local.size(); ++k) f.local[k] = minf(f.local[k], cand.local[k]);
        // shortcut until f = f(f)
        for (;;) {
            auto fg = vec_extract(f, f);
            bool changed = false;
            for (std::size_t k = 0; k < f.local.size(); ++k) {
                if (fg.local[k] < f.local[k]) {
                    f.local[k] = fg.local[k];
                    changed = true;
                }
            }
            if (!world.allreduce<std::uint8_t>(changed ? 1 : 0,
                                               [](std::uint8_t x, std::uint8_t y) { return x || y ? 1 : 0; }, 0))
                break;
        }

        bool moved = false;
        for (std::size_t k = 0; k < f.local.size(); ++k)
            if (f.local[k] != f_before.local[k]) moved = true;
        if (!world.allreduce<std::uint8_t>(moved ? 1 : 0,
                                           [](std::uint8_t x, std::uint8_t y) { return x || y ? 1 : 0; }, 0))
            break;
    }

    CcResult res;
    std::int64_t roots = 0;
    const auto start = f.my_start();
    for (std::size_t k = 0; k < f.local.size(); ++k)
        if (f.local[k] == start + static_cast<GlobalIdx>(k)) ++roots;
    res.components = world.allreduce<std::int64_t>(roots, [](std::int64_t x, std::int64_t y) { return x + y; }, 0);
    res.labels = std::move(f);
    res.iterations = iterations;
    return res;
}

DistDenseVec<double> pagerank(const DistSparseMat2D<double>& a, double damping, double tol, int max_iters,
                              int threads) {
    require_square(a, "pagerank");
    if (!(damping > 0.0 && damping < 1.0))
        throw ShapeError("damping must lie strictly between 0 and 1");
    const GlobalIdx n = a.nrows;
    Comm world = a.grid.comm;

    // column-stochastic walk matrix from the transpose
    auto at = dist_transpose(a);
    auto colsums = block_column_sums(at);
    auto m = scale_columns(at, colsums);

    // dangling indicator in the vector layout: row 0 of each process column
    // reports its block's zero columns
    auto dang = make_const_vec<double>(a.grid, n, 0.0);
    {
        struct Ent {
            GlobalIdx off;
            double v;
        };
        auto lay = dang.layout();
        std::vector<std::vector<Ent>> out(static_cast<std::size_t>(a.grid.size()));
        if (a.grid.myrow == 0) {
            const auto cs = at.col_start();
            for (std::size_t j = 0; j < colsums.size(); ++j) {
                if (colsums[j] == 0.0) {
                    auto o = lay.owner(cs + static_cast<GlobalIdx>(j));
                    out[static_cast<std::size_t>(a.grid.rank_of(o.row, o.col))].push_back(Ent{o.offset, 1.0});
                }
            }
        }
        auto recv = world.alltoallv(out, PayloadTag::vector_data);
        for (auto& part : recv)
            for (auto& e : part) dang.local[static_cast<std::size_t>(e.off)] = e.v;
    }

    PlusTimes<double> sr;
    auto x = make_const_vec<double>(a.grid, n, 1.0 / static_cast<double>(n));
    for (int it = 0; it < max_iters; ++it) {
        const double dangling_mass = dist_dot(x, dang);
        auto y = dist_spmv(m, x, sr, threads);
        const double base = (1.0 - damping) / static_cast<double>(n) +
                            damping * dangling_mass / static_cast<double>(n);
        for (auto& v : y.local) v = damping * v + base;
        double delta = 0;
        for (std::size_t k = 0; k < y.local.size(); ++k) delta += std::abs(y.local[k] - x.local[k]);
        delta = world.allreduce<double>(delta, [](double p, double q) { return p + q; }, 0.0);
        x = std::move(y);
        if (delta < tol) break;
    }
    return x;
}

DistSparseMat2D<double> mcl_step(const DistSparseMat2D<double>& a, const MclOptions& opt) {
    require_square(a, "mcl step");
    if (!(opt.inflation > 0.0)) throw ShapeError("inflation exponent must be positive");
    {
        auto sums = block_column_sums(a);
        for (double s : sums)
            if (std::abs(s - 1.0) > 1e-9)
                throw StochasticityError("input column sums deviate from 1 by more than 1e-9");
    }

    PlusTimes<double> sr;
    DistSparseMat2D<double> expanded;
    if (opt.layers <= 1) {
        expanded = summa2d_spgemm(a, a, sr, opt.alg, opt.threads);
    } else {
        auto g3 = make_grid3d(a.grid.comm, opt.layers, opt.variant);
        auto a3 = redistribute_3d(a, g3, SplitDim::cols);
        auto b3 = redistribute_3d(a, g3, SplitDim::rows);
        auto c3 = ca3d_spgemm(a3, b3, sr, opt.alg, opt.threads);
        expanded = redistribute_2d(c3, a.grid);
    }

    auto inflated = dist_map_values(expanded, [&](double v) { return std::pow(v, opt.inflation); });
    auto pruned = dist_filter(inflated, [&](double v) { return !(v < opt.prune_threshold); });
    auto sums = block_column_sums(pruned);
    return scale_columns(pruned, sums);
}

} // namespace slap
