#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "slap/dist_matrix.hpp"
#include "slap/grid.hpp"

namespace slap {

enum class SplitDim { rows, cols };

inline SplitDim split_dim_from_name(std::string_view s) {
    if (s == "rows") return SplitDim::rows;
    if (s == "cols") return SplitDim::cols;
    throw NameError("unknown split dimension '" + std::string(s) + "'");
}

/// Sparse matrix split into c pieces along one dimension, one piece per
/// layer, each piece 2D-distributed over its layer grid. Block extents are
/// stored explicitly per rank because the two 2D->3D conversions induce
/// different piece geometries:
///   regular    -- the split dimension is cut into c contiguous slabs,
///                layer l holding slab l (redistribution is a single
///                world-wide alltoallv).
///   supergrid  -- each supergrid cell cuts its own index range into c
///                pieces, so every entry stays inside its sqrt(c) x
///                sqrt(c) subgrid and the exchange runs as independent
///                alltoallv calls on the size-c fiber groups.
/// Either way the pieces of one layer coordinate tile the split dimension
/// across layers, and the union over layers is the full matrix.
template <class VT>
struct DistSparseMat3D {
    using value_type = VT;

    Grid3D grid;
    SplitDim split = SplitDim::cols;
    GlobalIdx nrows = 0;
    GlobalIdx ncols = 0;
    GlobalIdx row_start = 0;
    GlobalIdx row_len = 0;
    GlobalIdx col_start = 0;
    GlobalIdx col_len = 0;
    DcscMatrix<LocalIdx, VT> local; // block-local indices
};

namespace detail {

struct BlockRange {
    GlobalIdx row_start = 0, row_len = 0, col_start = 0, col_len = 0;
};

/// Global extents of 3D block (l, i, j) for the regular conversion.
inline BlockRange regular_3d_range(GlobalIdx m, GlobalIdx n, int c, int q, SplitDim split, int l, int i, int j) {
    BlockRange r;
    if (split == SplitDim::cols) {
        auto ro = block_offsets(m, q);
        auto slabs = block_offsets(n, c);
        const GlobalIdx ss = slabs[static_cast<std::size_t>(l)];
        const GlobalIdx sl = slabs[static_cast<std::size_t>(l) + 1] - ss;
        auto co = block_offsets(sl, q);
        r.row_start = ro[static_cast<std::size_t>(i)];
        r.row_len = ro[static_cast<std::size_t>(i) + 1] - r.row_start;
        r.col_start = ss + co[static_cast<std::size_t>(j)];
        r.col_len = co[static_cast<std::size_t>(j) + 1] - co[static_cast<std::size_t>(j)];
    } else {
        auto co = block_offsets(n, q);
        auto slabs = block_offsets(m, c);
        const GlobalIdx ss = slabs[static_cast<std::size_t>(l)];
        const GlobalIdx sl = slabs[static_cast<std::size_t>(l) + 1] - ss;
        auto ro = block_offsets(sl, q);
        r.col_start = co[static_cast<std::size_t>(j)];
        r.col_len = co[static_cast<std::size_t>(j) + 1] - r.col_start;
        r.row_start = ss + ro[static_cast<std::size_t>(i)];
        r.row_len = ro[static_cast<std::size_t>(i) + 1] - ro[static_cast<std::size_t>(i)];
    }
    return r;
}

/// Union range of 2D blocks [lo*sc, (lo+1)*sc) from `off2`.
inline std::pair<GlobalIdx, GlobalIdx> supercell_range(const std::vector<GlobalIdx>& off2, int cell, int sc) {
    const GlobalIdx s = off2[static_cast<std::size_t>(cell * sc)];
    const GlobalIdx e = off2[static_cast<std::size_t>((cell + 1) * sc)];
    return {s, e - s};
}

/// Global extents of 3D block (l, i, j) for the supergrid conversion,
/// derived from the source 2D grid's offsets.
inline BlockRange supergrid_3d_range(const std::vector<GlobalIdx>& row_off2, const std::vector<GlobalIdx>& col_off2,
                                     int c, int sc, SplitDim split, int l, int i, int j) {
    BlockRange r;
    auto [rs, rl] = supercell_range(row_off2, i, sc);
    auto [cs, cl] = supercell_range(col_off2, j, sc);
    if (split == SplitDim::cols) {
        r.row_start = rs;
        r.row_len = rl;
        auto pieces = block_offsets(cl, c);
        r.col_start = cs + pieces[static_cast<std::size_t>(l)];
        r.col_len = pieces[static_cast<std::size_t>(l) + 1] - pieces[static_cast<std::size_t>(l)];
    } else {
        r.col_start = cs;
        r.col_len = cl;
        auto pieces = block_offsets(rl, c);
        r.row_start = rs + pieces[static_cast<std::size_t>(l)];
        r.row_len = pieces[static_cast<std::size_t>(l) + 1] - pieces[static_cast<std::size_t>(l)];
    }
    return r;
}

} // namespace detail

/// Moves a 2D matrix onto a 3D grid. With a regular grid the exchange is
/// one alltoallv over all p ranks; with a supergrid every entry's targets
/// lie in the source rank's own fiber group, so the exchange is an
/// alltoallv over c ranks only (counter-checkable).
template <class VT>
DistSparseMat3D<VT> redistribute_3d(const DistSparseMat2D<VT>& a2, const Grid3D& g3, SplitDim split) {
    if (g3.comm.size() != a2.grid.comm.size())
        throw ShapeError("3D grid has " + std::to_string(g3.comm.size()) + " ranks, matrix lives on " +
                         std::to_string(a2.grid.comm.size()));
    const int c = g3.nlayers;
    const int q = g3.q;

    DistSparseMat3D<VT> a3;
    a3.grid = g3;
    a3.split = split;
    a3.nrows = a2.nrows;
    a3.ncols = a2.ncols;

    struct Ent {
        GlobalIdx row;
        GlobalIdx col;
        VT val;
    };

    if (g3.variant == ConvertVariant::regular) {
        auto my = detail::regular_3d_range(a2.nrows, a2.ncols, c, q, split, g3.mylayer, g3.myrow(), g3.mycol());
        a3.row_start = my.row_start;
        a3.row_len = my.row_len;
        a3.col_start = my.col_start;
        a3.col_len = my.col_len;

        const auto slabs = block_offsets(split == SplitDim::cols ? a2.ncols : a2.nrows, c);
        const auto other_blocks = block_offsets(split == SplitDim::cols ? a2.nrows : a2.ncols, q);
        // per-slab sub-offsets of the split dimension, hoisted out of the loop
        std::vector<std::vector<GlobalIdx>> sub_blocks(static_cast<std::size_t>(c));
        for (int l = 0; l < c; ++l)
            sub_blocks[static_cast<std::size_t>(l)] =
                block_offsets(slabs[static_cast<std::size_t>(l) + 1] - slabs[static_cast<std::size_t>(l)], q);
        std::vector<std::vector<Ent>> out(static_cast<std::size_t>(g3.comm.size()));
        const auto rs = a2.row_start();
        const auto cs = a2.col_start();
        a2.local.for_each_col([&](ColView<LocalIdx, VT> cv) {
            for (std::size_t k = 0; k < cv.nnz(); ++k) {
                const GlobalIdx r = rs + cv.rows[k];
                const GlobalIdx col = cs + cv.col;
                const GlobalIdx split_coord = split == SplitDim::cols ? col : r;
                const GlobalIdx other_coord = split == SplitDim::cols ? r : col;
                const int l = block_of(slabs, split_coord);
                const int in_slab = block_of(sub_blocks[static_cast<std::size_t>(l)],
                                             split_coord - slabs[static_cast<std::size_t>(l)]);
                const int other = block_of(other_blocks, other_coord);
                const int i = split == SplitDim::cols ? other : in_slab;
                const int j = split == SplitDim::cols ? in_slab : other;
                out[static_cast<std::size_t>(g3.rank_of(l, i, j))].push_back({r, col, cv.vals[k]});
            }
        });
        Comm comm = g3.comm;
        auto recv = comm.alltoallv(out, PayloadTag::sparse_matrix);
        std::vector<detail::RoutedTriple<VT>> ents;
        for (auto& part : recv)
            for (auto& e : part) ents.push_back({e.row, e.col, e.val});
        auto first = [](const VT& x, const VT&) { return x; };
        a3.local = detail::build_local_block<VT>(a3.row_len, a3.col_len, ents, a3.row_start, a3.col_start, first);
        return a3;
    }

    // supergrid: piece geometry comes from the source grid's offsets
    const int sc = static_cast<int>(isqrt_exact(c));
    if (a2.grid.pr != q * sc || a2.grid.pc != q * sc)
        throw ShapeError("supergrid redistribution needs the source grid to match the 3D grid");
    auto my = detail::supergrid_3d_range(a2.row_offsets, a2.col_offsets, c, sc, split, g3.mylayer, g3.myrow(), g3.mycol());
    a3.row_start = my.row_start;
    a3.row_len = my.row_len;
    a3.col_start = my.col_start;
    a3.col_len = my.col_len;

    // every target of my entries shares my supergrid cell: route by layer
    // within the fiber group
    const int my_super_i = g3.myrow();
    const int my_super_j = g3.mycol();
    std::vector<std::vector<Ent>> out(static_cast<std::size_t>(c));
    const auto rs = a2.row_start();
    const auto cs = a2.col_start();
    std::vector<GlobalIdx> piece_off;
    {
        auto [ps, pl] = split == SplitDim::cols ? detail::supercell_range(a2.col_offsets, my_super_j, sc)
                                                : detail::supercell_range(a2.row_offsets, my_super_i, sc);
        piece_off = block_offsets(pl, c);
        for (auto& o : piece_off) o += ps;
    }
    a2.local.for_each_col([&](ColView<LocalIdx, VT> cv) {
        for (std::size_t k = 0; k < cv.nnz(); ++k) {
            const GlobalIdx r = rs + cv.rows[k];
            const GlobalIdx col = cs + cv.col;
            const int l = block_of(piece_off, split == SplitDim::cols ? col : r);
            out[static_cast<std::size_t>(l)].push_back({r, col, cv.vals[k]});
        }
    });
    Comm fiber = g3.fiber_comm;
    auto recv = fiber.alltoallv(out, PayloadTag::sparse_matrix);
    std::vector<detail::RoutedTriple<VT>> ents;
    for (auto& part : recv)
        for (auto& e : part) ents.push_back({e.row, e.col, e.val});
    auto first = [](const VT& x, const VT&) { return x; };
    a3.local = detail::build_local_block<VT>(a3.row_len, a3.col_len, ents, a3.row_start, a3.col_start, first);
    return a3;
}

/// Gathers the global triple set of a 3D matrix on every rank.
template <class VT>
Triples<GlobalIdx, VT> gather_matrix(const DistSparseMat3D<VT>& a) {
    struct Ent {
        GlobalIdx row;
        GlobalIdx col;
        VT val;
    };
    std::vector<Ent> mine;
    a.local.for_each_col([&](ColView<LocalIdx, VT> c) {
        for (std::size_t k = 0; k < c.nnz(); ++k)
            mine.push_back({a.row_start + c.rows[k], a.col_start + c.col, c.vals[k]});
    });
    Comm comm = a.grid.comm;
    auto parts = comm.allgatherv(mine, PayloadTag::sparse_matrix);
    std::vector<Ent> all;
    for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
    std::sort(all.begin(), all.end(), [](const Ent& x, const Ent& y) {
        if (x.col != y.col) return x.col < y.col;
        return x.row < y.row;
    });
    Triples<GlobalIdx, VT> t;
    t.nrows = a.nrows;
    t.ncols = a.ncols;
    for (const auto& e : all) t.push_back(e.row, e.col, e.val);
    return t;
}

/// Brings a 3D matrix back to a 2D grid (one world alltoallv).
template <class VT>
DistSparseMat2D<VT> redistribute_2d(const DistSparseMat3D<VT>& a3, const Grid2D& grid) {
    Triples<GlobalIdx, VT> mine;
    mine.nrows = a3.nrows;
    mine.ncols = a3.ncols;
    a3.local.for_each_col([&](ColView<LocalIdx, VT> c) {
        for (std::size_t k = 0; k < c.nnz(); ++k)
            mine.push_back(a3.row_start + c.rows[k], a3.col_start + c.col, c.vals[k]);
    });
    auto first = [](const VT& x, const VT&) { return x; };
    return distribute_triples(mine, grid, a3.nrows, a3.ncols, first);
}

template <class VT>
std::int64_t dist_nnz(const DistSparseMat3D<VT>& a) {
    Comm c = a.grid.comm;
    return c.allreduce<std::int64_t>(static_cast<std::int64_t>(a.local.nnz()),
                                     [](std::int64_t x, std::int64_t y) { return x + y; }, 0);
}

} // namespace slap
