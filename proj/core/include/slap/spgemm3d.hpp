#pragma once

#include <cmath>
#include <cstdint>
#include <iostream>
#include <vector>

#include "slap/dist_matrix3d.hpp"
#include "slap/summa.hpp"

namespace slap {

/// C = A * B on a c x q x q grid with A split along columns and B along
/// rows (matching inner pieces per layer). Each layer runs a 2D SUMMA over
/// its q x q grid to form the layer's contribution C_int; every rank then
/// splits its C_int columns into c pieces and exchanges them across its
/// size-c fiber group (one alltoallv per fiber), merging received pieces
/// with the semiring add. The result is column-split like A. Layer counts
/// above cbrt(p) trade broadcast savings for exchange volume; that is
/// reported as a warning, never an error.
template <class VT1, class VT2, SemiringConcept SR>
    requires std::same_as<VT1, typename SR::left_type> && std::same_as<VT2, typename SR::right_type>
DistSparseMat3D<typename SR::result_type>
ca3d_spgemm(const DistSparseMat3D<VT1>& a3, const DistSparseMat3D<VT2>& b3, const SR& sr,
            SpGemmAlg alg = SpGemmAlg::hybrid, int threads = 1, DistKernelStats* stats = nullptr) {
    using R = typename SR::result_type;
    if (a3.split != SplitDim::cols) throw ShapeError("3D SpGEMM expects A split along columns");
    if (b3.split != SplitDim::rows) throw ShapeError("3D SpGEMM expects B split along rows");
    if (a3.grid.nlayers != b3.grid.nlayers || a3.grid.q != b3.grid.q || a3.grid.variant != b3.grid.variant)
        throw ShapeError("3D SpGEMM operands live on different grids");
    if (a3.ncols != b3.nrows)
        throw DimError("3D SpGEMM inner dims: A has " + std::to_string(static_cast<long long>(a3.ncols)) +
                       " columns, B has " + std::to_string(static_cast<long long>(b3.nrows)) + " rows");

    const int c = a3.grid.nlayers;
    const int q = a3.grid.q;
    const int p = a3.grid.size();
    bool warn = static_cast<double>(c) > std::cbrt(static_cast<double>(p)) + 1e-9;
    if (warn && a3.grid.comm.rank() == 0)
        std::cerr << "ca3d_spgemm: layer count " << c << " exceeds cbrt(p) = cbrt(" << p
                  << "); inter-layer exchange may dominate\n";

    // per-layer 2D SUMMA over the layer grid
    Comm lrow = a3.grid.layer.row_comm;
    Comm lcol = a3.grid.layer.col_comm;
    Triples<LocalIdx, R> acc; // C_int: rows of A's block, columns of B's block
    acc.nrows = detail::narrow_dim(a3.row_len, "row");
    acc.ncols = detail::narrow_dim(b3.col_len, "col");
    std::int64_t flops = 0;
    for (int s = 0; s < q; ++s) {
        auto ablk = detail::broadcast_block<VT1>(lrow, s, &a3.local, a3.row_start, a3.row_len, a3.col_start,
                                                 a3.col_len);
        auto bblk = detail::broadcast_block<VT2>(lcol, s, &b3.local, b3.row_start, b3.row_len, b3.col_start,
                                                 b3.col_len);
        if (ablk.col_start != bblk.row_start || ablk.col_len != bblk.row_len)
            throw DimError("3D SpGEMM stage blocks misaligned on the inner dimension");
        flops += estimate_flops(ablk.mat, bblk.mat).total_flops;
        auto cpart = local_spgemm(ablk.mat, bblk.mat, sr, alg, threads);
        cpart.for_each_col([&](ColView<LocalIdx, R> cv) {
            for (std::size_t k = 0; k < cv.nnz(); ++k) acc.push_back(cv.rows[k], cv.col, cv.vals[k]);
        });
    }

    // split C_int along columns into c pieces and exchange across the fiber
    auto piece_off = block_offsets(b3.col_len, c);
    struct Ent {
        LocalIdx row;
        LocalIdx col; // local to the destination piece
        R val;
    };
    std::vector<std::vector<Ent>> out(static_cast<std::size_t>(c));
    for (std::size_t k = 0; k < acc.size(); ++k) {
        const int dest = block_of(piece_off, acc.cols[k]);
        out[static_cast<std::size_t>(dest)].push_back(
            Ent{acc.rows[k], static_cast<LocalIdx>(acc.cols[k] - piece_off[static_cast<std::size_t>(dest)]),
                acc.vals[k]});
    }
    Comm fiber = a3.grid.fiber_comm;
    auto recv = fiber.alltoallv(out, PayloadTag::sparse_matrix);

    DistSparseMat3D<R> c3;
    c3.grid = a3.grid;
    c3.split = SplitDim::cols;
    c3.nrows = a3.nrows;
    c3.ncols = b3.ncols;
    c3.row_start = a3.row_start;
    c3.row_len = a3.row_len;
    const int l = a3.grid.mylayer;
    c3.col_start = b3.col_start + piece_off[static_cast<std::size_t>(l)];
    c3.col_len = piece_off[static_cast<std::size_t>(l) + 1] - piece_off[static_cast<std::size_t>(l)];

    Triples<LocalIdx, R> merged;
    merged.nrows = detail::narrow_dim(c3.row_len, "row");
    merged.ncols = detail::narrow_dim(c3.col_len, "col");
    for (auto& part : recv)
        for (auto& e : part) merged.push_back(e.row, e.col, e.val);
    c3.local = build_dcsc(merged, [&](const R& x, const R& y) { return sr.add(x, y); });

    if (stats) {
        stats->stages = q;
        stats->flops = flops;
        stats->nnz_out = static_cast<std::int64_t>(c3.local.nnz());
        stats->layer_warning = warn;
    }
    return c3;
}

} // namespace slap
