#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <vector>

#include "slap/dist_matrix.hpp"
#include "slap/spgemm.hpp"

namespace slap {

/// Per-call record of distributed kernel structure, for stats output and
/// the counter-based structural assertions.
struct DistKernelStats {
    int stages = 0;
    std::int64_t flops = 0;    // multiply invocations across local phases
    std::int64_t nnz_out = 0;  // this rank's output nonzeros
    bool layer_warning = false;
};

namespace detail {

// Wire form of one sparse block: global extents header, then the DCSC
// arrays back to back.
struct BlockHeader {
    GlobalIdx row_start, row_len, col_start, col_len;
    std::int64_t nnz, nzc;
};

template <class VT>
std::vector<std::byte> serialize_block(const DcscMatrix<LocalIdx, VT>& m, GlobalIdx rs, GlobalIdx rl,
                                       GlobalIdx cs, GlobalIdx cl) {
    BlockHeader h{rs, rl, cs, cl, static_cast<std::int64_t>(m.nnz()), static_cast<std::int64_t>(m.nzc())};
    const std::size_t bytes = sizeof(BlockHeader) + m.jc().size() * sizeof(LocalIdx) +
                              m.cp().size() * sizeof(LocalIdx) + m.rowids().size() * sizeof(LocalIdx) +
                              m.vals().size() * sizeof(VT);
    std::vector<std::byte> buf(bytes);
    std::byte* p = buf.data();
    auto put = [&p](const void* src, std::size_t n) {
        if (n == 0) return; // empty vectors hand out null data()
        std::memcpy(p, src, n);
        p += n;
    };
    put(&h, sizeof h);
    put(m.jc().data(), m.jc().size() * sizeof(LocalIdx));
    put(m.cp().data(), m.cp().size() * sizeof(LocalIdx));
    put(m.rowids().data(), m.rowids().size() * sizeof(LocalIdx));
    put(m.vals().data(), m.vals().size() * sizeof(VT));
    return buf;
}

template <class VT>
struct WireBlock {
    GlobalIdx row_start = 0, row_len = 0, col_start = 0, col_len = 0;
    DcscMatrix<LocalIdx, VT> mat;
};

template <class VT>
WireBlock<VT> deserialize_block(const std::vector<std::byte>& buf) {
    BlockHeader h{};
    const std::byte* p = buf.data();
    auto get = [&p](void* dst, std::size_t n) {
        if (n == 0) return;
        std::memcpy(dst, p, n);
        p += n;
    };
    get(&h, sizeof h);
    std::vector<LocalIdx> jc(static_cast<std::size_t>(h.nzc));
    std::vector<LocalIdx> cp(static_cast<std::size_t>(h.nzc) + 1);
    std::vector<LocalIdx> rowids(static_cast<std::size_t>(h.nnz));
    std::vector<VT> vals(static_cast<std::size_t>(h.nnz));
    get(jc.data(), jc.size() * sizeof(LocalIdx));
    get(cp.data(), cp.size() * sizeof(LocalIdx));
    get(rowids.data(), rowids.size() * sizeof(LocalIdx));
    get(vals.data(), vals.size() * sizeof(VT));
    WireBlock<VT> wb;
    wb.row_start = h.row_start;
    wb.row_len = h.row_len;
    wb.col_start = h.col_start;
    wb.col_len = h.col_len;
    wb.mat = DcscMatrix<LocalIdx, VT>(narrow_dim(h.row_len, "row"), narrow_dim(h.col_len, "col"),
                                      std::move(jc), std::move(cp), std::move(rowids), std::move(vals));
    return wb;
}

/// Broadcast of one block within `group` from group rank `root`.
template <class VT>
WireBlock<VT> broadcast_block(Comm& group, int root, const DcscMatrix<LocalIdx, VT>* mine, GlobalIdx rs,
                              GlobalIdx rl, GlobalIdx cs, GlobalIdx cl) {
    std::vector<std::byte> payload;
    if (group.rank() == root) payload = serialize_block(*mine, rs, rl, cs, cl);
    auto buf = group.broadcast(root, payload, PayloadTag::sparse_matrix);
    return deserialize_block<VT>(buf);
}

} // namespace detail

/// C = A * B on a square process grid, operating in sqrt(p) stages: at
/// stage s the ranks in grid column s broadcast their A blocks along the
/// process rows while the ranks in grid row s broadcast their B blocks
/// along the process columns; every rank multiplies the received blocks
/// locally and the per-stage partial triples are merged once at the end
/// with the semiring add. C is block-distributed like the inputs (rows
/// from A, columns from B).
template <class VT1, class VT2, SemiringConcept SR>
    requires std::same_as<VT1, typename SR::left_type> && std::same_as<VT2, typename SR::right_type>
DistSparseMat2D<typename SR::result_type>
summa2d_spgemm(const DistSparseMat2D<VT1>& a, const DistSparseMat2D<VT2>& b, const SR& sr,
               SpGemmAlg alg = SpGemmAlg::hybrid, int threads = 1, DistKernelStats* stats = nullptr) {
    using R = typename SR::result_type;
    if (!a.grid.square()) throw ShapeError("2D SUMMA needs a square process grid, got " +
                                           std::to_string(a.grid.pr) + "x" + std::to_string(a.grid.pc));
    if (a.grid.pr != b.grid.pr || a.grid.pc != b.grid.pc)
        throw ShapeError("SUMMA operands live on different grids");
    if (a.ncols != b.nrows)
        throw DimError("SUMMA inner dims: A is " + std::to_string(static_cast<long long>(a.nrows)) + "x" +
                       std::to_string(static_cast<long long>(a.ncols)) + ", B is " +
                       std::to_string(static_cast<long long>(b.nrows)) + "x" +
                       std::to_string(static_cast<long long>(b.ncols)));
    if (a.col_offsets != b.row_offsets)
        throw DimError("SUMMA inner block offsets of A and B disagree");

    const int stages = a.grid.pr;
    Comm row = a.grid.row_comm;
    Comm col = a.grid.col_comm;

    Triples<LocalIdx, R> acc;
    acc.nrows = a.local_rows();
    acc.ncols = b.local_cols();
    std::int64_t flops = 0;
    for (int s = 0; s < stages; ++s) {
        auto ablk = detail::broadcast_block<VT1>(row, s, &a.local, a.row_start(), a.row_end() - a.row_start(),
                                                 a.col_offsets[static_cast<std::size_t>(s)],
                                                 a.col_offsets[static_cast<std::size_t>(s) + 1] -
                                                     a.col_offsets[static_cast<std::size_t>(s)]);
        auto bblk = detail::broadcast_block<VT2>(col, s, &b.local, b.row_offsets[static_cast<std::size_t>(s)],
                                                 b.row_offsets[static_cast<std::size_t>(s) + 1] -
                                                     b.row_offsets[static_cast<std::size_t>(s)],
                                                 b.col_start(), b.col_end() - b.col_start());
        if (ablk.col_start != bblk.row_start || ablk.col_len != bblk.row_len)
            throw DimError("SUMMA stage blocks misaligned on the inner dimension");
        flops += estimate_flops(ablk.mat, bblk.mat).total_flops;
        auto cpart = local_spgemm(ablk.mat, bblk.mat, sr, alg, threads);
        cpart.for_each_col([&](ColView<LocalIdx, R> cv) {
            for (std::size_t k = 0; k < cv.nnz(); ++k) acc.push_back(cv.rows[k], cv.col, cv.vals[k]);
        });
    }

    DistSparseMat2D<R> c;
    c.grid = a.grid;
    c.nrows = a.nrows;
    c.ncols = b.ncols;
    c.row_offsets = a.row_offsets;
    c.col_offsets = b.col_offsets;
    c.local = build_dcsc(acc, [&](const R& x, const R& y) { return sr.add(x, y); });
    if (stats) {
        stats->stages = stages;
        stats->flops = flops;
        stats->nnz_out = static_cast<std::int64_t>(c.local.nnz());
    }
    return c;
}

} // namespace slap
