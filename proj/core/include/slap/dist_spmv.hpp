#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <numeric>
#include <vector>

#include "slap/dist_dense_matrix.hpp"
#include "slap/dist_matrix.hpp"
#include "slap/dist_vector.hpp"
#include "slap/spmspv.hpp"
#include "slap/spmv.hpp"

namespace slap {

namespace detail {

template <class VT>
void check_superimposed(const DistSparseMat2D<VT>& a) {
    // the vector piece rule and the matrix block rule must coincide for the
    // row reduction to scatter straight into the output layout
    auto def_r = block_offsets(a.nrows, a.grid.pr);
    auto def_c = block_offsets(a.ncols, a.grid.pc);
    if (a.row_offsets != def_r || a.col_offsets != def_c)
        throw DimError("matrix blocks do not follow the superimposed vector layout");
}

/// Destination rank for global vector index g when segments must line up
/// with the matrix column blocks: column block owner j', spread over the
/// process column by the remainder rule.
template <class VT>
int seg_owner_rank(const DistSparseMat2D<VT>& a, GlobalIdx g) {
    const int j = block_of(a.col_offsets, g);
    const GlobalIdx bs = a.col_offsets[static_cast<std::size_t>(j)];
    const GlobalIdx bl = a.col_offsets[static_cast<std::size_t>(j) + 1] - bs;
    auto sub = block_offsets(bl, a.grid.pr);
    const int i = block_of(sub, g - bs);
    return a.grid.rank_of(i, j);
}

} // namespace detail

/// y = A * x. Three collective steps: (1) one alltoallv re-routes x
/// sub-pieces so process column j collectively holds the x segment of A's
/// column block j, (2) an allgatherv along each process column replicates
/// that segment to its members, (3) after the local multiply, an alltoallv
/// along each process row scatters partial-y sub-pieces which are folded
/// with the semiring add into the standard output layout.
template <class VT, SemiringConcept SR>
    requires std::same_as<VT, typename SR::left_type>
DistDenseVec<typename SR::result_type>
dist_spmv(const DistSparseMat2D<VT>& a, const DistDenseVec<typename SR::right_type>& x, const SR& sr,
          int threads = 1) {
    using XT = typename SR::right_type;
    using R = typename SR::result_type;
    if (a.ncols != x.n)
        throw DimError("dist_spmv: matrix has " + std::to_string(static_cast<long long>(a.ncols)) +
                       " columns, vector length is " + std::to_string(static_cast<long long>(x.n)));
    if (a.grid.pr != x.grid.pr || a.grid.pc != x.grid.pc) throw DimError("dist_spmv: operand grids differ");
    detail::check_superimposed(a);
    const Grid2D& g = a.grid;

    struct Ent {
        GlobalIdx g;
        XT v;
    };
    // (1) route x entries to the rank owning their slice of the column segment
    std::vector<std::vector<Ent>> out(static_cast<std::size_t>(g.size()));
    const GlobalIdx xstart = x.my_start();
    for (std::size_t k = 0; k < x.local.size(); ++k) {
        const GlobalIdx gi = xstart + static_cast<GlobalIdx>(k);
        out[static_cast<std::size_t>(detail::seg_owner_rank(a, gi))].push_back(Ent{gi, x.local[k]});
    }
    Comm world = g.comm;
    auto routed = world.alltoallv(out, PayloadTag::vector_data);

    // (2) assemble the full column segment on every member of the column
    std::vector<Ent> mine;
    for (auto& part : routed) mine.insert(mine.end(), part.begin(), part.end());
    Comm col = g.col_comm;
    auto seg_parts = col.allgatherv(mine, PayloadTag::vector_data);
    // every global index was routed, so each xseg slot gets overwritten
    const GlobalIdx cbs = a.col_start();
    LocalDenseVec<XT> xseg;
    xseg.vals.assign(static_cast<std::size_t>(a.col_end() - cbs), XT{});
    for (auto& part : seg_parts)
        for (auto& e : part) xseg.vals[static_cast<std::size_t>(e.g - cbs)] = e.v;

    // (3) local multiply, then reduce-scatter along the process row
    auto ypart = local_spmv(a.local, xseg, sr, SpMVPart::row, threads);
    auto ylay = vector_layout(a.nrows, g);
    std::vector<std::vector<R>> rowout(static_cast<std::size_t>(g.pc));
    for (int j = 0; j < g.pc; ++j) {
        const auto ss = ylay.sub_start(g.myrow, j);
        const auto sl = ylay.sub_len(g.myrow, j);
        rowout[static_cast<std::size_t>(j)].assign(ypart.vals.begin() + ss, ypart.vals.begin() + ss + sl);
    }
    Comm row = g.row_comm;
    auto folded_parts = row.alltoallv(rowout, PayloadTag::vector_data);

    DistDenseVec<R> y;
    y.grid = g;
    y.n = a.nrows;
    y.local.assign(static_cast<std::size_t>(ylay.sub_len(g.myrow, g.mycol)), sr.zero());
    for (auto& part : folded_parts)
        for (std::size_t i = 0; i < part.size(); ++i) y.local[i] = sr.add(y.local[i], part[i]);
    return y;
}

/// Sparse-vector counterpart of dist_spmv: the same three collective steps
/// carry only nonzeros, and the row-wise reduction merges sparse segments.
template <class VT, SemiringConcept SR>
    requires std::same_as<VT, typename SR::left_type>
DistSparseVec<typename SR::result_type>
dist_spmspv(const DistSparseMat2D<VT>& a, const DistSparseVec<typename SR::right_type>& x, const SR& sr,
            SpMSpVAlg alg = SpMSpVAlg::spa, int threads = 1) {
    using XT = typename SR::right_type;
    using R = typename SR::result_type;
    if (a.ncols != x.n)
        throw DimError("dist_spmspv: matrix has " + std::to_string(static_cast<long long>(a.ncols)) +
                       " columns, vector length is " + std::to_string(static_cast<long long>(x.n)));
    if (a.grid.pr != x.grid.pr || a.grid.pc != x.grid.pc) throw DimError("dist_spmspv: operand grids differ");
    detail::check_superimposed(a);
    const Grid2D& g = a.grid;

    struct Ent {
        GlobalIdx g;
        XT v;
    };
    std::vector<std::vector<Ent>> out(static_cast<std::size_t>(g.size()));
    const GlobalIdx xstart = x.my_start();
    for (std::size_t k = 0; k < x.local.nnz(); ++k) {
        const GlobalIdx gi = xstart + x.local.idx[k];
        out[static_cast<std::size_t>(detail::seg_owner_rank(a, gi))].push_back(Ent{gi, x.local.vals[k]});
    }
    Comm world = g.comm;
    auto routed = world.alltoallv(out, PayloadTag::vector_data);

    std::vector<Ent> mine;
    for (auto& part : routed) mine.insert(mine.end(), part.begin(), part.end());
    Comm col = g.col_comm;
    auto seg_parts = col.allgatherv(mine, PayloadTag::vector_data);
    const GlobalIdx cbs = a.col_start();
    LocalSparseVec<LocalIdx, XT> xseg;
    xseg.n = a.local_cols();
    {
        std::vector<Ent> seg;
        for (auto& part : seg_parts) seg.insert(seg.end(), part.begin(), part.end());
        std::sort(seg.begin(), seg.end(), [](const Ent& p, const Ent& q) { return p.g < q.g; });
        for (auto& e : seg) {
            xseg.idx.push_back(static_cast<LocalIdx>(e.g - cbs));
            xseg.vals.push_back(e.v);
        }
    }

    auto ypart = local_spmspv(a.local, xseg, sr, alg, threads);

    auto ylay = vector_layout(a.nrows, g);
    struct YEnt {
        LocalIdx idx; // local to the destination sub-piece
        R v;
    };
    auto sub = block_offsets(ylay.piece_len(g.myrow), g.pc);
    std::vector<std::vector<YEnt>> rowout(static_cast<std::size_t>(g.pc));
    for (std::size_t k = 0; k < ypart.nnz(); ++k) {
        const int j = block_of(sub, ypart.idx[k]);
        rowout[static_cast<std::size_t>(j)].push_back(
            YEnt{static_cast<LocalIdx>(ypart.idx[k] - sub[static_cast<std::size_t>(j)]), ypart.vals[k]});
    }
    Comm row = g.row_comm;
    auto folded = row.alltoallv(rowout, PayloadTag::vector_data);

    DistSparseVec<R> y;
    y.grid = g;
    y.n = a.nrows;
    y.local.n = static_cast<LocalIdx>(ylay.sub_len(g.myrow, g.mycol));
    {
        std::vector<YEnt> all;
        for (auto& part : folded) all.insert(all.end(), part.begin(), part.end());
        std::stable_sort(all.begin(), all.end(), [](const YEnt& p, const YEnt& q) { return p.idx < q.idx; });
        for (auto& e : all) {
            if (!y.local.idx.empty() && y.local.idx.back() == e.idx)
                y.local.vals.back() = sr.add(y.local.vals.back(), e.v);
            else {
                y.local.idx.push_back(e.idx);
                y.local.vals.push_back(e.v);
            }
        }
    }
    return y;
}

/// Y = A * X for a row-split dense X: X rows are gathered within process
/// columns (dense traffic only), multiplied locally, and dense partial
/// results are reduce-scattered along process rows. No sparse payload
/// moves, which the counters can confirm.
template <class VT, SemiringConcept SR>
    requires std::same_as<VT, typename SR::left_type>
DistDenseMat<typename SR::result_type>
dist_spmm(const DistSparseMat2D<VT>& a, const DistDenseMat<typename SR::right_type>& x, const SR& sr,
          int threads = 1) {
    using XT = typename SR::right_type;
    using R = typename SR::result_type;
    if (x.layout != DenseLayout::rowsplit) throw DimError("dist_spmm expects a row-split dense operand");
    if (a.ncols != x.nrows)
        throw DimError("dist_spmm: matrix has " + std::to_string(static_cast<long long>(a.ncols)) +
                       " columns, dense operand has " + std::to_string(static_cast<long long>(x.nrows)) + " rows");
    if (a.grid.pr != x.grid.pr || a.grid.pc != x.grid.pc) throw DimError("dist_spmm: operand grids differ");
    detail::check_superimposed(a);
    const Grid2D& g = a.grid;
    const GlobalIdx k = x.ncols;

    // (1) route X rows; each record is a global row id plus its k values
    const auto rec_bytes = sizeof(GlobalIdx) + static_cast<std::size_t>(k) * sizeof(XT);
    std::vector<std::vector<std::byte>> out(static_cast<std::size_t>(g.size()));
    auto [xrs, xrl] = x.my_rows();
    for (GlobalIdx i = 0; i < xrl; ++i) {
        const GlobalIdx gi = xrs + i;
        auto& buf = out[static_cast<std::size_t>(detail::seg_owner_rank(a, gi))];
        const std::size_t pos = buf.size();
        buf.resize(pos + rec_bytes);
        std::memcpy(buf.data() + pos, &gi, sizeof gi);
        std::memcpy(buf.data() + pos + sizeof gi, x.local.vals.data() + static_cast<std::size_t>(i * k),
                    static_cast<std::size_t>(k) * sizeof(XT));
    }
    Comm world = g.comm;
    auto routed = world.alltoallv(out, PayloadTag::dense_matrix);

    // (2) assemble the dense X segment for my column block
    std::vector<std::byte> mine;
    for (auto& part : routed) mine.insert(mine.end(), part.begin(), part.end());
    Comm col = g.col_comm;
    auto seg_parts = col.allgatherv(mine, PayloadTag::dense_matrix);
    const GlobalIdx cbs = a.col_start();
    auto xseg = LocalDenseMat<XT>::zeros(a.col_end() - cbs, k);
    for (auto& part : seg_parts) {
        for (std::size_t pos = 0; pos + rec_bytes <= part.size(); pos += rec_bytes) {
            GlobalIdx gi;
            std::memcpy(&gi, part.data() + pos, sizeof gi);
            std::memcpy(xseg.vals.data() + static_cast<std::size_t>(gi - cbs) * static_cast<std::size_t>(k),
                        part.data() + pos + sizeof gi, static_cast<std::size_t>(k) * sizeof(XT));
        }
    }

    // (3) local multiply and dense reduce-scatter along the process row
    auto ypart = local_spmm(a.local, xseg, sr, threads);
    auto ylay = vector_layout(a.nrows, g);
    std::vector<std::vector<R>> rowout(static_cast<std::size_t>(g.pc));
    for (int j = 0; j < g.pc; ++j) {
        const auto ss = ylay.sub_start(g.myrow, j);
        const auto sl = ylay.sub_len(g.myrow, j);
        rowout[static_cast<std::size_t>(j)].assign(ypart.vals.begin() + ss * k,
                                                   ypart.vals.begin() + (ss + sl) * k);
    }
    Comm row = g.row_comm;
    auto folded = row.alltoallv(rowout, PayloadTag::dense_matrix);

    DistDenseMat<R> y;
    y.grid = g;
    y.layout = DenseLayout::rowsplit;
    y.nrows = a.nrows;
    y.ncols = k;
    y.local = LocalDenseMat<R>::zeros(ylay.sub_len(g.myrow, g.mycol), k, sr.zero());
    for (auto& part : folded)
        for (std::size_t i = 0; i < part.size(); ++i) y.local.vals[i] = sr.add(y.local.vals[i], part[i]);
    return y;
}

/// y(ind(k)) <- combine(y(ind(k)), x(k)) routed by owner in one alltoallv.
/// The default combine keeps the incoming value; duplicate targets resolve
/// deterministically in (source rank, source position) order, so the last
/// writer in that order wins.
template <class T, class Combine>
void vec_assign(DistDenseVec<T>& y, const DistDenseVec<GlobalIdx>& ind, const DistDenseVec<T>& x,
                Combine&& combine) {
    if (ind.n != x.n || ind.grid.pr != x.grid.pr || ind.grid.pc != x.grid.pc)
        throw DimError("vec_assign: ind and x must share length and grid");
    if (y.grid.pr != ind.grid.pr || y.grid.pc != ind.grid.pc) throw DimError("vec_assign: grid mismatch");
    struct Ent {
        GlobalIdx off; // offset in the destination sub-piece
        T v;
    };
    auto ylay = y.layout();
    std::vector<std::vector<Ent>> out(static_cast<std::size_t>(y.grid.size()));
    for (std::size_t k = 0; k < ind.local.size(); ++k) {
        const GlobalIdx gi = ind.local[k];
        if (gi < 0 || gi >= y.n)
            throw IndexError("assign index " + std::to_string(static_cast<long long>(gi)) + " outside vector of length " +
                             std::to_string(static_cast<long long>(y.n)));
        auto o = ylay.owner(gi);
        out[static_cast<std::size_t>(y.grid.rank_of(o.row, o.col))].push_back(Ent{o.offset, x.local[k]});
    }
    Comm world = y.grid.comm;
    auto recv = world.alltoallv(out, PayloadTag::vector_data);
    for (auto& part : recv)
        for (auto& e : part)
            y.local[static_cast<std::size_t>(e.off)] = combine(y.local[static_cast<std::size_t>(e.off)], e.v);
}

template <class T>
void vec_assign(DistDenseVec<T>& y, const DistDenseVec<GlobalIdx>& ind, const DistDenseVec<T>& x) {
    vec_assign(y, ind, x, [](const T&, const T& incoming) { return incoming; });
}

/// r(k) = x(ind(k)). Needs a request and a reply alltoallv (owners cannot
/// know who wants their entries), so this is two collective rounds.
template <class T>
DistDenseVec<T> vec_extract(const DistDenseVec<T>& x, const DistDenseVec<GlobalIdx>& ind) {
    if (x.grid.pr != ind.grid.pr || x.grid.pc != ind.grid.pc) throw DimError("vec_extract: grid mismatch");
    auto xlay = x.layout();
    std::vector<std::vector<GlobalIdx>> req(static_cast<std::size_t>(x.grid.size()));
    std::vector<std::vector<std::size_t>> req_pos(static_cast<std::size_t>(x.grid.size()));
    for (std::size_t k = 0; k < ind.local.size(); ++k) {
        const GlobalIdx gi = ind.local[k];
        if (gi < 0 || gi >= x.n)
            throw IndexError("extract index " + std::to_string(static_cast<long long>(gi)) +
                             " outside vector of length " + std::to_string(static_cast<long long>(x.n)));
        auto o = xlay.owner(gi);
        const auto rank = static_cast<std::size_t>(x.grid.rank_of(o.row, o.col));
        req[rank].push_back(o.offset);
        req_pos[rank].push_back(k);
    }
    Comm world = x.grid.comm;
    auto questions = world.alltoallv(req, PayloadTag::vector_data);
    std::vector<std::vector<T>> answers(static_cast<std::size_t>(x.grid.size()));
    for (std::size_t src = 0; src < questions.size(); ++src) {
        answers[src].reserve(questions[src].size());
        for (GlobalIdx off : questions[src]) answers[src].push_back(x.local[static_cast<std::size_t>(off)]);
    }
    auto replies = world.alltoallv(answers, PayloadTag::vector_data);

    DistDenseVec<T> r;
    r.grid = ind.grid;
    r.n = ind.n;
    r.local.assign(ind.local.size(), T{});
    for (std::size_t rank = 0; rank < replies.size(); ++rank)
        for (std::size_t i = 0; i < replies[rank].size(); ++i) r.local[req_pos[rank][i]] = replies[rank][i];
    return r;
}

} // namespace slap
