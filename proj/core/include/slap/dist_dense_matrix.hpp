#pragma once

#include <cstdint>
#include <vector>

#include "slap/dist_vector.hpp"
#include "slap/grid.hpp"
#include "slap/layout.hpp"
#include "slap/local_vector.hpp"

namespace slap {

/// rowsplit superimposes the vector distribution on the rows (each rank
/// owns sub-piece rows, all k columns) and suits tall-skinny operands;
/// blocks2d tiles both dimensions like the sparse matrices.
enum class DenseLayout { rowsplit, blocks2d };

template <class T>
struct DistDenseMat {
    Grid2D grid;
    DenseLayout layout = DenseLayout::rowsplit;
    GlobalIdx nrows = 0;
    GlobalIdx ncols = 0;
    LocalDenseMat<T> local;

    /// Global row range of this rank's slice.
    std::pair<GlobalIdx, GlobalIdx> my_rows() const {
        if (layout == DenseLayout::rowsplit) {
            auto lay = vector_layout(nrows, grid);
            return {lay.global_start(grid.myrow, grid.mycol), lay.sub_len(grid.myrow, grid.mycol)};
        }
        auto ro = block_offsets(nrows, grid.pr);
        return {ro[static_cast<std::size_t>(grid.myrow)],
                ro[static_cast<std::size_t>(grid.myrow) + 1] - ro[static_cast<std::size_t>(grid.myrow)]};
    }

    std::pair<GlobalIdx, GlobalIdx> my_cols() const {
        if (layout == DenseLayout::rowsplit) return {0, ncols};
        auto co = block_offsets(ncols, grid.pc);
        return {co[static_cast<std::size_t>(grid.mycol)],
                co[static_cast<std::size_t>(grid.mycol) + 1] - co[static_cast<std::size_t>(grid.mycol)]};
    }
};

template <class T, class Fill>
DistDenseMat<T> make_dist_dense(const Grid2D& grid, DenseLayout layout, GlobalIdx m, GlobalIdx k,
                                Fill&& value_at) {
    DistDenseMat<T> d;
    d.grid = grid;
    d.layout = layout;
    d.nrows = m;
    d.ncols = k;
    auto [rs, rl] = d.my_rows();
    auto [cs, cl] = d.my_cols();
    d.local = LocalDenseMat<T>::zeros(rl, cl);
    for (GlobalIdx i = 0; i < rl; ++i)
        for (GlobalIdx j = 0; j < cl; ++j) d.local.at(i, j) = value_at(rs + i, cs + j);
    return d;
}

/// Assembles the full dense matrix on every rank.
template <class T>
LocalDenseMat<T> gather_dense(const DistDenseMat<T>& d) {
    struct Cell {
        GlobalIdx r;
        GlobalIdx c;
        T v;
    };
    std::vector<Cell> mine;
    auto [rs, rl] = d.my_rows();
    auto [cs, cl] = d.my_cols();
    for (GlobalIdx i = 0; i < rl; ++i)
        for (GlobalIdx j = 0; j < cl; ++j) mine.push_back({rs + i, cs + j, d.local.at(i, j)});
    Comm comm = d.grid.comm;
    auto parts = comm.allgatherv(mine, PayloadTag::dense_matrix);
    auto out = LocalDenseMat<T>::zeros(d.nrows, d.ncols);
    for (auto& p : parts)
        for (auto& cell : p) out.at(cell.r, cell.c) = cell.v;
    return out;
}

} // namespace slap
