#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "slap/grid.hpp"
#include "slap/layout.hpp"
#include "slap/local_vector.hpp"

namespace slap {

/// Fully distributed dense vector in the superimposed layout. Each rank
/// stores exactly its sub-piece; assembling a row piece takes an explicit
/// gather along the process row.
template <class T>
struct DistDenseVec {
    Grid2D grid;
    std::int64_t n = 0;
    std::vector<T> local; // my sub-piece v_ij

    VectorLayout layout() const { return vector_layout(n, grid); }
    std::int64_t my_start() const { return layout().global_start(grid.myrow, grid.mycol); }
    std::int64_t my_len() const { return static_cast<std::int64_t>(local.size()); }
};

template <class T, class Fill>
DistDenseVec<T> make_dist_vec(const Grid2D& grid, std::int64_t n, Fill&& value_at_global) {
    DistDenseVec<T> v;
    v.grid = grid;
    v.n = n;
    auto lay = v.layout();
    const auto len = lay.sub_len(grid.myrow, grid.mycol);
    const auto start = lay.global_start(grid.myrow, grid.mycol);
    v.local.reserve(static_cast<std::size_t>(len));
    for (std::int64_t k = 0; k < len; ++k) v.local.push_back(value_at_global(start + k));
    return v;
}

template <class T>
DistDenseVec<T> make_const_vec(const Grid2D& grid, std::int64_t n, T value) {
    return make_dist_vec<T>(grid, n, [&](std::int64_t) { return value; });
}

/// iota vector: value at global index g is g.
inline DistDenseVec<std::int64_t> make_iota_vec(const Grid2D& grid, std::int64_t n) {
    return make_dist_vec<std::int64_t>(grid, n, [](std::int64_t g) { return g; });
}

/// Assembles the whole vector on every rank. Sub-pieces concatenate in
/// grid-rank order, which is exactly global order for this layout.
template <class T>
std::vector<T> gather_vec(const DistDenseVec<T>& v) {
    Comm c = v.grid.comm;
    auto parts = c.allgatherv(v.local, PayloadTag::vector_data);
    std::vector<T> out;
    out.reserve(static_cast<std::size_t>(v.n));
    for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

template <class T, class U, class F>
DistDenseVec<T> zip_vec(const DistDenseVec<T>& a, const DistDenseVec<U>& b, F&& f) {
    DistDenseVec<T> out = a;
    for (std::size_t i = 0; i < out.local.size(); ++i) out.local[i] = f(a.local[i], b.local[i]);
    return out;
}

template <class T, class F>
DistDenseVec<T> map_vec(const DistDenseVec<T>& a, F&& f) {
    DistDenseVec<T> out = a;
    for (auto& x : out.local) x = f(x);
    return out;
}

/// Fully distributed sparse vector: same layout, sparse local sub-pieces
/// (indices are offsets within the sub-piece).
template <class T>
struct DistSparseVec {
    Grid2D grid;
    std::int64_t n = 0;
    LocalSparseVec<std::int32_t, T> local;

    VectorLayout layout() const { return vector_layout(n, grid); }
    std::int64_t my_start() const { return layout().global_start(grid.myrow, grid.mycol); }
};

template <class T>
std::int64_t dist_nnz(const DistSparseVec<T>& v) {
    Comm c = v.grid.comm;
    return c.allreduce<std::int64_t>(static_cast<std::int64_t>(v.local.nnz()),
                                     [](std::int64_t a, std::int64_t b) { return a + b; }, 0);
}

/// Gathers (global index, value) pairs of all nonzeros on every rank,
/// sorted by index.
template <class T>
std::vector<std::pair<std::int64_t, T>> gather_sparse_vec(const DistSparseVec<T>& v) {
    struct Ent {
        std::int64_t g;
        T val;
    };
    std::vector<Ent> mine;
    const auto start = v.my_start();
    for (std::size_t k = 0; k < v.local.nnz(); ++k)
        mine.push_back(Ent{start + v.local.idx[k], v.local.vals[k]});
    Comm c = v.grid.comm;
    auto parts = c.allgatherv(mine, PayloadTag::vector_data);
    std::vector<std::pair<std::int64_t, T>> out;
    for (auto& p : parts)
        for (auto& e : p) out.emplace_back(e.g, e.val);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

/// Densifies a distributed sparse vector (absent entries get `zero`).
template <class T>
DistDenseVec<T> densify_dist(const DistSparseVec<T>& v, T zero) {
    DistDenseVec<T> d;
    d.grid = v.grid;
    d.n = v.n;
    d.local.assign(static_cast<std::size_t>(v.local.n), zero);
    for (std::size_t k = 0; k < v.local.nnz(); ++k)
        d.local[static_cast<std::size_t>(v.local.idx[k])] = v.local.vals[k];
    return d;
}

template <class T>
DistSparseVec<T> sparsify_dist(const DistDenseVec<T>& d, T zero) {
    DistSparseVec<T> v;
    v.grid = d.grid;
    v.n = d.n;
    v.local.n = static_cast<std::int32_t>(d.local.size());
    for (std::size_t i = 0; i < d.local.size(); ++i) {
        if (!(d.local[i] == zero)) {
            v.local.idx.push_back(static_cast<std::int32_t>(i));
            v.local.vals.push_back(d.local[i]);
        }
    }
    return v;
}

} // namespace slap
