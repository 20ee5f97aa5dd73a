#pragma once

#include <cstdint>
#include <vector>

#include "slap/error.hpp"

namespace slap {

/// Sparse vector: strictly increasing indices with matching values.
/// Density nnz/n drives the SpMSpV algorithm tradeoffs.
template <class IT, class VT>
struct LocalSparseVec {
    using index_type = IT;
    using value_type = VT;

    IT n = 0;
    std::vector<IT> idx;
    std::vector<VT> vals;

    std::size_t nnz() const { return idx.size(); }
    double density() const { return n == 0 ? 0.0 : static_cast<double>(nnz()) / static_cast<double>(n); }

    bool operator==(const LocalSparseVec& o) const {
        return n == o.n && idx == o.idx && vals == o.vals;
    }
};

template <class VT>
struct LocalDenseVec {
    using value_type = VT;

    std::vector<VT> vals;

    std::size_t size() const { return vals.size(); }
    VT& operator[](std::size_t i) { return vals[i]; }
    const VT& operator[](std::size_t i) const { return vals[i]; }

    bool operator==(const LocalDenseVec& o) const { return vals == o.vals; }
};

/// Dense matrix in row-major order: entry (i, c) at vals[i*ncols + c].
/// Row-major keeps one logical row contiguous, which is what the
/// column-partitioned SpMM sweep reuses.
template <class VT>
struct LocalDenseMat {
    using value_type = VT;

    std::int64_t nrows = 0;
    std::int64_t ncols = 0;
    std::vector<VT> vals; // nrows * ncols

    static LocalDenseMat zeros(std::int64_t m, std::int64_t k, VT z = VT{}) {
        LocalDenseMat d;
        d.nrows = m;
        d.ncols = k;
        d.vals.assign(static_cast<std::size_t>(m) * static_cast<std::size_t>(k), z);
        return d;
    }

    VT& at(std::int64_t i, std::int64_t c) { return vals[static_cast<std::size_t>(i * ncols + c)]; }
    const VT& at(std::int64_t i, std::int64_t c) const { return vals[static_cast<std::size_t>(i * ncols + c)]; }

    bool operator==(const LocalDenseMat& o) const {
        return nrows == o.nrows && ncols == o.ncols && vals == o.vals;
    }
};

/// Densifies a sparse vector, filling absent slots with `zero`.
template <class IT, class VT>
LocalDenseVec<VT> densify(const LocalSparseVec<IT, VT>& x, VT zero) {
    LocalDenseVec<VT> d;
    d.vals.assign(static_cast<std::size_t>(x.n), zero);
    for (std::size_t k = 0; k < x.nnz(); ++k) d.vals[static_cast<std::size_t>(x.idx[k])] = x.vals[k];
    return d;
}

/// Sparsifies a dense vector by dropping slots equal to `zero`.
template <class IT, class VT>
LocalSparseVec<IT, VT> sparsify(const LocalDenseVec<VT>& d, VT zero) {
    LocalSparseVec<IT, VT> x;
    x.n = static_cast<IT>(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!(d.vals[i] == zero)) {
            x.idx.push_back(static_cast<IT>(i));
            x.vals.push_back(d.vals[i]);
        }
    }
    return x;
}

} // namespace slap
