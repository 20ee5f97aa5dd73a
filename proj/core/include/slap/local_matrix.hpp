#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "slap/triples.hpp"

namespace slap {

/// View of one nonzero column: sorted row ids and the matching values.
template <class IT, class VT>
struct ColView {
    IT col = 0;
    std::span<const IT> rows;
    std::span<const VT> vals;
    std::size_t nnz() const { return rows.size(); }
    bool empty() const { return rows.empty(); }
};

// Compressed sparse columns. Row ids are strictly increasing within each
// column; construction canonicalizes and combines duplicates, so equality
// of logical content implies equality of representation.
template <class IT, class VT>
class CscMatrix {
public:
    using index_type = IT;
    using value_type = VT;
    using col_view = ColView<IT, VT>;

    CscMatrix() = default;
    CscMatrix(IT nrows, IT ncols, std::vector<IT> colptr, std::vector<IT> rowids, std::vector<VT> vals)
        : nrows_(nrows), ncols_(ncols), colptr_(std::move(colptr)),
          rowids_(std::move(rowids)), vals_(std::move(vals)) {}

    static CscMatrix empty(IT nrows, IT ncols) {
        return CscMatrix(nrows, ncols, std::vector<IT>(static_cast<std::size_t>(ncols) + 1, 0), {}, {});
    }

    IT nrows() const { return nrows_; }
    IT ncols() const { return ncols_; }
    std::size_t nnz() const { return vals_.size(); }

    const std::vector<IT>& colptr() const { return colptr_; }
    const std::vector<IT>& rowids() const { return rowids_; }
    const std::vector<VT>& vals() const { return vals_; }

    std::size_t col_nnz(IT j) const {
        return static_cast<std::size_t>(colptr_[static_cast<std::size_t>(j) + 1] - colptr_[static_cast<std::size_t>(j)]);
    }

    col_view column(IT j) const {
        auto b = static_cast<std::size_t>(colptr_[static_cast<std::size_t>(j)]);
        auto e = static_cast<std::size_t>(colptr_[static_cast<std::size_t>(j) + 1]);
        return col_view{j, std::span<const IT>(rowids_.data() + b, e - b),
                        std::span<const VT>(vals_.data() + b, e - b)};
    }

    /// Visits nonzero columns in ascending order; empty columns are skipped
    /// so iteration cost tracks the nonzero structure for both formats.
    template <class F>
    void for_each_col(F&& f) const {
        for (IT j = 0; j < ncols_; ++j) {
            auto v = column(j);
            if (!v.empty()) f(v);
        }
    }

    bool operator==(const CscMatrix& o) const {
        return nrows_ == o.nrows_ && ncols_ == o.ncols_ && colptr_ == o.colptr_ &&
               rowids_ == o.rowids_ && vals_ == o.vals_;
    }

private:
    IT nrows_ = 0;
    IT ncols_ = 0;
    std::vector<IT> colptr_; // length ncols+1
    std::vector<IT> rowids_;
    std::vector<VT> vals_;
};

// Doubly compressed sparse columns: only nonempty columns are stored, so
// memory is O(nnz + nonzero columns) independent of the column dimension.
// The natural block format once 2D/3D partitioning drives local blocks
// hypersparse (nnz < ncols).
template <class IT, class VT>
class DcscMatrix {
public:
    using index_type = IT;
    using value_type = VT;
    using col_view = ColView<IT, VT>;

    DcscMatrix() = default;
    DcscMatrix(IT nrows, IT ncols, std::vector<IT> jc, std::vector<IT> cp, std::vector<IT> rowids, std::vector<VT> vals)
        : nrows_(nrows), ncols_(ncols), jc_(std::move(jc)), cp_(std::move(cp)),
          rowids_(std::move(rowids)), vals_(std::move(vals)) {}

    static DcscMatrix empty(IT nrows, IT ncols) {
        return DcscMatrix(nrows, ncols, {}, std::vector<IT>{0}, {}, {});
    }

    IT nrows() const { return nrows_; }
    IT ncols() const { return ncols_; }
    std::size_t nnz() const { return vals_.size(); }
    std::size_t nzc() const { return jc_.size(); } // count of nonempty columns

    const std::vector<IT>& jc() const { return jc_; }
    const std::vector<IT>& cp() const { return cp_; }
    const std::vector<IT>& rowids() const { return rowids_; }
    const std::vector<VT>& vals() const { return vals_; }

    /// Column lookup by binary search over jc (no auxiliary index).
    col_view column(IT j) const {
        auto it = std::lower_bound(jc_.begin(), jc_.end(), j);
        if (it == jc_.end() || *it != j)
            return col_view{j, {}, {}};
        auto k = static_cast<std::size_t>(it - jc_.begin());
        return nth_column(k);
    }

    std::size_t col_nnz(IT j) const { return column(j).nnz(); }

    /// k-th stored (nonempty) column.
    col_view nth_column(std::size_t k) const {
        auto b = static_cast<std::size_t>(cp_[k]);
        auto e = static_cast<std::size_t>(cp_[k + 1]);
        return col_view{jc_[k], std::span<const IT>(rowids_.data() + b, e - b),
                        std::span<const VT>(vals_.data() + b, e - b)};
    }

    template <class F>
    void for_each_col(F&& f) const {
        for (std::size_t k = 0; k < jc_.size(); ++k) f(nth_column(k));
    }

    bool operator==(const DcscMatrix& o) const {
        return nrows_ == o.nrows_ && ncols_ == o.ncols_ && jc_ == o.jc_ && cp_ == o.cp_ &&
               rowids_ == o.rowids_ && vals_ == o.vals_;
    }

private:
    IT nrows_ = 0;
    IT ncols_ = 0;
    std::vector<IT> jc_;     // nonzero column ids, strictly increasing
    std::vector<IT> cp_;     // offsets into rowids/vals, length nzc+1
    std::vector<IT> rowids_;
    std::vector<VT> vals_;
};

template <class M>
concept SparseColMatrix = requires(const M& m, typename M::index_type j) {
    { m.nrows() };
    { m.ncols() };
    { m.nnz() };
    { m.column(j) };
    m.for_each_col([](typename M::col_view) {});
};

namespace detail {

// Sorts triples into (col, row) order and combines duplicates with `add`.
// stable_sort keeps duplicate combination in input order, which makes
// builds reproducible for non-commutative debugging combiners too.
template <class IT, class VT, class Add>
void sort_and_combine(const Triples<IT, VT>& t, Add&& add,
                      std::vector<IT>& rows, std::vector<IT>& cols, std::vector<VT>& vals) {
    t.check_bounds();
    std::vector<std::size_t> order(t.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (t.cols[a] != t.cols[b]) return t.cols[a] < t.cols[b];
        return t.rows[a] < t.rows[b];
    });
    rows.clear();
    cols.clear();
    vals.clear();
    for (std::size_t idx : order) {
        if (!rows.empty() && rows.back() == t.rows[idx] && cols.back() == t.cols[idx]) {
            vals.back() = add(vals.back(), t.vals[idx]);
        } else {
            rows.push_back(t.rows[idx]);
            cols.push_back(t.cols[idx]);
            vals.push_back(t.vals[idx]);
        }
    }
}

} // namespace detail

/// Builds a CSC matrix from triples; duplicates at the same coordinate are
/// combined with `add` (normally the semiring add).
template <class IT, class VT, class Add>
CscMatrix<IT, VT> build_csc(const Triples<IT, VT>& t, Add&& add) {
    std::vector<IT> rows, cols;
    std::vector<VT> vals;
    detail::sort_and_combine(t, add, rows, cols, vals);
    std::vector<IT> colptr(static_cast<std::size_t>(t.ncols) + 1, 0);
    for (IT c : cols) ++colptr[static_cast<std::size_t>(c) + 1];
    for (std::size_t j = 0; j < static_cast<std::size_t>(t.ncols); ++j)
        colptr[j + 1] += colptr[j];
    return CscMatrix<IT, VT>(t.nrows, t.ncols, std::move(colptr), std::move(rows), std::move(vals));
}

/// Builds a DCSC matrix from triples; only nonempty columns get a jc slot.
template <class IT, class VT, class Add>
DcscMatrix<IT, VT> build_dcsc(const Triples<IT, VT>& t, Add&& add) {
    std::vector<IT> rows, cols;
    std::vector<VT> vals;
    detail::sort_and_combine(t, add, rows, cols, vals);
    std::vector<IT> jc, cp;
    for (std::size_t k = 0; k < cols.size(); ++k) {
        if (jc.empty() || jc.back() != cols[k]) {
            jc.push_back(cols[k]);
            cp.push_back(static_cast<IT>(k));
        }
    }
    cp.push_back(static_cast<IT>(cols.size())); // cp has length nzc+1
    return DcscMatrix<IT, VT>(t.nrows, t.ncols, std::move(jc), std::move(cp), std::move(rows), std::move(vals));
}

template <class IT, class VT>
Triples<IT, VT> to_triples(const CscMatrix<IT, VT>& m) {
    Triples<IT, VT> t;
    t.nrows = m.nrows();
    t.ncols = m.ncols();
    m.for_each_col([&](ColView<IT, VT> c) {
        for (std::size_t k = 0; k < c.nnz(); ++k) t.push_back(c.rows[k], c.col, c.vals[k]);
    });
    return t;
}

template <class IT, class VT>
Triples<IT, VT> to_triples(const DcscMatrix<IT, VT>& m) {
    Triples<IT, VT> t;
    t.nrows = m.nrows();
    t.ncols = m.ncols();
    m.for_each_col([&](ColView<IT, VT> c) {
        for (std::size_t k = 0; k < c.nnz(); ++k) t.push_back(c.rows[k], c.col, c.vals[k]);
    });
    return t;
}

namespace detail {
template <class M, class IT, class VT>
M rebuild_from_triples(const Triples<IT, VT>& t) {
    auto first = [](const VT& a, const VT&) { return a; }; // no duplicates possible
    if constexpr (std::is_same_v<M, CscMatrix<IT, VT>>)
        return build_csc(t, first);
    else
        return build_dcsc(t, first);
}
} // namespace detail

/// (i,j,v) -> (j,i,v). Output satisfies the same format invariants.
template <SparseColMatrix M>
M transpose_local(const M& m) {
    using IT = typename M::index_type;
    using VT = typename M::value_type;
    Triples<IT, VT> t;
    t.nrows = m.ncols();
    t.ncols = m.nrows();
    m.for_each_col([&](ColView<IT, VT> c) {
        for (std::size_t k = 0; k < c.nnz(); ++k) t.push_back(c.col, c.rows[k], c.vals[k]);
    });
    return detail::rebuild_from_triples<M>(t);
}

/// Keeps exactly the entries whose value satisfies `keep`.
template <SparseColMatrix M, class Keep>
M filter_local(const M& m, Keep&& keep) {
    using IT = typename M::index_type;
    using VT = typename M::value_type;
    Triples<IT, VT> t;
    t.nrows = m.nrows();
    t.ncols = m.ncols();
    m.for_each_col([&](ColView<IT, VT> c) {
        for (std::size_t k = 0; k < c.nnz(); ++k)
            if (keep(c.vals[k])) t.push_back(c.rows[k], c.col, c.vals[k]);
    });
    return detail::rebuild_from_triples<M>(t);
}

/// Applies f to every stored value, keeping the pattern.
template <SparseColMatrix M, class F>
M map_values(const M& m, F&& f) {
    using IT = typename M::index_type;
    using VT = typename M::value_type;
    Triples<IT, VT> t;
    t.nrows = m.nrows();
    t.ncols = m.ncols();
    m.for_each_col([&](ColView<IT, VT> c) {
        for (std::size_t k = 0; k < c.nnz(); ++k) t.push_back(c.rows[k], c.col, f(c.vals[k]));
    });
    return detail::rebuild_from_triples<M>(t);
}

template <class IT, class VT>
CscMatrix<IT, VT> dcsc_to_csc(const DcscMatrix<IT, VT>& m) {
    return build_csc(to_triples(m), [](const VT& a, const VT&) { return a; });
}

template <class IT, class VT>
DcscMatrix<IT, VT> csc_to_dcsc(const CscMatrix<IT, VT>& m) {
    return build_dcsc(to_triples(m), [](const VT& a, const VT&) { return a; });
}

} // namespace slap
