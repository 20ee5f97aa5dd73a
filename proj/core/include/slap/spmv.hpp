#pragma once

#include <algorithm>
#include <cstdint>
#include <string_view>
#include <vector>

#include "slap/error.hpp"
#include "slap/local_matrix.hpp"
#include "slap/local_vector.hpp"
#include "slap/parallel.hpp"
#include "slap/semiring.hpp"

namespace slap {

enum class SpMVPart { row, col };

inline SpMVPart spmv_part_from_name(std::string_view s) {
    if (s == "row") return SpMVPart::row;
    if (s == "col") return SpMVPart::col;
    throw NameError("unknown spmv partitioning '" + std::string(s) + "'");
}

namespace detail {
template <class AMat, class X>
void check_mv_dims(const AMat& a, const X& x) {
    if (static_cast<std::int64_t>(a.ncols()) != static_cast<std::int64_t>(x.size()))
        throw DimError("spmv: matrix has " + std::to_string(static_cast<long long>(a.ncols())) +
                       " columns, vector has " + std::to_string(static_cast<long long>(x.size())) + " entries");
}

// Entries of `col` with row id in [r0, r1).
template <class CV, class IT>
std::pair<std::size_t, std::size_t> row_window(const CV& col, IT r0, IT r1) {
    auto lb = std::lower_bound(col.rows.begin(), col.rows.end(), r0) - col.rows.begin();
    auto ub = std::lower_bound(col.rows.begin(), col.rows.end(), r1) - col.rows.begin();
    return {static_cast<std::size_t>(lb), static_cast<std::size_t>(ub)};
}
} // namespace detail

/// y = A * x over the semiring; rows without nonzeros carry sr.zero().
///
/// row: the matrix is viewed as t row bands; each thread scans every
/// column's band and owns its slice of y outright (no combine pass, output
/// independent of t even for floats). col: each thread sweeps a column
/// range into a private output, privates are then folded with add; cheaper
/// per-thread input access, extra memory for the privates.
template <SparseColMatrix AMat, SemiringConcept SR>
    requires std::same_as<typename AMat::value_type, typename SR::left_type>
LocalDenseVec<typename SR::result_type>
local_spmv(const AMat& a, const LocalDenseVec<typename SR::right_type>& x, const SR& sr,
           SpMVPart part = SpMVPart::row, int threads = 1) {
    using IT = typename AMat::index_type;
    using R = typename SR::result_type;
    detail::check_mv_dims(a, x);
    const auto m = static_cast<std::int64_t>(a.nrows());
    LocalDenseVec<R> y;
    y.vals.assign(static_cast<std::size_t>(m), sr.zero());

    if (part == SpMVPart::row) {
        auto bounds = even_ranges(m, threads);
        parallel_chunks(threads, static_cast<int>(bounds.size()) - 1, [&](int chunk) {
            const IT r0 = static_cast<IT>(bounds[chunk]);
            const IT r1 = static_cast<IT>(bounds[chunk + 1]);
            if (r0 == r1) return;
            a.for_each_col([&](typename AMat::col_view c) {
                auto [lb, ub] = detail::row_window(c, r0, r1);
                const auto xv = x.vals[static_cast<std::size_t>(c.col)];
                for (std::size_t k = lb; k < ub; ++k) {
                    auto& slot = y.vals[static_cast<std::size_t>(c.rows[k])];
                    slot = sr.add(slot, sr.multiply(c.vals[k], xv));
                }
            });
        });
    } else {
        const auto n = static_cast<std::int64_t>(a.ncols());
        auto bounds = even_ranges(n, threads);
        const int nchunks = static_cast<int>(bounds.size()) - 1;
        std::vector<std::vector<R>> partial(static_cast<std::size_t>(nchunks));
        parallel_chunks(threads, nchunks, [&](int chunk) {
            auto& mine = partial[static_cast<std::size_t>(chunk)];
            mine.assign(static_cast<std::size_t>(m), sr.zero());
            for (std::int64_t j = bounds[chunk]; j < bounds[chunk + 1]; ++j) {
                auto c = a.column(static_cast<IT>(j));
                const auto xv = x.vals[static_cast<std::size_t>(j)];
                for (std::size_t k = 0; k < c.nnz(); ++k) {
                    auto& slot = mine[static_cast<std::size_t>(c.rows[k])];
                    slot = sr.add(slot, sr.multiply(c.vals[k], xv));
                }
            }
        });
        for (int chunk = 0; chunk < nchunks; ++chunk)
            for (std::int64_t i = 0; i < m; ++i)
                y.vals[static_cast<std::size_t>(i)] =
                    sr.add(y.vals[static_cast<std::size_t>(i)], partial[static_cast<std::size_t>(chunk)][static_cast<std::size_t>(i)]);
    }
    return y;
}

/// Y = A * X for a dense n-by-k matrix X (row-major). Equivalent to k
/// independent SpMV sweeps but shares each A entry across the k columns.
template <SparseColMatrix AMat, SemiringConcept SR>
    requires std::same_as<typename AMat::value_type, typename SR::left_type>
LocalDenseMat<typename SR::result_type>
local_spmm(const AMat& a, const LocalDenseMat<typename SR::right_type>& x, const SR& sr, int threads = 1) {
    using IT = typename AMat::index_type;
    using R = typename SR::result_type;
    if (static_cast<std::int64_t>(a.ncols()) != x.nrows)
        throw DimError("spmm: matrix has " + std::to_string(static_cast<long long>(a.ncols())) +
                       " columns, dense operand has " + std::to_string(static_cast<long long>(x.nrows)) + " rows");
    const auto m = static_cast<std::int64_t>(a.nrows());
    const auto k = x.ncols;
    auto y = LocalDenseMat<R>::zeros(m, k, sr.zero());

    const auto n = static_cast<std::int64_t>(a.ncols());
    auto bounds = even_ranges(n, threads);
    const int nchunks = static_cast<int>(bounds.size()) - 1;
    std::vector<LocalDenseMat<R>> partial(static_cast<std::size_t>(nchunks));
    parallel_chunks(threads, nchunks, [&](int chunk) {
        auto& mine = partial[static_cast<std::size_t>(chunk)];
        mine = LocalDenseMat<R>::zeros(m, k, sr.zero());
        for (std::int64_t j = bounds[chunk]; j < bounds[chunk + 1]; ++j) {
            auto c = a.column(static_cast<IT>(j));
            const auto* xrow = x.vals.data() + static_cast<std::size_t>(j * k);
            for (std::size_t e = 0; e < c.nnz(); ++e) {
                auto* yrow = mine.vals.data() + static_cast<std::size_t>(c.rows[e]) * static_cast<std::size_t>(k);
                for (std::int64_t col = 0; col < k; ++col)
                    yrow[col] = sr.add(yrow[col], sr.multiply(c.vals[e], xrow[col]));
            }
        }
    });
    for (int chunk = 0; chunk < nchunks; ++chunk)
        for (std::size_t i = 0; i < y.vals.size(); ++i)
            y.vals[i] = sr.add(y.vals[i], partial[static_cast<std::size_t>(chunk)].vals[i]);
    return y;
}

} // namespace slap
