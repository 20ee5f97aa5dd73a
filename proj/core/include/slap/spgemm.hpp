#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <queue>
#include <string_view>
#include <vector>

#include "slap/error.hpp"
#include "slap/local_matrix.hpp"
#include "slap/parallel.hpp"
#include "slap/semiring.hpp"

namespace slap {

enum class SpGemmAlg { heap, hash, hybrid };

inline SpGemmAlg spgemm_alg_from_name(std::string_view s) {
    if (s == "heap") return SpGemmAlg::heap;
    if (s == "hash") return SpGemmAlg::hash;
    if (s == "hybrid") return SpGemmAlg::hybrid;
    throw NameError("unknown spgemm algorithm '" + std::string(s) + "'");
}

/// Per-column multiply counts for C = A*B. flops(j) = sum over nonzeros
/// (k, j) of B of nnz(A(:,k)); the exact number of multiply invocations a
/// Gustavson-style kernel performs for column j.
struct SpGemmEstimate {
    std::vector<std::int64_t> flops_per_column;
    std::int64_t total_flops = 0;
};

struct MatrixStats {
    double avg_nnz_per_column = 0.0; // d
    std::int64_t nnz = 0;
    std::int64_t nrows = 0;
    std::int64_t ncols = 0;
};

template <SparseColMatrix M>
MatrixStats matrix_stats(const M& m) {
    MatrixStats s;
    s.nnz = static_cast<std::int64_t>(m.nnz());
    s.nrows = static_cast<std::int64_t>(m.nrows());
    s.ncols = static_cast<std::int64_t>(m.ncols());
    s.avg_nnz_per_column = s.ncols == 0 ? 0.0 : static_cast<double>(s.nnz) / static_cast<double>(s.ncols);
    return s;
}

/// Column decision threshold for the hybrid kernel: columns whose
/// compression ratio (flops / output nnz) is at least this value are formed
/// with the hash table, the rest with the heap.
inline constexpr double kHybridCompressionThreshold = 2.0;

namespace detail {
template <class AMat, class BMat>
void check_gemm_dims(const AMat& a, const BMat& b) {
    if (static_cast<std::int64_t>(a.ncols()) != static_cast<std::int64_t>(b.nrows()))
        throw DimError("spgemm inner dims: A is " + std::to_string(static_cast<long long>(a.nrows())) + "x" +
                       std::to_string(static_cast<long long>(a.ncols())) + ", B is " +
                       std::to_string(static_cast<long long>(b.nrows())) + "x" +
                       std::to_string(static_cast<long long>(b.ncols())));
}
} // namespace detail

/// Phase 1 of SpGEMM: O(nnz(B)) given A's per-column counts.
template <SparseColMatrix AMat, SparseColMatrix BMat>
SpGemmEstimate estimate_flops(const AMat& a, const BMat& b) {
    detail::check_gemm_dims(a, b);
    using BIT = typename BMat::index_type;
    // one pass to cache nnz per column of A (cheap for CSC, avoids repeated
    // binary searches for DCSC)
    std::vector<std::int64_t> a_colnnz(static_cast<std::size_t>(a.ncols()), 0);
    a.for_each_col([&](typename AMat::col_view c) {
        a_colnnz[static_cast<std::size_t>(c.col)] = static_cast<std::int64_t>(c.nnz());
    });
    SpGemmEstimate est;
    est.flops_per_column.assign(static_cast<std::size_t>(b.ncols()), 0);
    b.for_each_col([&](typename BMat::col_view c) {
        std::int64_t f = 0;
        for (std::size_t k = 0; k < c.nnz(); ++k) f += a_colnnz[static_cast<std::size_t>(c.rows[k])];
        est.flops_per_column[static_cast<std::size_t>(c.col)] = f;
        est.total_flops += f;
        (void)sizeof(BIT);
    });
    return est;
}

namespace detail {

// Sparse-accumulator pattern counter: flags + touched list give O(column
// output) reset, so the whole pass stays O(flops).
template <class IT>
struct PatternSpa {
    std::vector<char> seen;
    std::vector<IT> touched;

    explicit PatternSpa(std::size_t nrows) : seen(nrows, 0) {}

    void insert(IT row) {
        if (!seen[static_cast<std::size_t>(row)]) {
            seen[static_cast<std::size_t>(row)] = 1;
            touched.push_back(row);
        }
    }
    std::size_t count() const { return touched.size(); }
    void reset() {
        for (IT r : touched) seen[static_cast<std::size_t>(r)] = 0;
        touched.clear();
    }
};

} // namespace detail

/// Phase 2 of SpGEMM: exact structural nonzero count per output column
/// (union of A-row patterns selected by B's column), O(flops).
template <SparseColMatrix AMat, SparseColMatrix BMat>
std::vector<std::int64_t> symbolic_nnz(const AMat& a, const BMat& b, int threads = 1) {
    detail::check_gemm_dims(a, b);
    using AIT = typename AMat::index_type;
    std::vector<std::int64_t> counts(static_cast<std::size_t>(b.ncols()), 0);
    const auto ncols = static_cast<std::int64_t>(b.ncols());
    auto bounds = even_ranges(ncols, threads);
    parallel_chunks(threads, static_cast<int>(bounds.size()) - 1, [&](int chunk) {
        detail::PatternSpa<AIT> spa(static_cast<std::size_t>(a.nrows()));
        for (std::int64_t j = bounds[chunk]; j < bounds[chunk + 1]; ++j) {
            auto bcol = b.column(static_cast<typename BMat::index_type>(j));
            for (std::size_t k = 0; k < bcol.nnz(); ++k) {
                auto acol = a.column(static_cast<AIT>(bcol.rows[k]));
                for (std::size_t r = 0; r < acol.nnz(); ++r) spa.insert(acol.rows[r]);
            }
            counts[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(spa.count());
            spa.reset();
        }
    });
    return counts;
}

namespace detail {

// Forms one output column by a k-way merge over the A-columns selected by
// B(:,j). The heap orders by (row, stream), where streams are visited in
// ascending inner index k, so accumulation order within a row is the
// ascending-k order.
template <class AMat, class SR, class OutIT>
std::size_t spgemm_heap_column(const AMat& a, typename AMat::col_view bcol, const SR& sr,
                               OutIT* out_rows, typename SR::result_type* out_vals) {
    using AIT = typename AMat::index_type;
    using R = typename SR::result_type;
    struct Head {
        AIT row;
        std::uint32_t stream;
        std::uint32_t pos;
    };
    auto greater = [](const Head& x, const Head& y) {
        if (x.row != y.row) return x.row > y.row;
        return x.stream > y.stream;
    };
    std::vector<typename AMat::col_view> streams;
    std::vector<typename SR::right_type> bvals; // b value paired with each stream
    streams.reserve(bcol.nnz());
    bvals.reserve(bcol.nnz());
    std::vector<Head> heap;
    for (std::size_t k = 0; k < bcol.nnz(); ++k) {
        auto acol = a.column(static_cast<AIT>(bcol.rows[k]));
        if (acol.empty()) continue;
        heap.push_back(Head{acol.rows[0], static_cast<std::uint32_t>(streams.size()), 0});
        streams.push_back(acol);
        bvals.push_back(bcol.vals[k]);
    }
    std::make_heap(heap.begin(), heap.end(), greater);
    std::size_t n_out = 0;
    bool have = false;
    AIT cur_row{};
    R acc{};
    while (!heap.empty()) {
        std::pop_heap(heap.begin(), heap.end(), greater);
        Head h = heap.back();
        heap.pop_back();
        const auto& st = streams[h.stream];
        R prod = sr.multiply(st.vals[h.pos], bvals[h.stream]);
        if (have && h.row == cur_row) {
            acc = sr.add(acc, prod);
        } else {
            if (have) {
                out_rows[n_out] = static_cast<OutIT>(cur_row);
                out_vals[n_out] = acc;
                ++n_out;
            }
            cur_row = h.row;
            acc = prod;
            have = true;
        }
        if (h.pos + 1 < st.nnz()) {
            heap.push_back(Head{st.rows[h.pos + 1], h.stream, h.pos + 1});
            std::push_heap(heap.begin(), heap.end(), greater);
        }
    }
    if (have) {
        out_rows[n_out] = static_cast<OutIT>(cur_row);
        out_vals[n_out] = acc;
        ++n_out;
    }
    return n_out;
}

// Open-addressing accumulator with linear probing and multiplicative
// hashing. Capacity is the smallest power of two holding 2x the symbolic
// column count, fixed up front so no rehashing happens mid-column.
template <class IT, class R>
struct HashAccumulator {
    std::vector<IT> keys;   // -1 = empty
    std::vector<R> vals;
    std::size_t mask = 0;

    void prepare(std::size_t expected) {
        std::size_t cap = std::bit_ceil(std::max<std::size_t>(2 * expected, 2));
        keys.assign(cap, IT{-1});
        vals.assign(cap, R{});
        mask = cap - 1;
    }

    template <class Add>
    void upsert(IT row, R v, Add&& add) {
        std::size_t h = (static_cast<std::size_t>(static_cast<std::uint64_t>(row) * 0x9e3779b97f4a7c15ULL)) & mask;
        for (;;) {
            if (keys[h] == IT{-1}) {
                keys[h] = row;
                vals[h] = v;
                return;
            }
            if (keys[h] == row) {
                vals[h] = add(vals[h], v);
                return;
            }
            h = (h + 1) & mask;
        }
    }
};

template <class AMat, class SR, class OutIT>
std::size_t spgemm_hash_column(const AMat& a, typename AMat::col_view bcol, const SR& sr,
                               std::size_t expected_nnz,
                               HashAccumulator<OutIT, typename SR::result_type>& table,
                               std::vector<std::pair<OutIT, typename SR::result_type>>& scratch,
                               OutIT* out_rows, typename SR::result_type* out_vals) {
    using AIT = typename AMat::index_type;
    table.prepare(expected_nnz);
    auto add = [&](const typename SR::result_type& x, const typename SR::result_type& y) { return sr.add(x, y); };
    for (std::size_t k = 0; k < bcol.nnz(); ++k) {
        auto acol = a.column(static_cast<AIT>(bcol.rows[k]));
        for (std::size_t r = 0; r < acol.nnz(); ++r)
            table.upsert(static_cast<OutIT>(acol.rows[r]), sr.multiply(acol.vals[r], bcol.vals[k]), add);
    }
    scratch.clear();
    for (std::size_t h = 0; h < table.keys.size(); ++h)
        if (table.keys[h] != OutIT{-1}) scratch.emplace_back(table.keys[h], table.vals[h]);
    std::sort(scratch.begin(), scratch.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    for (std::size_t k = 0; k < scratch.size(); ++k) {
        out_rows[k] = scratch[k].first;
        out_vals[k] = scratch[k].second;
    }
    return scratch.size();
}

} // namespace detail

/// C = A * B over the semiring, column-by-column Gustavson with the
/// requested accumulator. Three phases: flops estimation (to balance
/// columns over threads), symbolic count (to size the output exactly), and
/// the numeric pass. Output columns are canonical (rows ascending), and for
/// a fixed algorithm the result does not depend on the thread count.
template <SparseColMatrix AMat, SparseColMatrix BMat, SemiringConcept SR>
    requires std::same_as<typename AMat::value_type, typename SR::left_type> &&
             std::same_as<typename BMat::value_type, typename SR::right_type>
CscMatrix<typename AMat::index_type, typename SR::result_type>
local_spgemm(const AMat& a, const BMat& b, const SR& sr, SpGemmAlg alg = SpGemmAlg::hybrid, int threads = 1,
             double hybrid_threshold = kHybridCompressionThreshold) {
    using IT = typename AMat::index_type;
    using R = typename SR::result_type;
    detail::check_gemm_dims(a, b);

    const auto n_out_cols = static_cast<std::int64_t>(b.ncols());
    SpGemmEstimate est = estimate_flops(a, b);
    std::vector<std::int64_t> sym = symbolic_nnz(a, b, threads);

    std::vector<IT> colptr(static_cast<std::size_t>(n_out_cols) + 1, 0);
    for (std::int64_t j = 0; j < n_out_cols; ++j)
        colptr[static_cast<std::size_t>(j) + 1] =
            colptr[static_cast<std::size_t>(j)] + static_cast<IT>(sym[static_cast<std::size_t>(j)]);
    const auto total_nnz = static_cast<std::size_t>(colptr[static_cast<std::size_t>(n_out_cols)]);
    std::vector<IT> rowids(total_nnz);
    std::vector<R> vals(total_nnz);

    auto bounds = balanced_ranges(n_out_cols, threads,
                                  [&](std::int64_t j) { return est.flops_per_column[static_cast<std::size_t>(j)]; });
    parallel_chunks(threads, static_cast<int>(bounds.size()) - 1, [&](int chunk) {
        detail::HashAccumulator<IT, R> table;
        std::vector<std::pair<IT, R>> scratch;
        for (std::int64_t j = bounds[chunk]; j < bounds[chunk + 1]; ++j) {
            auto bcol = b.column(static_cast<typename BMat::index_type>(j));
            const auto expected = static_cast<std::size_t>(sym[static_cast<std::size_t>(j)]);
            if (expected == 0) continue;
            IT* out_rows = rowids.data() + colptr[static_cast<std::size_t>(j)];
            R* out_vals = vals.data() + colptr[static_cast<std::size_t>(j)];
            bool use_hash;
            switch (alg) {
            case SpGemmAlg::heap: use_hash = false; break;
            case SpGemmAlg::hash: use_hash = true; break;
            case SpGemmAlg::hybrid:
            default: {
                const double ratio = static_cast<double>(est.flops_per_column[static_cast<std::size_t>(j)]) /
                                     static_cast<double>(expected);
                use_hash = ratio >= hybrid_threshold;
                break;
            }
            }
            std::size_t produced =
                use_hash ? detail::spgemm_hash_column(a, bcol, sr, expected, table, scratch, out_rows, out_vals)
                         : detail::spgemm_heap_column(a, bcol, sr, out_rows, out_vals);
            if (produced != expected)
                throw Error("InternalError", "numeric column nnz disagrees with symbolic count");
        }
    });

    return CscMatrix<IT, R>(static_cast<IT>(a.nrows()), static_cast<IT>(n_out_cols),
                            std::move(colptr), std::move(rowids), std::move(vals));
}

} // namespace slap
