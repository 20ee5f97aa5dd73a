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

enum class SpMSpVAlg { heap, spa, bucket };

inline SpMSpVAlg spmspv_alg_from_name(std::string_view s) {
    if (s == "heap") return SpMSpVAlg::heap;
    if (s == "spa") return SpMSpVAlg::spa;
    if (s == "bucket") return SpMSpVAlg::bucket;
    throw NameError("unknown spmspv algorithm '" + std::string(s) + "'");
}

struct SpMSpVStats {
    double input_density = 0.0;  // f
    double output_density = 0.0; // g, rows touched before duplicate merging
    int threads = 1;
};

namespace detail {

// Heap merge across the selected A-columns, restricted to rows [r0, r1).
// Streams enter in ascending x-index order, so per-row accumulation is in
// ascending inner index.
template <class AMat, class SR, class IT, class R>
void spmspv_heap_range(const AMat& a, const LocalSparseVec<IT, typename SR::right_type>& x, const SR& sr,
                       IT r0, IT r1, std::vector<IT>& out_idx, std::vector<R>& out_vals) {
    struct Head {
        IT row;
        std::uint32_t stream;
        std::uint32_t pos;
    };
    auto greater = [](const Head& p, const Head& q) {
        if (p.row != q.row) return p.row > q.row;
        return p.stream > q.stream;
    };
    std::vector<typename AMat::col_view> streams;
    std::vector<typename SR::right_type> xvals;
    std::vector<std::size_t> ends;
    std::vector<Head> heap;
    for (std::size_t k = 0; k < x.nnz(); ++k) {
        auto col = a.column(static_cast<typename AMat::index_type>(x.idx[k]));
        auto lb = static_cast<std::size_t>(std::lower_bound(col.rows.begin(), col.rows.end(), r0) - col.rows.begin());
        auto ub = static_cast<std::size_t>(std::lower_bound(col.rows.begin(), col.rows.end(), r1) - col.rows.begin());
        if (lb == ub) continue;
        heap.push_back(Head{static_cast<IT>(col.rows[lb]), static_cast<std::uint32_t>(streams.size()),
                            static_cast<std::uint32_t>(lb)});
        streams.push_back(col);
        xvals.push_back(x.vals[k]);
        ends.push_back(ub);
    }
    std::make_heap(heap.begin(), heap.end(), greater);
    bool have = false;
    IT cur{};
    R acc{};
    while (!heap.empty()) {
        std::pop_heap(heap.begin(), heap.end(), greater);
        Head h = heap.back();
        heap.pop_back();
        const auto& st = streams[h.stream];
        R prod = sr.multiply(st.vals[h.pos], xvals[h.stream]);
        if (have && h.row == cur) {
            acc = sr.add(acc, prod);
        } else {
            if (have) {
                out_idx.push_back(cur);
                out_vals.push_back(acc);
            }
            cur = h.row;
            acc = prod;
            have = true;
        }
        if (h.pos + 1 < ends[h.stream]) {
            heap.push_back(Head{static_cast<IT>(st.rows[h.pos + 1]), h.stream, h.pos + 1});
            std::push_heap(heap.begin(), heap.end(), greater);
        }
    }
    if (have) {
        out_idx.push_back(cur);
        out_vals.push_back(acc);
    }
}

// Sparse accumulator over the thread's row band: dense value/flag arrays
// plus a touched-row list so reset cost follows the output, not the band.
template <class AMat, class SR, class IT, class R>
void spmspv_spa_range(const AMat& a, const LocalSparseVec<IT, typename SR::right_type>& x, const SR& sr,
                      IT r0, IT r1, std::vector<IT>& out_idx, std::vector<R>& out_vals) {
    const auto band = static_cast<std::size_t>(r1 - r0);
    std::vector<char> seen(band, 0);
    std::vector<R> acc(band);
    std::vector<IT> touched;
    for (std::size_t k = 0; k < x.nnz(); ++k) {
        auto col = a.column(static_cast<typename AMat::index_type>(x.idx[k]));
        auto lb = static_cast<std::size_t>(std::lower_bound(col.rows.begin(), col.rows.end(), r0) - col.rows.begin());
        auto ub = static_cast<std::size_t>(std::lower_bound(col.rows.begin(), col.rows.end(), r1) - col.rows.begin());
        for (std::size_t e = lb; e < ub; ++e) {
            const auto slot = static_cast<std::size_t>(col.rows[e] - r0);
            R prod = sr.multiply(col.vals[e], x.vals[k]);
            if (seen[slot]) {
                acc[slot] = sr.add(acc[slot], prod);
            } else {
                seen[slot] = 1;
                acc[slot] = prod;
                touched.push_back(static_cast<IT>(slot));
            }
        }
    }
    std::sort(touched.begin(), touched.end());
    for (IT slot : touched) {
        out_idx.push_back(static_cast<IT>(slot + r0));
        out_vals.push_back(acc[static_cast<std::size_t>(slot)]);
    }
}

} // namespace detail

/// y = A * x with a sparse input vector; output is sparse, sorted, and
/// restricted to structurally reached rows. heap and spa partition the rows
/// (each thread scans all of x); bucket partitions x's nonzeros and routes
/// products through row-blocked buckets before merging, so no thread
/// synchronizes on the output. All three produce identical results.
template <SparseColMatrix AMat, SemiringConcept SR, class IT>
    requires std::same_as<typename AMat::value_type, typename SR::left_type>
LocalSparseVec<IT, typename SR::result_type>
local_spmspv(const AMat& a, const LocalSparseVec<IT, typename SR::right_type>& x, const SR& sr,
             SpMSpVAlg alg = SpMSpVAlg::spa, int threads = 1) {
    using R = typename SR::result_type;
    if (static_cast<std::int64_t>(a.ncols()) != static_cast<std::int64_t>(x.n))
        throw DimError("spmspv: matrix has " + std::to_string(static_cast<long long>(a.ncols())) +
                       " columns, vector length is " + std::to_string(static_cast<long long>(x.n)));
    const auto m = static_cast<std::int64_t>(a.nrows());
    LocalSparseVec<IT, R> y;
    y.n = static_cast<IT>(m);
    if (x.nnz() == 0 || m == 0) return y;

    if (alg == SpMSpVAlg::heap || alg == SpMSpVAlg::spa) {
        auto bounds = even_ranges(m, threads);
        const int nchunks = static_cast<int>(bounds.size()) - 1;
        std::vector<std::vector<IT>> idx_parts(static_cast<std::size_t>(nchunks));
        std::vector<std::vector<R>> val_parts(static_cast<std::size_t>(nchunks));
        parallel_chunks(threads, nchunks, [&](int chunk) {
            const IT r0 = static_cast<IT>(bounds[chunk]);
            const IT r1 = static_cast<IT>(bounds[chunk + 1]);
            if (r0 == r1) return;
            if (alg == SpMSpVAlg::heap)
                detail::spmspv_heap_range(a, x, sr, r0, r1, idx_parts[static_cast<std::size_t>(chunk)],
                                          val_parts[static_cast<std::size_t>(chunk)]);
            else
                detail::spmspv_spa_range(a, x, sr, r0, r1, idx_parts[static_cast<std::size_t>(chunk)],
                                         val_parts[static_cast<std::size_t>(chunk)]);
        });
        for (int c = 0; c < nchunks; ++c) {
            y.idx.insert(y.idx.end(), idx_parts[static_cast<std::size_t>(c)].begin(),
                         idx_parts[static_cast<std::size_t>(c)].end());
            y.vals.insert(y.vals.end(), val_parts[static_cast<std::size_t>(c)].begin(),
                          val_parts[static_cast<std::size_t>(c)].end());
        }
        return y;
    }

    // bucket: phase 1 fans products out into 4t row-blocked buckets (one
    // private lane per (thread, bucket) pair), phase 2 merges each bucket
    // with a small accumulator. Contributions reach a row in ascending
    // x-index order no matter how many threads ran phase 1.
    const int nbuckets = 4 * std::max(threads, 1);
    auto bucket_bounds = even_ranges(m, nbuckets);
    const auto nnz_x = static_cast<std::int64_t>(x.nnz());
    auto x_bounds = balanced_ranges(nnz_x, threads, [&](std::int64_t k) {
        return static_cast<std::int64_t>(a.col_nnz(static_cast<typename AMat::index_type>(x.idx[static_cast<std::size_t>(k)])));
    });
    const int nchunks = static_cast<int>(x_bounds.size()) - 1;
    std::vector<std::vector<std::vector<std::pair<IT, R>>>> lanes(static_cast<std::size_t>(nchunks));
    parallel_chunks(threads, nchunks, [&](int chunk) {
        auto& mine = lanes[static_cast<std::size_t>(chunk)];
        mine.assign(static_cast<std::size_t>(nbuckets), {});
        for (std::int64_t k = x_bounds[chunk]; k < x_bounds[chunk + 1]; ++k) {
            auto col = a.column(static_cast<typename AMat::index_type>(x.idx[static_cast<std::size_t>(k)]));
            const auto xv = x.vals[static_cast<std::size_t>(k)];
            for (std::size_t e = 0; e < col.nnz(); ++e) {
                const auto row = static_cast<std::int64_t>(col.rows[e]);
                const auto b = static_cast<std::size_t>(
                    std::upper_bound(bucket_bounds.begin(), bucket_bounds.end(), row) - bucket_bounds.begin() - 1);
                mine[b].emplace_back(static_cast<IT>(row), sr.multiply(col.vals[e], xv));
            }
        }
    });
    std::vector<std::vector<IT>> idx_parts(static_cast<std::size_t>(nbuckets));
    std::vector<std::vector<R>> val_parts(static_cast<std::size_t>(nbuckets));
    parallel_chunks(threads, nbuckets, [&](int b) {
        const auto r0 = bucket_bounds[static_cast<std::size_t>(b)];
        const auto r1 = bucket_bounds[static_cast<std::size_t>(b) + 1];
        if (r0 == r1) return;
        const auto band = static_cast<std::size_t>(r1 - r0);
        std::vector<char> seen(band, 0);
        std::vector<R> acc(band);
        std::vector<IT> touched;
        for (int chunk = 0; chunk < nchunks; ++chunk) {
            for (const auto& [row, prod] : lanes[static_cast<std::size_t>(chunk)][static_cast<std::size_t>(b)]) {
                const auto slot = static_cast<std::size_t>(row - r0);
                if (seen[slot]) {
                    acc[slot] = sr.add(acc[slot], prod);
                } else {
                    seen[slot] = 1;
                    acc[slot] = prod;
                    touched.push_back(static_cast<IT>(slot));
                }
            }
        }
        std::sort(touched.begin(), touched.end());
        for (IT slot : touched) {
            idx_parts[static_cast<std::size_t>(b)].push_back(static_cast<IT>(slot + static_cast<IT>(r0)));
            val_parts[static_cast<std::size_t>(b)].push_back(acc[static_cast<std::size_t>(slot)]);
        }
    });
    for (int b = 0; b < nbuckets; ++b) {
        y.idx.insert(y.idx.end(), idx_parts[static_cast<std::size_t>(b)].begin(), idx_parts[static_cast<std::size_t>(b)].end());
        y.vals.insert(y.vals.end(), val_parts[static_cast<std::size_t>(b)].begin(), val_parts[static_cast<std::size_t>(b)].end());
    }
    return y;
}

template <SparseColMatrix AMat, class IT, class XV, class YV>
SpMSpVStats spmspv_stats(const AMat&, const LocalSparseVec<IT, XV>& x, const LocalSparseVec<IT, YV>& y, int threads) {
    SpMSpVStats s;
    s.input_density = x.density();
    s.output_density = y.density();
    s.threads = threads;
    return s;
}

} // namespace slap
