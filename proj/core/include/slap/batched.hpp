#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "slap/summa.hpp"

namespace slap {

/// Column batching for products whose output would not fit in memory all
/// at once: batch r computes A * B(:, range_r) and hands it to a consumer,
/// so concatenating the batch outputs reproduces the unbatched product.
struct BatchPlan {
    std::vector<std::pair<GlobalIdx, GlobalIdx>> col_ranges; // [start, end)
    std::vector<std::int64_t> est_entries;                   // symbolic output nnz per batch

    int batches() const { return static_cast<int>(col_ranges.size()); }
};

/// Bytes charged per output entry when fitting batches under a budget
/// (value plus index storage).
inline constexpr std::int64_t kBatchEntryBytes = 16;

/// b equal-width column ranges (no symbolic pass).
inline BatchPlan plan_batches_by_count(GlobalIdx ncols, int b) {
    if (b < 1) throw ShapeError("batch count must be >= 1");
    BatchPlan plan;
    const GlobalIdx q = ncols / b;
    const GlobalIdx r = ncols % b;
    GlobalIdx s = 0;
    for (int i = 0; i < b; ++i) {
        const GlobalIdx w = q + (i < r ? 1 : 0);
        plan.col_ranges.emplace_back(s, s + w);
        plan.est_entries.push_back(0);
        s += w;
    }
    return plan;
}

/// Column slice B(:, [s, e)) kept on the same grid: column blocks are the
/// clipped originals, so no entry moves between ranks.
template <class VT>
DistSparseMat2D<VT> slice_cols(const DistSparseMat2D<VT>& b, GlobalIdx s, GlobalIdx e) {
    DistSparseMat2D<VT> out;
    out.grid = b.grid;
    out.nrows = b.nrows;
    out.ncols = e - s;
    out.row_offsets = b.row_offsets;
    out.col_offsets.resize(b.col_offsets.size());
    for (std::size_t i = 0; i < b.col_offsets.size(); ++i)
        out.col_offsets[i] = std::min(std::max(b.col_offsets[i], s), e) - s;
    Triples<LocalIdx, VT> t;
    t.nrows = detail::narrow_dim(out.row_end() - out.row_start(), "row");
    t.ncols = detail::narrow_dim(out.col_end() - out.col_start(), "col");
    const GlobalIdx old_cs = b.col_start();
    const GlobalIdx new_base = s + out.col_start();
    b.local.for_each_col([&](ColView<LocalIdx, VT> cv) {
        const GlobalIdx gc = old_cs + cv.col;
        if (gc < s || gc >= e) return;
        for (std::size_t k = 0; k < cv.nnz(); ++k)
            t.push_back(cv.rows[k], static_cast<LocalIdx>(gc - new_base), cv.vals[k]);
    });
    out.local = build_dcsc(t, [](const VT& x, const VT&) { return x; });
    return out;
}

/// Exact per-output-column nonzero counts of A*B, computed by a
/// pattern-only (boolean) SUMMA pass; every rank returns the full vector.
template <class VT1, class VT2>
std::vector<std::int64_t> dist_symbolic_col_nnz(const DistSparseMat2D<VT1>& a, const DistSparseMat2D<VT2>& b,
                                                int threads = 1) {
    DistSparseMat2D<std::uint8_t> ap;
    ap.grid = a.grid;
    ap.nrows = a.nrows;
    ap.ncols = a.ncols;
    ap.row_offsets = a.row_offsets;
    ap.col_offsets = a.col_offsets;
    {
        Triples<LocalIdx, std::uint8_t> t;
        t.nrows = a.local.nrows();
        t.ncols = a.local.ncols();
        a.local.for_each_col([&](ColView<LocalIdx, VT1> cv) {
            for (std::size_t k = 0; k < cv.nnz(); ++k) t.push_back(cv.rows[k], cv.col, 1);
        });
        ap.local = build_dcsc(t, [](std::uint8_t x, std::uint8_t) { return x; });
    }
    DistSparseMat2D<std::uint8_t> bp;
    bp.grid = b.grid;
    bp.nrows = b.nrows;
    bp.ncols = b.ncols;
    bp.row_offsets = b.row_offsets;
    bp.col_offsets = b.col_offsets;
    {
        Triples<LocalIdx, std::uint8_t> t;
        t.nrows = b.local.nrows();
        t.ncols = b.local.ncols();
        b.local.for_each_col([&](ColView<LocalIdx, VT2> cv) {
            for (std::size_t k = 0; k < cv.nnz(); ++k) t.push_back(cv.rows[k], cv.col, 1);
        });
        bp.local = build_dcsc(t, [](std::uint8_t x, std::uint8_t) { return x; });
    }
    auto c_pat = summa2d_spgemm(ap, bp, OrAnd{}, SpGemmAlg::hash, threads);

    std::vector<std::int64_t> local_counts(static_cast<std::size_t>(c_pat.local_cols()), 0);
    c_pat.local.for_each_col([&](ColView<LocalIdx, std::uint8_t> cv) {
        local_counts[static_cast<std::size_t>(cv.col)] = static_cast<std::int64_t>(cv.nnz());
    });
    Comm col = a.grid.col_comm;
    auto reduced = col.allreduce_vec(local_counts, [](std::int64_t x, std::int64_t y) { return x + y; });
    Comm row = a.grid.row_comm;
    auto blocks = row.allgatherv(reduced);
    std::vector<std::int64_t> full;
    full.reserve(static_cast<std::size_t>(b.ncols));
    for (auto& part : blocks) full.insert(full.end(), part.begin(), part.end());
    return full;
}

/// Chooses the fewest contiguous ranges whose estimated output
/// (entries * kBatchEntryBytes) fits the budget. BudgetError when a single
/// column already exceeds it.
template <class VT1, class VT2>
BatchPlan plan_batches_by_budget(const DistSparseMat2D<VT1>& a, const DistSparseMat2D<VT2>& b,
                                 std::int64_t budget_bytes, int threads = 1) {
    if (budget_bytes <= 0) throw BudgetError("memory budget must be positive");
    auto counts = dist_symbolic_col_nnz(a, b, threads);
    const std::int64_t per_entry = kBatchEntryBytes;
    BatchPlan plan;
    GlobalIdx start = 0;
    std::int64_t cur = 0;
    for (GlobalIdx j = 0; j < static_cast<GlobalIdx>(counts.size()); ++j) {
        const std::int64_t cost = counts[static_cast<std::size_t>(j)] * per_entry;
        if (cost > budget_bytes)
            throw BudgetError("output column " + std::to_string(static_cast<long long>(j)) + " alone needs " +
                              std::to_string(static_cast<long long>(cost)) + " bytes, budget is " +
                              std::to_string(static_cast<long long>(budget_bytes)));
        if (cur + cost > budget_bytes) {
            plan.col_ranges.emplace_back(start, j);
            plan.est_entries.push_back(cur / per_entry);
            start = j;
            cur = 0;
        }
        cur += cost;
    }
    plan.col_ranges.emplace_back(start, static_cast<GlobalIdx>(counts.size()));
    plan.est_entries.push_back(cur / per_entry);
    return plan;
}

/// Runs A * B(:, range_r) per batch in range order, invoking the consumer
/// once per batch with (batch index, column range, column-slab product).
/// Batch outputs concatenate to the unbatched product.
template <class VT1, class VT2, SemiringConcept SR, class Consumer>
    requires std::same_as<VT1, typename SR::left_type> && std::same_as<VT2, typename SR::right_type>
void batched_spgemm(const DistSparseMat2D<VT1>& a, const DistSparseMat2D<VT2>& b, const BatchPlan& plan,
                    const SR& sr, SpGemmAlg alg, int threads, Consumer&& consumer) {
    if (plan.batches() < 1) throw ShapeError("batch plan is empty");
    GlobalIdx expect = 0;
    for (const auto& [s, e] : plan.col_ranges) {
        if (s != expect || e < s) throw ShapeError("batch ranges must partition B's columns in order");
        expect = e;
    }
    if (expect != b.ncols) throw ShapeError("batch ranges must cover all columns of B");
    for (int r = 0; r < plan.batches(); ++r) {
        const auto [s, e] = plan.col_ranges[static_cast<std::size_t>(r)];
        auto br = slice_cols(b, s, e);
        auto cr = summa2d_spgemm(a, br, sr, alg, threads);
        consumer(r, s, e, cr);
    }
}

} // namespace slap
