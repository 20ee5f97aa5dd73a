#pragma once

#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace slap {

/// Runs f(chunk_index) for chunk_index in [0, nchunks), fanning out over up
/// to `threads` std::threads and joining before returning. Chunk 0 runs on
/// the calling thread. Exceptions are rethrown on the caller (first chunk
/// index wins).
template <class F>
void parallel_chunks(int threads, int nchunks, F&& f) {
    if (threads < 1) threads = 1;
    if (nchunks <= 0) return;
    if (threads == 1 || nchunks == 1) {
        for (int c = 0; c < nchunks; ++c) f(c);
        return;
    }
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(nchunks));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nchunks - 1));
    auto run = [&](int c) {
        try {
            f(c);
        } catch (...) {
            errs[static_cast<std::size_t>(c)] = std::current_exception();
        }
    };
    for (int c = 1; c < nchunks; ++c) pool.emplace_back(run, c);
    run(0);
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

/// Balanced split of [0, n) into at most `parts` contiguous ranges weighted
/// by `weight(i)`: prefix sums split at equal quantiles. Returns boundary
/// offsets (size parts+1). Ranges may be empty when work is concentrated.
template <class W>
std::vector<std::int64_t> balanced_ranges(std::int64_t n, int parts, W&& weight) {
    if (parts < 1) parts = 1;
    std::vector<std::int64_t> prefix(static_cast<std::size_t>(n) + 1, 0);
    for (std::int64_t i = 0; i < n; ++i)
        prefix[static_cast<std::size_t>(i) + 1] = prefix[static_cast<std::size_t>(i)] + weight(i);
    const std::int64_t total = prefix.back();
    std::vector<std::int64_t> bounds(static_cast<std::size_t>(parts) + 1, 0);
    bounds[static_cast<std::size_t>(parts)] = n;
    std::int64_t pos = 0;
    for (int p = 1; p < parts; ++p) {
        const std::int64_t target = (total * p) / parts;
        while (pos < n && prefix[static_cast<std::size_t>(pos)] < target) ++pos;
        bounds[static_cast<std::size_t>(p)] = pos;
    }
    return bounds;
}

/// Even split of [0, n) into `parts` contiguous ranges (remainder spread
/// one-per-range from the front).
inline std::vector<std::int64_t> even_ranges(std::int64_t n, int parts) {
    if (parts < 1) parts = 1;
    std::vector<std::int64_t> bounds(static_cast<std::size_t>(parts) + 1, 0);
    const std::int64_t q = n / parts;
    const std::int64_t r = n % parts;
    for (int p = 0; p < parts; ++p)
        bounds[static_cast<std::size_t>(p) + 1] = bounds[static_cast<std::size_t>(p)] + q + (p < r ? 1 : 0);
    return bounds;
}

} // namespace slap
