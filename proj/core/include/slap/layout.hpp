#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "slap/error.hpp"
#include "slap/grid.hpp"

namespace slap {

/// The superimposed vector distribution: a length-n vector splits into pr
/// row pieces of length floor(n/pr) (the last piece takes the remainder,
/// n - (pr-1)*floor(n/pr)); piece i is owned collectively by process row i
/// and splits again over the pc columns by the same rule, so P(i,j)
/// exclusively owns sub-piece (i,j). There is no replication.
struct VectorLayout {
    std::int64_t n = 0;
    int pr = 1;
    int pc = 1;

    std::int64_t piece_len(int i) const {
        const std::int64_t q = n / pr;
        return i < pr - 1 ? q : n - static_cast<std::int64_t>(pr - 1) * q;
    }
    std::int64_t piece_start(int i) const { return static_cast<std::int64_t>(i) * (n / pr); }

    std::int64_t sub_len(int i, int j) const {
        const std::int64_t len = piece_len(i);
        const std::int64_t q = len / pc;
        return j < pc - 1 ? q : len - static_cast<std::int64_t>(pc - 1) * q;
    }
    std::int64_t sub_start(int i, int j) const { return static_cast<std::int64_t>(j) * (piece_len(i) / pc); }

    /// Global start of sub-piece (i, j).
    std::int64_t global_start(int i, int j) const { return piece_start(i) + sub_start(i, j); }

    struct Owner {
        int row = 0;
        int col = 0;
        std::int64_t offset = 0; // within the owner's sub-piece
    };

    Owner owner(std::int64_t g) const {
        const std::int64_t q = n / pr;
        const int i = q > 0 ? static_cast<int>(std::min<std::int64_t>(g / q, pr - 1)) : pr - 1;
        const std::int64_t in_piece = g - piece_start(i);
        const std::int64_t qc = piece_len(i) / pc;
        const int j = qc > 0 ? static_cast<int>(std::min<std::int64_t>(in_piece / qc, pc - 1)) : pc - 1;
        return Owner{i, j, in_piece - sub_start(i, j)};
    }

    std::int64_t to_global(int i, int j, std::int64_t offset) const { return global_start(i, j) + offset; }
};

inline VectorLayout vector_layout(std::int64_t n, const Grid2D& g) { return VectorLayout{n, g.pr, g.pc}; }

/// Matrix blocks reuse the vector remainder rule along each dimension:
/// offsets[i] = i*floor(extent/parts), offsets[parts] = extent.
inline std::vector<std::int64_t> block_offsets(std::int64_t extent, int parts) {
    std::vector<std::int64_t> off(static_cast<std::size_t>(parts) + 1);
    const std::int64_t q = extent / parts;
    for (int i = 0; i < parts; ++i) off[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(i) * q;
    off[static_cast<std::size_t>(parts)] = extent;
    return off;
}

/// Index of the block of `offsets` containing g (offsets strictly cover
/// [offsets.front(), offsets.back())).
inline int block_of(const std::vector<std::int64_t>& offsets, std::int64_t g) {
    auto it = std::upper_bound(offsets.begin(), offsets.end(), g);
    return static_cast<int>(it - offsets.begin()) - 1;
}

} // namespace slap
