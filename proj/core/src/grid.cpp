#include "slap/grid.hpp"

#include <cmath>

namespace slap {

bool is_perfect_square(std::int64_t v) {
    if (v < 0) return false;
    auto r = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(v))));
    for (std::int64_t c = r - 1; c <= r + 1; ++c)
        if (c >= 0 && c * c == v) return true;
    return false;
}

std::int64_t isqrt_exact(std::int64_t v) {
    auto r = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(v))));
    for (std::int64_t c = r - 1; c <= r + 1; ++c)
        if (c >= 0 && c * c == v) return c;
    throw ShapeError(std::to_string(static_cast<long long>(v)) + " is not a perfect square");
}

Grid2D make_grid2d_from_ranks(const Comm& any_member, const std::vector<int>& ranks_rowmajor, int pr, int pc) {
    if (pr < 1 || pc < 1 || static_cast<std::size_t>(pr) * static_cast<std::size_t>(pc) != ranks_rowmajor.size())
        throw ShapeError("grid " + std::to_string(pr) + "x" + std::to_string(pc) + " does not cover " +
                         std::to_string(ranks_rowmajor.size()) + " ranks");
    Grid2D g;
    g.pr = pr;
    g.pc = pc;
    g.comm = any_member.subgroup(ranks_rowmajor, GroupLabel::other);
    const int me = g.comm.rank();
    g.myrow = me / pc;
    g.mycol = me % pc;
    std::vector<int> row(static_cast<std::size_t>(pc));
    for (int j = 0; j < pc; ++j) row[static_cast<std::size_t>(j)] = ranks_rowmajor[static_cast<std::size_t>(g.myrow * pc + j)];
    std::vector<int> col(static_cast<std::size_t>(pr));
    for (int i = 0; i < pr; ++i) col[static_cast<std::size_t>(i)] = ranks_rowmajor[static_cast<std::size_t>(i * pc + g.mycol)];
    g.row_comm = any_member.subgroup(row, GroupLabel::grid_row);
    g.col_comm = any_member.subgroup(col, GroupLabel::grid_col);
    return g;
}

Grid2D make_grid2d(const Comm& comm, int pr, int pc) {
    if (pr < 1 || pc < 1 || pr * pc != comm.size())
        throw ShapeError("grid " + std::to_string(pr) + "x" + std::to_string(pc) + " incompatible with " +
                         std::to_string(comm.size()) + " ranks");
    std::vector<int> ranks(static_cast<std::size_t>(comm.size()));
    for (int r = 0; r < comm.size(); ++r) ranks[static_cast<std::size_t>(r)] = comm.world_rank_of(r);
    return make_grid2d_from_ranks(comm, ranks, pr, pc);
}

Grid2D make_square_grid2d(const Comm& comm) {
    auto s = isqrt_exact(comm.size());
    return make_grid2d(comm, static_cast<int>(s), static_cast<int>(s));
}

int Grid3D::rank_of(int l, int i, int j) const {
    if (variant == ConvertVariant::regular) return l * q * q + i * q + j;
    const int sc = static_cast<int>(isqrt_exact(nlayers));
    const int side = q * sc;
    const int a = l / sc;
    const int b = l % sc;
    return (i * sc + a) * side + (j * sc + b);
}

std::array<int, 3> Grid3D::coords_of(int world_rank) const {
    if (variant == ConvertVariant::regular) {
        const int per_layer = q * q;
        const int l = world_rank / per_layer;
        const int rem = world_rank % per_layer;
        return {l, rem / q, rem % q};
    }
    const int sc = static_cast<int>(isqrt_exact(nlayers));
    const int side = q * sc;
    const int r2 = world_rank / side;
    const int c2 = world_rank % side;
    return {(r2 % sc) * sc + (c2 % sc), r2 / sc, c2 / sc};
}

Grid3D make_grid3d(const Comm& comm, int c, ConvertVariant variant) {
    const int p = comm.size();
    if (c < 1 || p % c != 0)
        throw ShapeError("cannot split " + std::to_string(p) + " ranks into " + std::to_string(c) + " layers");
    if (!is_perfect_square(p / c))
        throw ShapeError("p/c = " + std::to_string(p / c) + " is not a perfect square");
    Grid3D g;
    g.comm = comm;
    g.nlayers = c;
    g.q = static_cast<int>(isqrt_exact(p / c));
    g.variant = variant;
    if (variant == ConvertVariant::supergrid) {
        if (!is_perfect_square(c)) throw ShapeError("supergrid conversion needs a perfect-square layer count");
        const auto sc = isqrt_exact(c);
        if (!is_perfect_square(p)) throw ShapeError("supergrid conversion needs a square process grid");
        const auto side = isqrt_exact(p);
        if (side % sc != 0)
            throw ShapeError("sqrt(c) = " + std::to_string(static_cast<long long>(sc)) +
                             " must divide the grid dimension " + std::to_string(static_cast<long long>(side)));
    }
    const auto my = g.coords_of(comm.rank());
    g.mylayer = my[0];

    // rank_of yields group ranks of `comm`; subgroups are keyed by world rank
    std::vector<int> layer_ranks(static_cast<std::size_t>(g.q) * static_cast<std::size_t>(g.q));
    for (int i = 0; i < g.q; ++i)
        for (int j = 0; j < g.q; ++j)
            layer_ranks[static_cast<std::size_t>(i * g.q + j)] = comm.world_rank_of(g.rank_of(g.mylayer, i, j));
    g.layer = make_grid2d_from_ranks(comm, layer_ranks, g.q, g.q);

    std::vector<int> fiber(static_cast<std::size_t>(c));
    for (int l = 0; l < c; ++l) fiber[static_cast<std::size_t>(l)] = comm.world_rank_of(g.rank_of(l, my[1], my[2]));
    g.fiber_comm = comm.subgroup(fiber, GroupLabel::fiber);
    return g;
}

Grid3D convert_grid_2d_to_3d(const Grid2D& g2, int c, ConvertVariant variant) {
    if (variant == ConvertVariant::supergrid && !g2.square())
        throw ShapeError("supergrid conversion needs a square 2D grid");
    return make_grid3d(g2.comm, c, variant);
}

} // namespace slap
