#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "slap/comm.hpp"
#include "slap/error.hpp"

namespace slap {

/// pr-by-pc process grid over a communicator: rank (i, j) = i*pc + j.
/// Row group P(i,:) and column group P(:,j) communicators come ready-made.
struct Grid2D {
    Comm comm;
    int pr = 1;
    int pc = 1;
    int myrow = 0;
    int mycol = 0;
    Comm row_comm; // my row, group rank = my column
    Comm col_comm; // my column, group rank = my row

    int size() const { return pr * pc; }
    int rank_of(int i, int j) const { return i * pc + j; }
    bool square() const { return pr == pc; }
};

/// Builds a grid over `grid_comm` where grid position (i,j) is played by
/// world rank ranks_rowmajor[i*pc + j].
Grid2D make_grid2d_from_ranks(const Comm& any_member, const std::vector<int>& ranks_rowmajor, int pr, int pc);

/// Standard grid over a whole communicator, row-major rank numbering.
Grid2D make_grid2d(const Comm& comm, int pr, int pc);

/// sqrt(p) x sqrt(p) grid; ShapeError when p is not a perfect square.
Grid2D make_square_grid2d(const Comm& comm);

enum class ConvertVariant { regular, supergrid };

inline ConvertVariant convert_variant_from_name(std::string_view s) {
    if (s == "regular") return ConvertVariant::regular;
    if (s == "supergrid") return ConvertVariant::supergrid;
    throw NameError("unknown conversion variant '" + std::string(s) + "'");
}

/// c layers of sqrt(p/c) x sqrt(p/c) grids plus fiber groups (the c ranks
/// sharing one layer coordinate). The variant records how world ranks were
/// assigned to 3D coordinates:
///   regular    -- layer l gets ranks {l*p/c, ..., (l+1)*p/c - 1}.
///   supergrid  -- the 2D grid is read as a q x q supergrid of sqrt(c) x
///                sqrt(c) subgrids; subgrid cell (a, b) of supergrid cell
///                (I, J) becomes layer a*sqrt(c)+b at coordinate (I, J), so
///                every fiber group lives inside one subgrid.
struct Grid3D {
    Comm comm;
    int nlayers = 1; // c
    int q = 1;       // layers are q x q
    ConvertVariant variant = ConvertVariant::regular;
    int mylayer = 0;
    Grid2D layer;    // this rank's layer as a 2D grid
    Comm fiber_comm; // group rank = layer index

    int size() const { return nlayers * q * q; }
    int myrow() const { return layer.myrow; }
    int mycol() const { return layer.mycol; }

    int rank_of(int l, int i, int j) const;
    std::array<int, 3> coords_of(int world_rank) const;
};

/// ShapeError when p/c is not a perfect square; supergrid additionally
/// requires c to be a perfect square with sqrt(c) dividing both dimensions
/// of the implied square 2D grid.
Grid3D make_grid3d(const Comm& comm, int c, ConvertVariant variant = ConvertVariant::regular);

/// Reassigns the ranks of a square 2D grid to 3D coordinates. The returned
/// grid's rank_of/coords_of expose the bijection.
Grid3D convert_grid_2d_to_3d(const Grid2D& g2, int c, ConvertVariant variant);

bool is_perfect_square(std::int64_t v);
std::int64_t isqrt_exact(std::int64_t v); // ShapeError if not a perfect square

} // namespace slap
