#pragma once

#include <string>

#include "slap/dist_matrix.hpp"

namespace slap {

// Binary matrix file layout (all fields little-endian):
//   bytes 0..3   magic "CB2B"
//   bytes 4..7   version, uint32, currently 1
//   bytes 8..31  nrows, ncols, nnz as int64
//   then nnz records of (row int64, col int64, value IEEE-754 double)
// An empty matrix is exactly 32 bytes. Entries are written rank by rank in
// each rank's column-major block order; values survive round trips
// bit-exactly.

inline constexpr char kBinaryMagic[4] = {'C', 'B', '2', 'B'};
inline constexpr std::uint32_t kBinaryVersion = 1;

void write_binary(const DistSparseMat2D<double>& a, const std::string& path);

/// Collective read: ranks read disjoint record ranges and route entries to
/// their owners. FormatError on magic/version mismatch or truncation.
DistSparseMat2D<double> read_binary(const std::string& path, const Grid2D& grid);

} // namespace slap
