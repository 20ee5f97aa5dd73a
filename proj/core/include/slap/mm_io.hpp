#pragma once

#include <functional>
#include <string>

#include "slap/dist_matrix.hpp"

namespace slap {

/// Collective parallel reader for Matrix Market coordinate files. Every
/// rank parses its own byte range [size*i/P, size*(i+1)/P): a rank owning
/// a line's first byte parses the whole line, ranks landing mid-line skip
/// forward to the next one, and rank 0 handles the header and size line.
/// 1-based indices become 0-based, symmetric inputs expand off-diagonal
/// entries to both triangles, pattern values become 1. Duplicate
/// coordinates combine with `add`.
DistSparseMat2D<double> read_matrix_market(const std::string& path, const Grid2D& grid,
                                           const std::function<double(double, double)>& add);

DistSparseMat2D<double> read_matrix_market(const std::string& path, const Grid2D& grid);

/// Collective writer: rank 0 writes the header, byte offsets come from an
/// exclusive scan of the per-rank body sizes, and every rank writes its own
/// entries (1-based, column-major block order) at its offset. Values print
/// with round-trip-safe precision.
void write_matrix_market(const DistSparseMat2D<double>& a, const std::string& path);

namespace detail {

/// Calls fn(line) for every line whose first byte lies in [lo, hi) and at
/// or after data_start. Lines may extend beyond hi; trailing '\r' is
/// stripped.
void for_lines_in_range(const std::string& path, std::int64_t lo, std::int64_t hi, std::int64_t data_start,
                        const std::function<void(std::string_view)>& fn);

std::int64_t file_size_or_throw(const std::string& path);

} // namespace detail

} // namespace slap
