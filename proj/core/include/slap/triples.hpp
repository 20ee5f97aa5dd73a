#pragma once

#include <cstdint>
#include <vector>

#include "slap/error.hpp"

namespace slap {

/// Coordinate-form entry list. The interchange format between builders,
/// the distributed layer, and I/O. Entries may repeat and appear in any
/// order; builders combine duplicates.
template <class IT, class VT>
struct Triples {
    using index_type = IT;
    using value_type = VT;

    IT nrows = 0;
    IT ncols = 0;
    std::vector<IT> rows;
    std::vector<IT> cols;
    std::vector<VT> vals;

    std::size_t size() const { return vals.size(); }

    void push_back(IT r, IT c, VT v) {
        rows.push_back(r);
        cols.push_back(c);
        vals.push_back(v);
    }

    void check_bounds() const {
        for (std::size_t k = 0; k < size(); ++k) {
            if (rows[k] < 0 || rows[k] >= nrows || cols[k] < 0 || cols[k] >= ncols)
                throw IndexError("triple (" + std::to_string(static_cast<long long>(rows[k])) + "," +
                                 std::to_string(static_cast<long long>(cols[k])) + ") outside " +
                                 std::to_string(static_cast<long long>(nrows)) + "x" +
                                 std::to_string(static_cast<long long>(ncols)));
        }
    }
};

} // namespace slap
