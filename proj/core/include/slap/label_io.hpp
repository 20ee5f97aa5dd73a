#pragma once

#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "slap/dist_matrix.hpp"

namespace slap {

/// Distributed map between arbitrary string labels and the consecutive ids
/// the reader assigned. `local_labels` is this rank's sub-piece of the
/// id -> label vector (standard vector layout over `count`); `lookup` maps
/// the labels this rank itself read to their ids.
struct LabelMap {
    Grid2D grid;
    GlobalIdx count = 0;
    std::vector<std::string> local_labels;
    std::unordered_map<std::string, GlobalIdx> lookup;
};

/// Assembles the whole id -> label vector on every rank (test support).
std::vector<std::string> gather_labels(const LabelMap& m);

struct LabeledReadResult {
    DistSparseMat2D<double> matrix;
    LabelMap rows;
    LabelMap cols;
};

/// Reader for the headerless label format: every line is
///   <row-label> <col-label> [numeric value]
/// with arbitrary string labels and value defaulting to 1. Two passes:
/// pass 1 hashes each label into [0, 2^63), routes (label, hash) to the
/// bucket owner floor(hash*P / 2^63), dedups per owner, assigns ids
/// consecutively in (hash, label) order with bases from an exclusive scan,
/// and sends the ids back. Pass 2 re-reads the file, maps labels to ids and
/// assembles the matrix. Row and column labels get independent id spaces;
/// the hash-randomized ids double as load balancing.
LabeledReadResult read_labeled_tuples(const std::string& path, const Grid2D& grid,
                                      const std::function<double(double, double)>& add);

LabeledReadResult read_labeled_tuples(const std::string& path, const Grid2D& grid);

/// Fixed-seed 63-bit label hash used for routing and id ordering.
std::uint64_t label_hash(std::string_view s);

} // namespace slap
