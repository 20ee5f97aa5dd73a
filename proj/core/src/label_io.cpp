#include "slap/label_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <set>

#include "slap/mm_io.hpp"
#include "slap/rng.hpp"

namespace slap {

std::uint64_t label_hash(std::string_view s) {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL; // fixed seed keeps runs reproducible
    for (unsigned char c : s) h = Rng::mix(h ^ c);
    return h & ((1ULL << 63) - 1);
}

namespace {

constexpr std::uint64_t kHashRange = 1ULL << 63;

int bucket_owner(std::uint64_t h, int p) {
    return static_cast<int>((static_cast<unsigned __int128>(h) * static_cast<unsigned __int128>(p)) / kHashRange);
}

void pack_string(std::vector<char>& buf, std::string_view s) {
    auto len = static_cast<std::uint32_t>(s.size());
    buf.insert(buf.end(), reinterpret_cast<const char*>(&len), reinterpret_cast<const char*>(&len) + sizeof len);
    buf.insert(buf.end(), s.begin(), s.end());
}

std::vector<std::string> unpack_strings(const std::vector<char>& buf) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos + sizeof(std::uint32_t) <= buf.size()) {
        std::uint32_t len;
        std::memcpy(&len, buf.data() + pos, sizeof len);
        pos += sizeof len;
        out.emplace_back(buf.data() + pos, len);
        pos += len;
    }
    return out;
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> toks;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
        if (j > i) toks.push_back(line.substr(i, j - i));
        i = j;
    }
    return toks;
}

/// One relabeling pass for one label dimension: returns this rank's
/// label -> id map (covering exactly the labels it passed in), the global
/// id count, and this rank's piece of the id -> label vector.
LabelMap relabel(const std::vector<std::string>& my_labels, const Grid2D& grid) {
    Comm comm = grid.comm;
    const int p = comm.size();

    // route (label, hash) to bucket owners; dedup locally first to keep
    // traffic near O(nnz/P)
    std::vector<std::string> uniq = my_labels;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());

    std::vector<std::vector<char>> req(static_cast<std::size_t>(p));
    for (const auto& s : uniq) pack_string(req[static_cast<std::size_t>(bucket_owner(label_hash(s), p))], s);
    auto got = comm.alltoallv(req, PayloadTag::label_data);

    // owner side: dedup on the label itself (hash only routes and orders),
    // order ids by (hash, label)
    std::vector<std::vector<std::string>> requests(static_cast<std::size_t>(p));
    std::set<std::pair<std::uint64_t, std::string>> dedup;
    for (int src = 0; src < p; ++src) {
        requests[static_cast<std::size_t>(src)] = unpack_strings(got[static_cast<std::size_t>(src)]);
        for (const auto& s : requests[static_cast<std::size_t>(src)]) dedup.emplace(label_hash(s), s);
    }
    const auto my_set_size = static_cast<std::int64_t>(dedup.size());
    const auto base = comm.exscan<std::int64_t>(my_set_size, [](std::int64_t a, std::int64_t b) { return a + b; }, 0);
    const auto total = comm.allreduce<std::int64_t>(my_set_size, [](std::int64_t a, std::int64_t b) { return a + b; }, 0);

    std::unordered_map<std::string, GlobalIdx> assigned;
    assigned.reserve(dedup.size());
    {
        GlobalIdx id = base;
        for (const auto& [h, s] : dedup) assigned.emplace(s, id++);
    }

    // answer every request in the order it arrived
    std::vector<std::vector<GlobalIdx>> replies(static_cast<std::size_t>(p));
    for (int src = 0; src < p; ++src) {
        replies[static_cast<std::size_t>(src)].reserve(requests[static_cast<std::size_t>(src)].size());
        for (const auto& s : requests[static_cast<std::size_t>(src)])
            replies[static_cast<std::size_t>(src)].push_back(assigned.at(s));
    }
    auto answers = comm.alltoallv(replies, PayloadTag::label_data);

    LabelMap m;
    m.grid = grid;
    m.count = total;
    {
        std::vector<std::size_t> next(static_cast<std::size_t>(p), 0);
        for (const auto& s : uniq) {
            const auto o = static_cast<std::size_t>(bucket_owner(label_hash(s), p));
            m.lookup.emplace(s, answers[o][next[o]++]);
        }
    }

    // build the distributed id -> label vector: owners route each (id,
    // label) to the rank holding that id's slot in the vector layout
    auto lay = vector_layout(total, grid);
    std::vector<std::vector<char>> label_out(static_cast<std::size_t>(p));
    std::vector<std::vector<std::int64_t>> offset_out(static_cast<std::size_t>(p));
    for (const auto& [s, id] : assigned) {
        auto o = lay.owner(id);
        const auto dest = static_cast<std::size_t>(grid.rank_of(o.row, o.col));
        pack_string(label_out[dest], s);
        offset_out[dest].push_back(o.offset);
    }
    auto labels_in = comm.alltoallv(label_out, PayloadTag::label_data);
    auto offsets_in = comm.alltoallv(offset_out, PayloadTag::label_data);
    m.local_labels.assign(static_cast<std::size_t>(lay.sub_len(grid.myrow, grid.mycol)), {});
    for (int src = 0; src < p; ++src) {
        auto strs = unpack_strings(labels_in[static_cast<std::size_t>(src)]);
        const auto& offs = offsets_in[static_cast<std::size_t>(src)];
        for (std::size_t i = 0; i < strs.size(); ++i)
            m.local_labels[static_cast<std::size_t>(offs[i])] = std::move(strs[i]);
    }
    return m;
}

} // namespace

std::vector<std::string> gather_labels(const LabelMap& m) {
    Comm comm = m.grid.comm;
    std::vector<char> packed;
    for (const auto& s : m.local_labels) pack_string(packed, s);
    auto parts = comm.allgatherv(packed, PayloadTag::label_data);
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(m.count));
    for (auto& part : parts) {
        auto strs = unpack_strings(part);
        out.insert(out.end(), std::make_move_iterator(strs.begin()), std::make_move_iterator(strs.end()));
    }
    return out;
}

LabeledReadResult read_labeled_tuples(const std::string& path, const Grid2D& grid,
                                      const std::function<double(double, double)>& add) {
    Comm comm = grid.comm;
    const int p = comm.size();
    const int me = comm.rank();
    const std::int64_t size = detail::file_size_or_throw(path);
    const std::int64_t lo = size * me / p;
    const std::int64_t hi = size * (me + 1) / p;

    // pass 1: collect labels
    std::vector<std::string> row_labels, col_labels;
    detail::for_lines_in_range(path, lo, hi, 0, [&](std::string_view line) {
        auto toks = split_ws(line);
        if (toks.empty()) return;
        if (toks.size() < 2)
            throw FormatError("label line needs at least two tokens: '" + std::string(line) + "'");
        if (toks.size() > 3) throw FormatError("label line has too many tokens: '" + std::string(line) + "'");
        row_labels.emplace_back(toks[0]);
        col_labels.emplace_back(toks[1]);
        if (toks.size() == 3) (void)0; // value syntax is checked in pass 2
    });

    LabelMap rows = relabel(row_labels, grid);
    LabelMap cols = relabel(col_labels, grid);

    // pass 2: re-read from storage (memory-frugal path) and assemble
    Triples<GlobalIdx, double> mine;
    mine.nrows = rows.count;
    mine.ncols = cols.count;
    detail::for_lines_in_range(path, lo, hi, 0, [&](std::string_view line) {
        auto toks = split_ws(line);
        if (toks.empty()) return;
        double v = 1.0;
        if (toks.size() == 3) {
            auto res = std::from_chars(toks[2].data(), toks[2].data() + toks[2].size(), v);
            if (res.ec != std::errc{} || res.ptr != toks[2].data() + toks[2].size())
                throw FormatError("bad numeric token '" + std::string(toks[2]) + "'");
        }
        mine.push_back(rows.lookup.at(std::string(toks[0])), cols.lookup.at(std::string(toks[1])), v);
    });

    LabeledReadResult res{distribute_triples(mine, grid, rows.count, cols.count, add), std::move(rows),
                          std::move(cols)};
    return res;
}

LabeledReadResult read_labeled_tuples(const std::string& path, const Grid2D& grid) {
    return read_labeled_tuples(path, grid, [](double a, double b) { return a + b; });
}

} // namespace slap
