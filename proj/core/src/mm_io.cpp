#include "slap/mm_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace slap {

namespace detail {

std::int64_t file_size_or_throw(const std::string& path) {
    std::error_code ec;
    auto sz = std::filesystem::file_size(path, ec);
    if (ec) throw IoError("cannot stat '" + path + "': " + ec.message());
    return static_cast<std::int64_t>(sz);
}

void for_lines_in_range(const std::string& path, std::int64_t lo, std::int64_t hi, std::int64_t data_start,
                        const std::function<void(std::string_view)>& fn) {
    if (lo >= hi) return;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");

    std::int64_t pos = lo;
    if (pos < data_start) {
        if (data_start >= hi) return; // my whole range is header territory
        pos = data_start;             // data always begins exactly at data_start
    } else if (pos > 0) {
        // a line is mine only if its first byte is; if byte pos-1 is not a
        // newline we are mid-line and that line belongs to a predecessor
        in.seekg(pos - 1);
        int prev = in.get();
        if (prev != '\n') {
            std::string skipped;
            if (!std::getline(in, skipped)) return;
            pos = pos - 1 + 1 + static_cast<std::int64_t>(skipped.size()) + 1;
        }
    }
    in.seekg(pos);
    std::string line;
    while (pos < hi && std::getline(in, line)) {
        const auto consumed = static_cast<std::int64_t>(line.size()) + 1; // getline ate the '\n' (or EOF)
        if (!line.empty() && line.back() == '\r') line.pop_back();
        fn(line);
        pos += consumed;
    }
}

namespace {

struct MmHeader {
    GlobalIdx nrows = 0;
    GlobalIdx ncols = 0;
    std::int64_t declared_nnz = 0;
    std::int64_t data_start = 0; // byte offset of the first entry line
    int field = 0;               // 0 real, 1 integer, 2 pattern
    int symmetric = 0;
};

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

MmHeader parse_header(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string line;
    std::int64_t pos = 0;
    if (!std::getline(in, line)) throw FormatError("empty file '" + path + "'");
    pos += static_cast<std::int64_t>(line.size()) + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::istringstream hs(line);
    std::string banner, object, format, field, sym;
    hs >> banner >> object >> format >> field >> sym;
    if (banner != "%%MatrixMarket" || lower(object) != "matrix" || lower(format) != "coordinate")
        throw FormatError("not a MatrixMarket coordinate file: '" + line + "'");
    MmHeader h;
    const std::string f = lower(field);
    if (f == "real")
        h.field = 0;
    else if (f == "integer")
        h.field = 1;
    else if (f == "pattern")
        h.field = 2;
    else
        throw FormatError("unsupported value field '" + field + "'");
    const std::string s = lower(sym);
    if (s == "general")
        h.symmetric = 0;
    else if (s == "symmetric")
        h.symmetric = 1;
    else
        throw FormatError("unsupported symmetry '" + sym + "' (skew-symmetric/hermitian are rejected)");

    // size line: first non-comment line after the banner
    for (;;) {
        if (!std::getline(in, line)) throw FormatError("missing size line in '" + path + "'");
        pos += static_cast<std::int64_t>(line.size()) + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '%') continue;
        std::istringstream ss(line);
        if (!(ss >> h.nrows >> h.ncols >> h.declared_nnz))
            throw FormatError("malformed size line '" + line + "'");
        std::string extra;
        if (ss >> extra) throw FormatError("trailing tokens on size line '" + line + "'");
        break;
    }
    h.data_start = pos;
    return h;
}

double parse_value_token(std::string_view tok) {
    // from_chars for doubles handles inf/nan and scientific notation
    double v = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        throw FormatError("bad numeric token '" + std::string(tok) + "'");
    return v;
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

} // namespace

} // namespace detail

DistSparseMat2D<double> read_matrix_market(const std::string& path, const Grid2D& grid,
                                           const std::function<double(double, double)>& add) {
    Comm comm = grid.comm;
    const int p = comm.size();
    const int me = comm.rank();

    // rank 0 owns the header; everyone learns it through a broadcast
    std::vector<detail::MmHeader> hdr;
    if (me == 0) hdr.push_back(detail::parse_header(path));
    hdr = comm.broadcast(0, hdr);
    const detail::MmHeader h = hdr.at(0);
    const std::int64_t size = detail::file_size_or_throw(path);

    Triples<GlobalIdx, double> mine;
    mine.nrows = h.nrows;
    mine.ncols = h.ncols;
    std::int64_t lines = 0;
    const std::int64_t lo = size * me / p;
    const std::int64_t hi = size * (me + 1) / p;
    detail::for_lines_in_range(path, lo, hi, h.data_start, [&](std::string_view line) {
        auto toks = detail::split_ws(line);
        if (toks.empty()) return;
        if (toks[0][0] == '%') throw FormatError("comment after the size line");
        const std::size_t want = h.field == 2 ? 2 : 3;
        if (toks.size() != want)
            throw FormatError("entry line has " + std::to_string(toks.size()) + " tokens, expected " +
                              std::to_string(want));
        GlobalIdx r = 0, c = 0;
        auto pr = std::from_chars(toks[0].data(), toks[0].data() + toks[0].size(), r);
        auto pc = std::from_chars(toks[1].data(), toks[1].data() + toks[1].size(), c);
        if (pr.ec != std::errc{} || pc.ec != std::errc{}) throw FormatError("bad index token");
        const double v = h.field == 2 ? 1.0 : detail::parse_value_token(toks[2]);
        r -= 1;
        c -= 1;
        if (r < 0 || r >= h.nrows || c < 0 || c >= h.ncols)
            throw IndexError("entry (" + std::to_string(static_cast<long long>(r + 1)) + "," +
                             std::to_string(static_cast<long long>(c + 1)) + ") outside declared " +
                             std::to_string(static_cast<long long>(h.nrows)) + "x" +
                             std::to_string(static_cast<long long>(h.ncols)));
        ++lines;
        mine.push_back(r, c, v);
        if (h.symmetric && r != c) mine.push_back(c, r, v);
    });

    const auto total = comm.allreduce<std::int64_t>(lines, [](std::int64_t a, std::int64_t b) { return a + b; }, 0);
    if (total != h.declared_nnz)
        throw FormatError("file declares " + std::to_string(static_cast<long long>(h.declared_nnz)) +
                          " entries but " + std::to_string(static_cast<long long>(total)) + " were parsed");

    return distribute_triples(mine, grid, h.nrows, h.ncols, add);
}

DistSparseMat2D<double> read_matrix_market(const std::string& path, const Grid2D& grid) {
    return read_matrix_market(path, grid, [](double a, double b) { return a + b; });
}

void write_matrix_market(const DistSparseMat2D<double>& a, const std::string& path) {
    Comm comm = a.grid.comm;
    const auto nnz = dist_nnz(a);

    std::string body;
    {
        char buf[96];
        const auto rs = a.row_start();
        const auto cs = a.col_start();
        a.local.for_each_col([&](ColView<LocalIdx, double> cv) {
            for (std::size_t k = 0; k < cv.nnz(); ++k) {
                std::snprintf(buf, sizeof buf, "%lld %lld %.17g\n",
                              static_cast<long long>(rs + cv.rows[k] + 1),
                              static_cast<long long>(cs + cv.col + 1), cv.vals[k]);
                body += buf;
            }
        });
    }

    std::int64_t header_len = 0;
    if (comm.rank() == 0) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot create '" + path + "'");
        std::string header = "%%MatrixMarket matrix coordinate real general\n";
        header += std::to_string(static_cast<long long>(a.nrows)) + " " +
                  std::to_string(static_cast<long long>(a.ncols)) + " " +
                  std::to_string(static_cast<long long>(nnz)) + "\n";
        out << header;
        if (!out) throw IoError("write failed on '" + path + "'");
        header_len = static_cast<std::int64_t>(header.size());
    }
    std::vector<std::int64_t> hl{header_len};
    hl = comm.broadcast(0, hl);
    header_len = hl.at(0);

    const auto offset = header_len + comm.exscan<std::int64_t>(static_cast<std::int64_t>(body.size()),
                                                               [](std::int64_t x, std::int64_t y) { return x + y; }, 0);
    {
        std::fstream out(path, std::ios::binary | std::ios::in | std::ios::out);
        if (!out) throw IoError("cannot open '" + path + "' for writing");
        out.seekp(offset);
        out.write(body.data(), static_cast<std::streamsize>(body.size()));
        if (!out) throw IoError("write failed on '" + path + "'");
    }
    comm.barrier();
}

} // namespace slap
