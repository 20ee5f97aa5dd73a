#include "slap/binary_io.hpp"

#include <cstring>
#include <fstream>

#include "slap/mm_io.hpp"

namespace slap {

namespace {

struct Record {
    std::int64_t row;
    std::int64_t col;
    double val;
};
static_assert(sizeof(Record) == 24);

constexpr std::int64_t kHeaderBytes = 32;

} // namespace

void write_binary(const DistSparseMat2D<double>& a, const std::string& path) {
    Comm comm = a.grid.comm;
    const auto nnz = dist_nnz(a);

    std::vector<Record> recs;
    recs.reserve(static_cast<std::size_t>(a.local_nnz()));
    const auto rs = a.row_start();
    const auto cs = a.col_start();
    a.local.for_each_col([&](ColView<LocalIdx, double> cv) {
        for (std::size_t k = 0; k < cv.nnz(); ++k) recs.push_back({rs + cv.rows[k], cs + cv.col, cv.vals[k]});
    });

    if (comm.rank() == 0) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot create '" + path + "'");
        out.write(kBinaryMagic, 4);
        const std::uint32_t ver = kBinaryVersion;
        out.write(reinterpret_cast<const char*>(&ver), sizeof ver);
        const std::int64_t dims[3] = {a.nrows, a.ncols, nnz};
        out.write(reinterpret_cast<const char*>(dims), sizeof dims);
        if (!out) throw IoError("write failed on '" + path + "'");
    }
    const auto my_records = static_cast<std::int64_t>(recs.size());
    const auto before = comm.exscan<std::int64_t>(my_records, [](std::int64_t x, std::int64_t y) { return x + y; }, 0);
    comm.barrier(); // header must exist before anyone seeks past it
    {
        std::fstream out(path, std::ios::binary | std::ios::in | std::ios::out);
        if (!out) throw IoError("cannot open '" + path + "' for writing");
        out.seekp(kHeaderBytes + before * static_cast<std::int64_t>(sizeof(Record)));
        out.write(reinterpret_cast<const char*>(recs.data()),
                  static_cast<std::streamsize>(recs.size() * sizeof(Record)));
        if (!out) throw IoError("write failed on '" + path + "'");
    }
    comm.barrier();
}

DistSparseMat2D<double> read_binary(const std::string& path, const Grid2D& grid) {
    Comm comm = grid.comm;
    const int p = comm.size();
    const int me = comm.rank();
    const std::int64_t size = detail::file_size_or_throw(path);
    if (size < kHeaderBytes) throw FormatError("file too short for a binary matrix header");

    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    char magic[4];
    in.read(magic, 4);
    if (std::memcmp(magic, kBinaryMagic, 4) != 0) throw FormatError("bad magic in '" + path + "'");
    std::uint32_t ver = 0;
    in.read(reinterpret_cast<char*>(&ver), sizeof ver);
    if (ver != kBinaryVersion)
        throw FormatError("unsupported binary version " + std::to_string(ver));
    std::int64_t dims[3];
    in.read(reinterpret_cast<char*>(dims), sizeof dims);
    const std::int64_t nrows = dims[0], ncols = dims[1], nnz = dims[2];
    if (nrows < 0 || ncols < 0 || nnz < 0) throw FormatError("negative header field");
    if (size != kHeaderBytes + nnz * static_cast<std::int64_t>(sizeof(Record)))
        throw FormatError("file size " + std::to_string(static_cast<long long>(size)) + " does not match " +
                          std::to_string(static_cast<long long>(nnz)) + " declared records");

    const std::int64_t lo = nnz * me / p;
    const std::int64_t hi = nnz * (me + 1) / p;
    std::vector<Record> recs(static_cast<std::size_t>(hi - lo));
    if (!recs.empty()) {
        in.seekg(kHeaderBytes + lo * static_cast<std::int64_t>(sizeof(Record)));
        in.read(reinterpret_cast<char*>(recs.data()), static_cast<std::streamsize>(recs.size() * sizeof(Record)));
        if (!in) throw FormatError("truncated record section in '" + path + "'");
    }

    Triples<GlobalIdx, double> mine;
    mine.nrows = nrows;
    mine.ncols = ncols;
    for (const auto& r : recs) mine.push_back(r.row, r.col, r.val);
    auto first = [](const double& x, const double&) { return x; };
    return distribute_triples(mine, grid, nrows, ncols, first);
}

} // namespace slap
