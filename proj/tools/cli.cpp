#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "slap/algorithms.hpp"
#include "slap/batched.hpp"
#include "slap/binary_io.hpp"
#include "slap/dist_spmv.hpp"
#include "slap/label_io.hpp"
#include "slap/mm_io.hpp"
#include "slap/spgemm3d.hpp"
#include "slap/summa.hpp"

namespace slap::cli {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

struct RunConfig {
    std::string subcommand;
    std::string input;
    std::string input_b;
    std::string output;
    std::string format = "mm";
    std::string output_format;
    int procs = 1;
    std::string grid; // "RxC"
    int layers = 1;
    std::string conv = "regular";
    std::string alg;
    std::string semiring;
    int threads = 1;
    std::uint64_t seed = 1;
    int batches = 0;
    std::int64_t budget = 0;
    double damping = 0.85;
    double inflation = 2.0;
    double prune = 1e-4;
    double tol = 1e-9;
    int max_iters = 100;
    std::string stats = "text";
    bool square = false;
    std::int64_t root = 0;
    int scale = 10;
    int edge_factor = 16;
    double density = 0.01;
    std::int64_t k = 4;
};

/// Report assembled on rank 0 during the run, printed by the launcher.
struct Report {
    std::vector<std::pair<std::string, double>> phases;
    std::int64_t nnz_out = 0;
    std::int64_t flops = 0;
    int stages = 0;
    std::vector<std::pair<std::string, std::string>> extra; // free-form result lines
    CommCounters counters;                                  // aggregated over ranks

    void add_phase(const std::string& name, double secs) { phases.emplace_back(name, secs); }
    void note(const std::string& key, const std::string& val) { extra.emplace_back(key, val); }
};

class PhaseTimer {
public:
    PhaseTimer(Report* rep, bool active, std::string name)
        : rep_(rep), active_(active), name_(std::move(name)), start_(Clock::now()) {}
    ~PhaseTimer() {
        if (rep_ && active_)
            rep_->add_phase(name_, std::chrono::duration<double>(Clock::now() - start_).count());
    }

private:
    Report* rep_;
    bool active_;
    std::string name_;
    Clock::time_point start_;
};

std::pair<int, int> parse_grid_shape(const RunConfig& cfg) {
    if (cfg.grid.empty()) {
        const auto s = static_cast<int>(std::llround(std::sqrt(static_cast<double>(cfg.procs))));
        if (s * s != cfg.procs)
            throw ShapeError(std::to_string(cfg.procs) + " is not a perfect square; use --grid RxC");
        return {s, s};
    }
    const auto x = cfg.grid.find('x');
    if (x == std::string::npos) throw ShapeError("--grid expects RxC, got '" + cfg.grid + "'");
    const int pr = std::stoi(cfg.grid.substr(0, x));
    const int pc = std::stoi(cfg.grid.substr(x + 1));
    return {pr, pc};
}

DistSparseMat2D<double> load_matrix(const RunConfig& cfg, const std::string& path, const Grid2D& grid) {
    if (cfg.format == "mm") return read_matrix_market(path, grid);
    if (cfg.format == "label") return read_labeled_tuples(path, grid).matrix;
    if (cfg.format == "bin") return read_binary(path, grid);
    throw NameError("unknown format '" + cfg.format + "'");
}

void store_matrix(const RunConfig& cfg, const DistSparseMat2D<double>& a, const std::string& path) {
    const std::string fmt = cfg.output_format.empty() ? cfg.format : cfg.output_format;
    if (fmt == "mm" || fmt == "label")
        write_matrix_market(a, path); // label output re-uses coordinate text with integer labels
    else if (fmt == "bin")
        write_binary(a, path);
    else
        throw NameError("unknown format '" + fmt + "'");
}

/// Writes a distributed vector as an n-by-1 coordinate file (dense output,
/// deterministic order).
void store_vector(const DistDenseVec<double>& v, const std::string& path) {
    Triples<GlobalIdx, double> mine;
    mine.nrows = v.n;
    mine.ncols = 1;
    const auto start = v.my_start();
    for (std::size_t k = 0; k < v.local.size(); ++k)
        mine.push_back(start + static_cast<GlobalIdx>(k), 0, v.local[k]);
    auto first = [](const double& a, const double&) { return a; };
    auto dist = distribute_triples(mine, v.grid, v.n, 1, first);
    write_matrix_market(dist, path);
}

template <class T>
DistSparseMat2D<T> cast_matrix(const DistSparseMat2D<double>& a) {
    DistSparseMat2D<T> out;
    out.grid = a.grid;
    out.nrows = a.nrows;
    out.ncols = a.ncols;
    out.row_offsets = a.row_offsets;
    out.col_offsets = a.col_offsets;
    Triples<LocalIdx, T> t;
    t.nrows = a.local.nrows();
    t.ncols = a.local.ncols();
    a.local.for_each_col([&](ColView<LocalIdx, double> cv) {
        for (std::size_t k = 0; k < cv.nnz(); ++k) t.push_back(cv.rows[k], cv.col, static_cast<T>(cv.vals[k]));
    });
    out.local = build_dcsc(t, [](const T& x, const T&) { return x; });
    return out;
}

template <class T>
DistSparseMat2D<double> uncast_matrix(const DistSparseMat2D<T>& a) {
    DistSparseMat2D<double> out;
    out.grid = a.grid;
    out.nrows = a.nrows;
    out.ncols = a.ncols;
    out.row_offsets = a.row_offsets;
    out.col_offsets = a.col_offsets;
    Triples<LocalIdx, double> t;
    t.nrows = a.local.nrows();
    t.ncols = a.local.ncols();
    a.local.for_each_col([&](ColView<LocalIdx, T> cv) {
        for (std::size_t k = 0; k < cv.nnz(); ++k) t.push_back(cv.rows[k], cv.col, static_cast<double>(cv.vals[k]));
    });
    out.local = build_dcsc(t, [](const double& x, const double&) { return x; });
    return out;
}

SpGemmAlg gemm_alg(const RunConfig& cfg) {
    return cfg.alg.empty() ? SpGemmAlg::hybrid : spgemm_alg_from_name(cfg.alg);
}

SpMSpVAlg spv_alg(const RunConfig& cfg) {
    return cfg.alg.empty() ? SpMSpVAlg::spa : spmspv_alg_from_name(cfg.alg);
}

void cmd_spgemm(const RunConfig& cfg, Comm& world, Report& rep) {
    auto grid_shape = parse_grid_shape(cfg);
    auto grid = make_grid2d(world, grid_shape.first, grid_shape.second);
    const bool root = world.rank() == 0;

    DistSparseMat2D<double> a, b;
    {
        PhaseTimer t(&rep, root, "load");
        a = load_matrix(cfg, cfg.input, grid);
        b = cfg.square ? a : load_matrix(cfg, cfg.input_b, grid);
    }
    const auto id = builtin_semiring(cfg.semiring.empty() ? "plus_times_f64" : cfg.semiring);
    DistSparseMat2D<double> c;
    DistKernelStats st;
    {
        PhaseTimer t(&rep, root, "compute");
        dispatch_semiring(id, [&](auto sr) {
            using L = typename decltype(sr)::left_type;
            using Rt = typename decltype(sr)::right_type;
            auto al = cast_matrix<L>(a);
            auto bl = cast_matrix<Rt>(b);
            if (cfg.batches > 1 || cfg.budget > 0) {
                auto plan = cfg.budget > 0 ? plan_batches_by_budget(al, bl, cfg.budget, cfg.threads)
                                           : plan_batches_by_count(b.ncols, cfg.batches);
                Triples<GlobalIdx, double> parts;
                parts.nrows = a.nrows;
                parts.ncols = b.ncols;
                batched_spgemm(al, bl, plan, sr, gemm_alg(cfg), cfg.threads,
                               [&](int, GlobalIdx s, GlobalIdx, const auto& cr) {
                                   const auto rs = cr.row_start();
                                   const auto cs = cr.col_start();
                                   cr.local.for_each_col([&](auto cv) {
                                       for (std::size_t k = 0; k < cv.nnz(); ++k)
                                           parts.push_back(rs + cv.rows[k], s + cs + cv.col,
                                                           static_cast<double>(cv.vals[k]));
                                   });
                               });
                auto firstv = [](const double& x, const double&) { return x; };
                c = distribute_triples(parts, grid, a.nrows, b.ncols, firstv);
                if (root) rep.note("batches", std::to_string(plan.batches()));
            } else if (cfg.layers > 1) {
                auto g3 = make_grid3d(world, cfg.layers, convert_variant_from_name(cfg.conv));
                auto a3 = redistribute_3d(al, g3, SplitDim::cols);
                auto b3 = redistribute_3d(bl, g3, SplitDim::rows);
                auto c3 = ca3d_spgemm(a3, b3, sr, gemm_alg(cfg), cfg.threads, &st);
                c = uncast_matrix(redistribute_2d(c3, grid));
            } else {
                c = uncast_matrix(summa2d_spgemm(al, bl, sr, gemm_alg(cfg), cfg.threads, &st));
            }
        });
    }
    if (!cfg.output.empty()) {
        PhaseTimer t(&rep, root, "write");
        store_matrix(cfg, c, cfg.output);
    }
    if (root) {
        rep.nnz_out = dist_nnz(c);
        rep.flops = st.flops;
        rep.stages = st.stages;
    } else {
        (void)dist_nnz(c);
    }
}

void cmd_mv(const RunConfig& cfg, Comm& world, Report& rep) {
    auto grid_shape = parse_grid_shape(cfg);
    auto grid = make_grid2d(world, grid_shape.first, grid_shape.second);
    const bool root = world.rank() == 0;
    DistSparseMat2D<double> a;
    {
        PhaseTimer t(&rep, root, "load");
        a = load_matrix(cfg, cfg.input, grid);
    }
    PlusTimes<double> sr;
    DistDenseVec<double> y;
    {
        PhaseTimer t(&rep, root, "compute");
        if (cfg.subcommand == "spmv") {
            auto x = make_dist_vec<double>(grid, a.ncols, [&](GlobalIdx g) {
                return Rng(cfg.seed, static_cast<std::uint64_t>(g)).next_double();
            });
            y = dist_spmv(a, x, sr, cfg.threads);
        } else if (cfg.subcommand == "spmspv") {
            DistSparseVec<double> x;
            x.grid = grid;
            x.n = a.ncols;
            auto lay = x.layout();
            x.local.n = static_cast<LocalIdx>(lay.sub_len(grid.myrow, grid.mycol));
            const auto start = x.my_start();
            for (LocalIdx i = 0; i < x.local.n; ++i) {
                Rng rng(cfg.seed, static_cast<std::uint64_t>(start + i));
                if (rng.next_double() < cfg.density) {
                    x.local.idx.push_back(i);
                    x.local.vals.push_back(rng.next_double());
                }
            }
            y = densify_dist(dist_spmspv(a, x, sr, spv_alg(cfg), cfg.threads), 0.0);
        } else { // spmm
            auto x = make_dist_dense<double>(grid, DenseLayout::rowsplit, a.ncols, cfg.k, [&](GlobalIdx i, GlobalIdx j) {
                return Rng(cfg.seed, static_cast<std::uint64_t>(i * cfg.k + j)).next_double();
            });
            auto ym = dist_spmm(a, x, sr, cfg.threads);
            // report the first column as the representative vector output
            y.grid = grid;
            y.n = a.nrows;
            y.local.resize(static_cast<std::size_t>(ym.local.nrows));
            for (std::int64_t i = 0; i < ym.local.nrows; ++i) y.local[static_cast<std::size_t>(i)] = ym.local.at(i, 0);
            if (root) rep.note("dense_cols", std::to_string(cfg.k));
        }
    }
    if (!cfg.output.empty()) {
        PhaseTimer t(&rep, root, "write");
        store_vector(y, cfg.output);
    }
    if (root) rep.nnz_out = static_cast<std::int64_t>(a.nrows);
}

void cmd_bfs(const RunConfig& cfg, Comm& world, Report& rep) {
    auto grid_shape = parse_grid_shape(cfg);
    auto grid = make_grid2d(world, grid_shape.first, grid_shape.second);
    const bool root = world.rank() == 0;
    DistSparseMat2D<double> a;
    {
        PhaseTimer t(&rep, root, "load");
        a = load_matrix(cfg, cfg.input, grid);
    }
    DistDenseVec<std::int64_t> levels;
    {
        PhaseTimer t(&rep, root, "compute");
        levels = bfs(a, cfg.root, spv_alg(cfg), cfg.threads);
    }
    std::int64_t reached = 0, maxlvl = 0;
    for (auto l : levels.local) {
        if (l >= 0) ++reached;
        maxlvl = std::max(maxlvl, l);
    }
    reached = world.allreduce<std::int64_t>(reached, [](std::int64_t x, std::int64_t y) { return x + y; }, 0);
    maxlvl = world.allreduce<std::int64_t>(maxlvl, [](std::int64_t x, std::int64_t y) { return std::max(x, y); }, 0);
    if (!cfg.output.empty()) {
        PhaseTimer t(&rep, root, "write");
        DistDenseVec<double> as_double;
        as_double.grid = grid;
        as_double.n = levels.n;
        as_double.local.reserve(levels.local.size());
        for (auto l : levels.local) as_double.local.push_back(static_cast<double>(l));
        store_vector(as_double, cfg.output);
    }
    if (root) {
        rep.note("reached", std::to_string(reached));
        rep.note("max_level", std::to_string(maxlvl));
        rep.nnz_out = reached;
    }
}

void cmd_cc(const RunConfig& cfg, Comm& world, Report& rep) {
    auto grid_shape = parse_grid_shape(cfg);
    auto grid = make_grid2d(world, grid_shape.first, grid_shape.second);
    const bool root = world.rank() == 0;
    DistSparseMat2D<double> a;
    {
        PhaseTimer t(&rep, root, "load");
        a = load_matrix(cfg, cfg.input, grid);
    }
    CcResult res;
    {
        PhaseTimer t(&rep, root, "compute");
        res = fastsv_cc(a, cfg.threads);
    }
    if (!cfg.output.empty()) {
        PhaseTimer t(&rep, root, "write");
        auto as_double = make_dist_vec<double>(grid, res.labels.n, [](GlobalIdx) { return 0.0; });
        for (std::size_t k = 0; k < res.labels.local.size(); ++k)
            as_double.local[k] = static_cast<double>(res.labels.local[k]);
        store_vector(as_double, cfg.output);
    }
    if (root) {
        rep.note("components", std::to_string(res.components));
        rep.note("iterations", std::to_string(res.iterations));
        rep.nnz_out = res.components;
    }
}

void cmd_pagerank(const RunConfig& cfg, Comm& world, Report& rep) {
    auto grid_shape = parse_grid_shape(cfg);
    auto grid = make_grid2d(world, grid_shape.first, grid_shape.second);
    const bool root = world.rank() == 0;
    DistSparseMat2D<double> a;
    {
        PhaseTimer t(&rep, root, "load");
        a = load_matrix(cfg, cfg.input, grid);
    }
    DistDenseVec<double> x;
    {
        PhaseTimer t(&rep, root, "compute");
        x = pagerank(a, cfg.damping, cfg.tol, cfg.max_iters, cfg.threads);
    }
    if (!cfg.output.empty()) {
        PhaseTimer t(&rep, root, "write");
        store_vector(x, cfg.output);
    }
    if (root) rep.nnz_out = a.nrows;
}

void cmd_mcl(const RunConfig& cfg, Comm& world, Report& rep) {
    auto grid_shape = parse_grid_shape(cfg);
    auto grid = make_grid2d(world, grid_shape.first, grid_shape.second);
    const bool root = world.rank() == 0;
    DistSparseMat2D<double> a;
    {
        PhaseTimer t(&rep, root, "load");
        a = load_matrix(cfg, cfg.input, grid);
    }
    MclOptions opt;
    opt.inflation = cfg.inflation;
    opt.prune_threshold = cfg.prune;
    opt.layers = cfg.layers;
    opt.variant = convert_variant_from_name(cfg.conv);
    opt.alg = gemm_alg(cfg);
    opt.threads = cfg.threads;
    DistSparseMat2D<double> c;
    {
        PhaseTimer t(&rep, root, "compute");
        c = mcl_step(a, opt);
    }
    if (!cfg.output.empty()) {
        PhaseTimer t(&rep, root, "write");
        store_matrix(cfg, c, cfg.output);
    }
    const auto nnz = dist_nnz(c);
    if (root) rep.nnz_out = nnz;
}

void cmd_gen_rmat(const RunConfig& cfg, Comm& world, Report& rep) {
    auto grid_shape = parse_grid_shape(cfg);
    auto grid = make_grid2d(world, grid_shape.first, grid_shape.second);
    const bool root = world.rank() == 0;
    RmatParams params;
    params.scale = cfg.scale;
    params.edge_factor = cfg.edge_factor;
    params.seed = cfg.seed;
    DistSparseMat2D<double> a;
    {
        PhaseTimer t(&rep, root, "compute");
        a = gen_rmat(params, grid);
    }
    if (cfg.output.empty()) throw ShapeError("gen-rmat needs --output");
    {
        PhaseTimer t(&rep, root, "write");
        store_matrix(cfg, a, cfg.output);
    }
    const auto nnz = dist_nnz(a);
    if (root) rep.nnz_out = nnz;
}

void cmd_convert(const RunConfig& cfg, Comm& world, Report& rep) {
    auto grid_shape = parse_grid_shape(cfg);
    auto grid = make_grid2d(world, grid_shape.first, grid_shape.second);
    const bool root = world.rank() == 0;
    DistSparseMat2D<double> a;
    {
        PhaseTimer t(&rep, root, "load");
        a = load_matrix(cfg, cfg.input, grid);
    }
    if (cfg.layers > 1) {
        PhaseTimer t(&rep, root, "convert3d");
        auto before = gather_matrix(a);
        auto g3r = make_grid3d(world, cfg.layers, ConvertVariant::regular);
        auto a3r = redistribute_3d(a, g3r, SplitDim::cols);
        auto after_reg = gather_matrix(a3r);
        bool ok = before.rows == after_reg.rows && before.cols == after_reg.cols && before.vals == after_reg.vals;
        bool super_ok = true;
        if (is_perfect_square(cfg.layers)) {
            const auto sc = isqrt_exact(cfg.layers);
            if (grid.square() && grid.pr % sc == 0) {
                auto g3s = make_grid3d(world, cfg.layers, ConvertVariant::supergrid);
                auto a3s = redistribute_3d(a, g3s, SplitDim::cols);
                auto after_sup = gather_matrix(a3s);
                super_ok = before.rows == after_sup.rows && before.cols == after_sup.cols &&
                           before.vals == after_sup.vals;
            }
        }
        if (root) {
            rep.note("convert_regular", ok ? "ok" : "MISMATCH");
            rep.note("convert_supergrid", super_ok ? "ok" : "MISMATCH");
        }
        if (!ok || !super_ok) throw FormatError("2D->3D conversion changed the matrix");
    }
    if (!cfg.output.empty()) {
        PhaseTimer t(&rep, root, "write");
        store_matrix(cfg, a, cfg.output);
    }
    const auto nnz = dist_nnz(a);
    if (root) rep.nnz_out = nnz;
}

void cmd_check(const RunConfig& cfg, Comm& world, Report& rep) {
    auto grid_shape = parse_grid_shape(cfg);
    auto grid = make_grid2d(world, grid_shape.first, grid_shape.second);
    const bool root = world.rank() == 0;
    DistSparseMat2D<double> a;
    {
        PhaseTimer t(&rep, root, "load");
        a = load_matrix(cfg, cfg.input, grid);
    }
    PhaseTimer t(&rep, root, "check");
    int failures = 0;
    auto verdict = [&](const std::string& name, bool ok) {
        if (root) rep.note(name, ok ? "ok" : "FAIL");
        if (!ok) ++failures;
    };

    // semiring laws on sampled values
    {
        std::vector<double> samples;
        a.local.for_each_col([&](ColView<LocalIdx, double> cv) {
            for (std::size_t k = 0; k < cv.nnz() && samples.size() < 128; ++k) samples.push_back(cv.vals[k]);
        });
        samples.push_back(1.0);
        samples.push_back(2.0);
        auto viol = check_semiring_laws(PlusTimesF64{}, samples, cfg.seed,
                                        [](double x, double y) { return std::abs(x - y) <= 1e-9 * (1 + std::abs(x)); });
        verdict("semiring_laws", viol.empty());
    }
    // distribute/gather round trip
    {
        auto t1 = gather_matrix(a);
        auto first = [](const double& x, const double&) { return x; };
        auto a2 = distribute_triples(world.rank() == 0 ? t1 : Triples<GlobalIdx, double>{t1.nrows, t1.ncols, {}, {}, {}},
                                     grid, a.nrows, a.ncols, first);
        auto t2 = gather_matrix(a2);
        verdict("distribute_gather_roundtrip", t1.rows == t2.rows && t1.cols == t2.cols && t1.vals == t2.vals);
    }
    // spmv row/col variant agreement on the local block
    {
        LocalDenseVec<double> x;
        x.vals.resize(static_cast<std::size_t>(a.local.ncols()));
        for (std::size_t i = 0; i < x.vals.size(); ++i) x.vals[i] = Rng(cfg.seed, i).next_double();
        PlusTimes<double> sr;
        auto y1 = local_spmv(a.local, x, sr, SpMVPart::row, cfg.threads);
        auto y2 = local_spmv(a.local, x, sr, SpMVPart::col, cfg.threads);
        bool ok = y1.vals.size() == y2.vals.size();
        for (std::size_t i = 0; ok && i < y1.vals.size(); ++i)
            ok = std::abs(y1.vals[i] - y2.vals[i]) <= 1e-9 * (1 + std::abs(y1.vals[i]));
        bool all_ok = world.allreduce<std::uint8_t>(ok ? 1 : 0,
                                                    [](std::uint8_t p, std::uint8_t q) { return p && q ? 1 : 0; }, 1);
        verdict("spmv_row_col_agree", all_ok);
    }
    // identity product
    if (a.nrows == a.ncols) {
        Triples<GlobalIdx, double> eye;
        eye.nrows = a.nrows;
        eye.ncols = a.ncols;
        if (world.rank() == 0)
            for (GlobalIdx i = 0; i < a.nrows; ++i) eye.push_back(i, i, 1.0);
        auto first = [](const double& x, const double&) { return x; };
        auto ident = distribute_triples(eye, grid, a.nrows, a.ncols, first);
        auto prod = summa2d_spgemm(ident, a, PlusTimes<double>{}, SpGemmAlg::hybrid, cfg.threads);
        auto t1 = gather_matrix(a);
        auto t2 = gather_matrix(prod);
        verdict("identity_product", t1.rows == t2.rows && t1.cols == t2.cols && t1.vals == t2.vals);
    }
    if (failures > 0) throw FormatError(std::to_string(failures) + " invariant check(s) failed");
}

void print_report(const RunConfig& cfg, const Report& rep, std::ostream& out) {
    if (cfg.stats == "json") {
        json j;
        j["phases"] = json::array();
        for (const auto& [name, secs] : rep.phases) j["phases"].push_back({{"phase", name}, {"seconds", secs}});
        json bytes = json::object();
        for (const auto& [kind, e] : rep.counters.by_kind) bytes[to_string(kind)] = e.bytes;
        j["bytes_by_collective"] = bytes;
        j["flops"] = rep.flops;
        j["nnz_out"] = rep.nnz_out;
        j["stages"] = rep.stages;
        for (const auto& [k, v] : rep.extra) j["result"][k] = v;
        out << j.dump(2) << "\n";
        return;
    }
    for (const auto& [name, secs] : rep.phases) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6f", secs);
        out << "phase " << name << ": " << buf << " s\n";
    }
    out << "nnz_out: " << rep.nnz_out << "\n";
    out << "flops: " << rep.flops << "\n";
    if (rep.stages > 0) out << "stages: " << rep.stages << "\n";
    for (const auto& [k, v] : rep.extra) out << k << ": " << v << "\n";
    out << "collectives:\n";
    for (const auto& [key, e] : rep.counters.by_kind_label)
        out << "  " << to_string(key.first) << " " << to_string(key.second) << " calls=" << e.calls
            << " bytes=" << e.bytes << "\n";
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"semiring sparse linear algebra on a simulated process grid"};
    app.require_subcommand(1);

    RunConfig cfg;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--input", cfg.input, "input matrix path");
        sub->add_option("--input-b", cfg.input_b, "second input matrix path");
        sub->add_option("--format", cfg.format, "input format")->check(CLI::IsMember({"mm", "label", "bin"}));
        sub->add_option("--output-format", cfg.output_format, "output format (defaults to --format)")
            ->check(CLI::IsMember({"mm", "label", "bin"}));
        sub->add_option("--output", cfg.output, "output path");
        sub->add_option("--procs", cfg.procs, "simulated rank count")->check(CLI::PositiveNumber);
        sub->add_option("--grid", cfg.grid, "explicit grid shape RxC");
        sub->add_option("--layers", cfg.layers, "3D layer count c")->check(CLI::PositiveNumber);
        sub->add_option("--conv", cfg.conv, "2D->3D conversion variant")
            ->check(CLI::IsMember({"regular", "supergrid"}));
        sub->add_option("--alg", cfg.alg, "kernel algorithm")
            ->check(CLI::IsMember({"heap", "hash", "hybrid", "spa", "bucket"}));
        sub->add_option("--semiring", cfg.semiring, "semiring name");
        sub->add_option("--threads", cfg.threads, "threads per rank")->check(CLI::PositiveNumber);
        sub->add_option("--seed", cfg.seed, "random seed");
        sub->add_option("--batches", cfg.batches, "batch count for spgemm");
        sub->add_option("--budget", cfg.budget, "per-batch output memory budget in bytes");
        sub->add_option("--damping", cfg.damping, "pagerank damping factor");
        sub->add_option("--inflation", cfg.inflation, "mcl inflation exponent");
        sub->add_option("--prune", cfg.prune, "mcl prune threshold");
        sub->add_option("--tol", cfg.tol, "iteration tolerance");
        sub->add_option("--max-iters", cfg.max_iters, "iteration cap");
        sub->add_option("--stats", cfg.stats, "report format")->check(CLI::IsMember({"text", "json"}));
    };

    auto* spgemm = app.add_subcommand("spgemm", "sparse matrix product");
    add_common(spgemm);
    spgemm->add_flag("--square", cfg.square, "square the single input (B = A)");
    auto* spmv = app.add_subcommand("spmv", "sparse matrix times dense vector");
    add_common(spmv);
    auto* spmspv = app.add_subcommand("spmspv", "sparse matrix times sparse vector");
    add_common(spmspv);
    spmspv->add_option("--density", cfg.density, "input vector density");
    auto* spmm = app.add_subcommand("spmm", "sparse matrix times dense matrix");
    add_common(spmm);
    spmm->add_option("--k", cfg.k, "dense operand column count");
    auto* bfs_cmd = app.add_subcommand("bfs", "breadth-first levels");
    add_common(bfs_cmd);
    bfs_cmd->add_option("--root", cfg.root, "start vertex");
    auto* cc = app.add_subcommand("cc", "connected components");
    add_common(cc);
    auto* pr = app.add_subcommand("pagerank", "pagerank");
    add_common(pr);
    auto* mcl = app.add_subcommand("mcl-step", "one Markov clustering step");
    add_common(mcl);
    auto* rmat = app.add_subcommand("gen-rmat", "generate a recursive-quadrant random graph");
    add_common(rmat);
    rmat->add_option("--scale", cfg.scale, "log2 of vertex count");
    rmat->add_option("--edge-factor", cfg.edge_factor, "edges per vertex");
    auto* conv = app.add_subcommand("convert", "format/grid conversions and checks");
    add_common(conv);
    auto* check = app.add_subcommand("check", "run the invariant suite on an input");
    add_common(check);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) { // --help
            out << app.help();
            return 0;
        }
        err << "usage error: " << e.what() << "\n";
        return 1;
    }

    cfg.subcommand = app.get_subcommands().front()->get_name();
    const bool needs_input = cfg.subcommand != "gen-rmat";
    if (needs_input && cfg.input.empty()) {
        err << "usage error: " << cfg.subcommand << " requires --input\n";
        return 1;
    }
    if (cfg.subcommand == "spgemm" && !cfg.square && cfg.input_b.empty()) {
        err << "usage error: spgemm needs --input-b or --square\n";
        return 1;
    }

    Report rep;
    try {
        auto counters = run_world(cfg.procs, [&](Comm& world) {
            if (cfg.subcommand == "spgemm")
                cmd_spgemm(cfg, world, rep);
            else if (cfg.subcommand == "spmv" || cfg.subcommand == "spmspv" || cfg.subcommand == "spmm")
                cmd_mv(cfg, world, rep);
            else if (cfg.subcommand == "bfs")
                cmd_bfs(cfg, world, rep);
            else if (cfg.subcommand == "cc")
                cmd_cc(cfg, world, rep);
            else if (cfg.subcommand == "pagerank")
                cmd_pagerank(cfg, world, rep);
            else if (cfg.subcommand == "mcl-step")
                cmd_mcl(cfg, world, rep);
            else if (cfg.subcommand == "gen-rmat")
                cmd_gen_rmat(cfg, world, rep);
            else if (cfg.subcommand == "convert")
                cmd_convert(cfg, world, rep);
            else if (cfg.subcommand == "check")
                cmd_check(cfg, world, rep);
            else
                throw NameError("unknown subcommand '" + cfg.subcommand + "'");
        });
        for (const auto& c : counters) rep.counters.merge(c);
    } catch (const NameError& e) {
        err << e.what() << "\n";
        return 1;
    } catch (const ShapeError& e) {
        err << e.what() << "\n";
        return 1;
    } catch (const ArityError& e) {
        err << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return 2;
    }
    print_report(cfg, rep, out);
    return 0;
}

} // namespace slap::cli
