#include <doctest.h>

#include <atomic>

#include "oracles.hpp"
#include "slap/spgemm.hpp"
#include "slap/spmspv.hpp"
#include "slap/spmv.hpp"

using namespace slap;
using I = std::int32_t;

namespace {

auto plus_i = [](const std::int64_t& a, const std::int64_t& b) { return a + b; };
auto first = [](const auto& a, const auto&) { return a; };

// A = [[1,0],[2,3]], B = [[0,4],[5,0]] from the worked examples
Triples<I, std::int64_t> example_a() {
    Triples<I, std::int64_t> t;
    t.nrows = t.ncols = 2;
    t.push_back(0, 0, 1);
    t.push_back(1, 0, 2);
    t.push_back(1, 1, 3);
    return t;
}
Triples<I, std::int64_t> example_b() {
    Triples<I, std::int64_t> t;
    t.nrows = t.ncols = 2;
    t.push_back(0, 1, 4);
    t.push_back(1, 0, 5);
    return t;
}

Triples<I, std::int64_t> identity(I n) {
    Triples<I, std::int64_t> t;
    t.nrows = t.ncols = n;
    for (I i = 0; i < n; ++i) t.push_back(i, i, 1);
    return t;
}

/// Semiring wrapper counting multiply invocations.
template <class SR>
struct CountingSr {
    using left_type = typename SR::left_type;
    using right_type = typename SR::right_type;
    using result_type = typename SR::result_type;
    SR inner;
    std::atomic<std::int64_t>* multiplies;
    result_type multiply(const left_type& a, const right_type& b) const {
        multiplies->fetch_add(1, std::memory_order_relaxed);
        return inner.multiply(a, b);
    }
    result_type add(const result_type& a, const result_type& b) const { return inner.add(a, b); }
    result_type zero() const { return inner.zero(); }
    std::string_view name() const { return inner.name(); }
};

template <class VT>
bool triples_equal(const Triples<I, VT>& a, const Triples<I, VT>& b) {
    return a.nrows == b.nrows && a.ncols == b.ncols && a.rows == b.rows && a.cols == b.cols && a.vals == b.vals;
}

} // namespace

TEST_CASE("estimate_flops") {
    auto a = build_csc(example_a(), plus_i);
    auto b = build_csc(example_b(), plus_i);
    SUBCASE("worked example: per-column [1,2], total 3") {
        auto est = estimate_flops(a, b);
        CHECK(est.flops_per_column == std::vector<std::int64_t>{1, 2});
        CHECK(est.total_flops == 3);
    }
    SUBCASE("empty B gives zero") {
        Triples<I, std::int64_t> t;
        t.nrows = t.ncols = 2;
        auto empty = build_csc(t, plus_i);
        CHECK(estimate_flops(a, empty).total_flops == 0);
    }
    SUBCASE("identity A gives nnz(B)") {
        auto eye = build_csc(identity(2), plus_i);
        CHECK(estimate_flops(eye, b).total_flops == static_cast<std::int64_t>(b.nnz()));
    }
    SUBCASE("dimension mismatch throws") {
        Triples<I, std::int64_t> t;
        t.nrows = 3;
        t.ncols = 2;
        auto bad = build_csc(t, plus_i);
        CHECK_THROWS_AS(estimate_flops(bad, bad), DimError);
    }
}

TEST_CASE("symbolic_nnz matches the pattern-union oracle") {
    auto a = build_csc(example_a(), plus_i);
    auto b = build_csc(example_b(), plus_i);
    // oracle on the worked example: C has entries {(1,0),(0,1),(1,1)}, so
    // per-column counts are [1,2], total 3
    auto c = oracle::spgemm(example_a(), example_b(), PlusTimesI64{});
    std::vector<std::int64_t> expect(2, 0);
    for (std::size_t k = 0; k < c.size(); ++k) ++expect[static_cast<std::size_t>(c.cols[k])];
    CHECK(expect == std::vector<std::int64_t>{1, 2});
    CHECK(symbolic_nnz(a, b) == expect);

    SUBCASE("disjoint patterns give all zeros") {
        Triples<I, std::int64_t> ta;
        ta.nrows = ta.ncols = 3;
        ta.push_back(0, 0, 1); // only column 0 of A is nonempty
        Triples<I, std::int64_t> tb;
        tb.nrows = tb.ncols = 3;
        tb.push_back(1, 1, 1); // selects column 1 of A, which is empty
        auto counts = symbolic_nnz(build_csc(ta, plus_i), build_csc(tb, plus_i));
        CHECK(counts == std::vector<std::int64_t>{0, 0, 0});
    }
}

TEST_CASE("local_spgemm worked examples") {
    auto a = build_csc(example_a(), plus_i);
    auto b = build_csc(example_b(), plus_i);
    for (auto alg : {SpGemmAlg::heap, SpGemmAlg::hash, SpGemmAlg::hybrid}) {
        CAPTURE(static_cast<int>(alg));
        SUBCASE("identity times A returns A") {
            auto eye = build_csc(identity(2), plus_i);
            auto c = local_spgemm(eye, a, PlusTimesI64{}, alg);
            CHECK(triples_equal(to_triples(c), to_triples(a)));
        }
        SUBCASE("plus_times 2x2: entries {(0,1)=4,(1,0)=15,(1,1)=8}") {
            auto c = to_triples(local_spgemm(a, b, PlusTimesI64{}, alg));
            CHECK(c.rows == std::vector<I>{1, 0, 1});
            CHECK(c.cols == std::vector<I>{0, 1, 1});
            CHECK(c.vals == std::vector<std::int64_t>{15, 4, 8});
        }
        SUBCASE("min_plus square of a 2-cycle") {
            Triples<I, double> t;
            t.nrows = t.ncols = 2;
            t.push_back(0, 1, 1.0);
            t.push_back(1, 0, 2.0);
            auto m = build_csc(t, [](double x, double) { return x; });
            auto c = to_triples(local_spgemm(m, m, MinPlusF64{}, alg));
            CHECK(c.rows == std::vector<I>{0, 1});
            CHECK(c.cols == std::vector<I>{0, 1});
            CHECK(c.vals == std::vector<double>{3.0, 3.0});
        }
    }
}

TEST_CASE("spgemm oracle equivalence across algorithms and semirings") {
    Rng rng(31337);
    for (int trial = 0; trial < 60; ++trial) {
        const auto m = static_cast<I>(rng.next_below(48) + 2);
        const auto n = static_cast<I>(rng.next_below(48) + 2);
        const auto k = static_cast<I>(rng.next_below(48) + 2);
        const double density = 0.01 + 0.29 * rng.next_double();
        auto ta = oracle::random_triples<I, std::int64_t>(rng, m, n, density, oracle::small_int);
        auto tb = oracle::random_triples<I, std::int64_t>(rng, n, k, density, oracle::small_int);
        auto a = build_csc(ta, plus_i);
        auto b = build_dcsc(tb, plus_i);
        auto ca = oracle::canonical(ta, plus_i);
        auto cb = oracle::canonical(tb, plus_i);

        auto want = oracle::spgemm(ca, cb, PlusTimesI64{});
        for (auto alg : {SpGemmAlg::heap, SpGemmAlg::hash, SpGemmAlg::hybrid}) {
            auto got = to_triples(local_spgemm(a, b, PlusTimesI64{}, alg));
            CHECK(triples_equal(got, want));
        }
    }
}

TEST_CASE("spgemm output is identical across thread counts") {
    Rng rng(555);
    auto ta = oracle::random_triples<I, std::int64_t>(rng, 64, 64, 0.1, oracle::small_int);
    auto tb = oracle::random_triples<I, std::int64_t>(rng, 64, 64, 0.1, oracle::small_int);
    auto a = build_csc(ta, plus_i);
    auto b = build_csc(tb, plus_i);
    for (auto alg : {SpGemmAlg::heap, SpGemmAlg::hash, SpGemmAlg::hybrid}) {
        auto base = local_spgemm(a, b, PlusTimesI64{}, alg, 1);
        for (int t : {2, 4, 8}) CHECK(local_spgemm(a, b, PlusTimesI64{}, alg, t) == base);
    }
}

TEST_CASE("symbolic equals actual nnz under or_and, and flops equals heap multiplies") {
    Rng rng(808);
    for (int trial = 0; trial < 25; ++trial) {
        const auto n = static_cast<I>(rng.next_below(40) + 4);
        auto ta = oracle::random_triples<I, std::uint8_t>(rng, n, n, 0.15,
                                                          [](Rng&) { return std::uint8_t{1}; });
        auto tb = oracle::random_triples<I, std::uint8_t>(rng, n, n, 0.15,
                                                          [](Rng&) { return std::uint8_t{1}; });
        auto orv = [](const std::uint8_t& x, const std::uint8_t& y) { return std::uint8_t((x || y) ? 1 : 0); };
        auto a = build_csc(ta, orv);
        auto b = build_csc(tb, orv);
        auto c = local_spgemm(a, b, OrAnd{}, SpGemmAlg::heap);
        auto sym = symbolic_nnz(a, b);
        std::int64_t total = 0;
        for (auto v : sym) total += v;
        CHECK(total == static_cast<std::int64_t>(c.nnz()));

        std::atomic<std::int64_t> mults{0};
        CountingSr<OrAnd> counting{OrAnd{}, &mults};
        (void)local_spgemm(a, b, counting, SpGemmAlg::heap);
        CHECK(mults.load() == estimate_flops(a, b).total_flops);
    }
}

TEST_CASE("local_spmv") {
    PlusTimesI64 sr;
    SUBCASE("identity") {
        auto eye = build_csc(identity(3), plus_i);
        LocalDenseVec<std::int64_t> x;
        x.vals = {7, 8, 9};
        for (auto part : {SpMVPart::row, SpMVPart::col})
            CHECK(local_spmv(eye, x, sr, part).vals == std::vector<std::int64_t>{7, 8, 9});
    }
    SUBCASE("worked example y = [8, 5]") {
        Triples<I, std::int64_t> t;
        t.nrows = t.ncols = 2;
        t.push_back(0, 1, 4);
        t.push_back(1, 0, 5);
        auto a = build_csc(t, plus_i);
        LocalDenseVec<std::int64_t> x;
        x.vals = {1, 2};
        for (auto part : {SpMVPart::row, SpMVPart::col})
            CHECK(local_spmv(a, x, sr, part).vals == std::vector<std::int64_t>{8, 5});
    }
    SUBCASE("boolean semiring") {
        Triples<I, std::uint8_t> t;
        t.nrows = t.ncols = 2;
        t.push_back(0, 1, 1);
        auto a = build_csc(t, [](std::uint8_t x, std::uint8_t) { return x; });
        LocalDenseVec<std::uint8_t> x;
        x.vals = {0, 1};
        for (auto part : {SpMVPart::row, SpMVPart::col})
            CHECK(local_spmv(a, x, OrAnd{}, part).vals == std::vector<std::uint8_t>{1, 0});
    }
    SUBCASE("dimension mismatch") {
        auto eye = build_csc(identity(3), plus_i);
        LocalDenseVec<std::int64_t> x;
        x.vals = {1, 2};
        CHECK_THROWS_AS(local_spmv(eye, x, sr), DimError);
    }
}

TEST_CASE("local_spmspv") {
    PlusTimesI64 sr;
    Rng rng(4242);
    SUBCASE("single nonzero selects one scaled column") {
        auto ta = oracle::random_triples<I, std::int64_t>(rng, 12, 12, 0.3, oracle::small_int);
        auto a = build_csc(ta, plus_i);
        LocalSparseVec<I, std::int64_t> x;
        x.n = 12;
        x.idx = {5};
        x.vals = {3};
        for (auto alg : {SpMSpVAlg::heap, SpMSpVAlg::spa, SpMSpVAlg::bucket}) {
            auto y = local_spmspv(a, x, sr, alg);
            auto col = a.column(5);
            REQUIRE(y.nnz() == col.nnz());
            for (std::size_t k = 0; k < col.nnz(); ++k) {
                CHECK(y.idx[k] == col.rows[k]);
                CHECK(y.vals[k] == col.vals[k] * 3);
            }
        }
    }
    SUBCASE("empty input gives empty output") {
        auto a = build_csc(identity(4), plus_i);
        LocalSparseVec<I, std::int64_t> x;
        x.n = 4;
        for (auto alg : {SpMSpVAlg::heap, SpMSpVAlg::spa, SpMSpVAlg::bucket})
            CHECK(local_spmspv(a, x, sr, alg).nnz() == 0);
    }
    SUBCASE("all variants match the densified spmv oracle across densities") {
        for (double f : {0.001, 0.01, 0.1, 0.5}) {
            auto ta = oracle::random_triples<I, std::int64_t>(rng, 64, 64, 0.1, oracle::small_int);
            auto a = build_csc(ta, plus_i);
            LocalSparseVec<I, std::int64_t> x;
            x.n = 64;
            for (I i = 0; i < 64; ++i) {
                if (rng.next_double() < f) {
                    x.idx.push_back(i);
                    x.vals.push_back(oracle::small_int(rng));
                }
            }
            auto xd = densify<I, std::int64_t>(x, 0);
            auto want_rows = oracle::spmv(oracle::canonical(ta, plus_i), xd.vals, sr);
            // restrict the oracle to structurally reached rows
            LocalSparseVec<I, std::int64_t> want;
            want.n = 64;
            {
                std::vector<char> reach(64, 0);
                for (std::size_t k = 0; k < x.nnz(); ++k) {
                    auto col = a.column(x.idx[k]);
                    for (std::size_t e = 0; e < col.nnz(); ++e) reach[static_cast<std::size_t>(col.rows[e])] = 1;
                }
                for (I i = 0; i < 64; ++i)
                    if (reach[static_cast<std::size_t>(i)]) {
                        want.idx.push_back(i);
                        want.vals.push_back(want_rows[static_cast<std::size_t>(i)]);
                    }
            }
            for (auto alg : {SpMSpVAlg::heap, SpMSpVAlg::spa, SpMSpVAlg::bucket})
                for (int t : {1, 2, 4}) CHECK(local_spmspv(a, x, sr, alg, t) == want);
        }
    }
    SUBCASE("multiply count hits the structural lower bound sum") {
        auto ta = oracle::random_triples<I, std::int64_t>(rng, 48, 48, 0.2, oracle::small_int);
        auto a = build_csc(ta, plus_i);
        LocalSparseVec<I, std::int64_t> x;
        x.n = 48;
        for (I i = 0; i < 48; i += 5) {
            x.idx.push_back(i);
            x.vals.push_back(1);
        }
        std::int64_t expect = 0;
        for (auto j : x.idx) expect += static_cast<std::int64_t>(a.col_nnz(j));
        for (auto alg : {SpMSpVAlg::heap, SpMSpVAlg::spa, SpMSpVAlg::bucket}) {
            std::atomic<std::int64_t> mults{0};
            CountingSr<PlusTimesI64> counting{PlusTimesI64{}, &mults};
            (void)local_spmspv(a, x, counting, alg);
            CHECK(mults.load() == expect);
        }
    }
}

TEST_CASE("kernel statistics records") {
    Rng rng(90);
    auto ta = oracle::random_triples<I, std::int64_t>(rng, 20, 10, 0.2, oracle::small_int);
    auto a = build_csc(ta, plus_i);
    auto stats = matrix_stats(a);
    CHECK(stats.nnz == static_cast<std::int64_t>(a.nnz()));
    CHECK(stats.ncols == 10);
    CHECK(stats.avg_nnz_per_column == doctest::Approx(static_cast<double>(a.nnz()) / 10.0));

    LocalSparseVec<I, std::int64_t> x;
    x.n = 10;
    x.idx = {1, 4};
    x.vals = {1, 1};
    auto y = local_spmspv(a, x, PlusTimesI64{}, SpMSpVAlg::spa, 2);
    auto s = spmspv_stats(a, x, y, 2);
    CHECK(s.input_density == doctest::Approx(0.2));
    CHECK(s.output_density == doctest::Approx(static_cast<double>(y.nnz()) / 20.0));
    CHECK(s.threads == 2);
    CHECK(s.input_density >= 0.0);
    CHECK(s.output_density <= 1.0);
}

TEST_CASE("local_spmm") {
    PlusTimesI64 sr;
    Rng rng(17);
    auto ta = oracle::random_triples<I, std::int64_t>(rng, 16, 16, 0.2, oracle::small_int);
    auto a = build_csc(ta, plus_i);
    SUBCASE("k = 1 equals spmv") {
        LocalDenseVec<std::int64_t> x;
        for (I i = 0; i < 16; ++i) x.vals.push_back(oracle::small_int(rng));
        LocalDenseMat<std::int64_t> xm;
        xm.nrows = 16;
        xm.ncols = 1;
        xm.vals = x.vals;
        auto y = local_spmm(a, xm, sr);
        CHECK(y.vals == local_spmv(a, x, sr).vals);
    }
    SUBCASE("A times I densifies A") {
        auto xm = LocalDenseMat<std::int64_t>::zeros(16, 16, 0);
        for (I i = 0; i < 16; ++i) xm.at(i, i) = 1;
        auto y = local_spmm(a, xm, sr);
        a.for_each_col([&](ColView<I, std::int64_t> cv) {
            for (std::size_t k = 0; k < cv.nnz(); ++k) CHECK(y.at(cv.rows[k], cv.col) == cv.vals[k]);
        });
    }
    SUBCASE("random k=4 equals column-by-column spmv") {
        LocalDenseMat<std::int64_t> xm = LocalDenseMat<std::int64_t>::zeros(16, 4, 0);
        for (auto& v : xm.vals) v = oracle::small_int(rng);
        for (int t : {1, 3}) {
            auto y = local_spmm(a, xm, sr, t);
            for (std::int64_t c = 0; c < 4; ++c) {
                LocalDenseVec<std::int64_t> xc;
                for (std::int64_t i = 0; i < 16; ++i) xc.vals.push_back(xm.at(i, c));
                auto yc = local_spmv(a, xc, sr);
                for (std::int64_t i = 0; i < 16; ++i) CHECK(y.at(i, c) == yc.vals[static_cast<std::size_t>(i)]);
            }
        }
    }
}
