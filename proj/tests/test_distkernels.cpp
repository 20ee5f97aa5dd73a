#include <doctest.h>

#include "dist_support.hpp"
#include "slap/batched.hpp"
#include "slap/dist_spmv.hpp"
#include "slap/spgemm3d.hpp"
#include "slap/summa.hpp"

using namespace slap;
using dist_support::canonical64;
using dist_support::dist_from;
using dist_support::random_global;
using dist_support::triples_equal;

namespace {
auto firstd = [](const double& a, const double&) { return a; };
auto plusd = [](const double& a, const double&) { return a; };

Triples<GlobalIdx, double> oracle_product(const Triples<GlobalIdx, double>& a, const Triples<GlobalIdx, double>& b) {
    Triples<std::int32_t, double> a32, b32;
    a32.nrows = static_cast<std::int32_t>(a.nrows);
    a32.ncols = static_cast<std::int32_t>(a.ncols);
    for (std::size_t k = 0; k < a.size(); ++k)
        a32.push_back(static_cast<std::int32_t>(a.rows[k]), static_cast<std::int32_t>(a.cols[k]), a.vals[k]);
    b32.nrows = static_cast<std::int32_t>(b.nrows);
    b32.ncols = static_cast<std::int32_t>(b.ncols);
    for (std::size_t k = 0; k < b.size(); ++k)
        b32.push_back(static_cast<std::int32_t>(b.rows[k]), static_cast<std::int32_t>(b.cols[k]), b.vals[k]);
    auto c32 = oracle::spgemm(a32, b32, PlusTimes<double>{});
    Triples<GlobalIdx, double> c;
    c.nrows = a.nrows;
    c.ncols = b.ncols;
    for (std::size_t k = 0; k < c32.size(); ++k) c.push_back(c32.rows[k], c32.cols[k], c32.vals[k]);
    return c;
}
} // namespace

TEST_CASE("summa2d equals the local product") {
    Rng rng(100);
    SUBCASE("p = 1 reduces to local_spgemm") {
        auto ta = random_global<double>(rng, 10, 12, 0.2, oracle::small_double);
        auto tb = random_global<double>(rng, 12, 9, 0.2, oracle::small_double);
        auto want = oracle_product(canonical64(ta, firstd), canonical64(tb, firstd));
        run_world(1, [&](Comm& c) {
            auto g = make_square_grid2d(c);
            auto got = gather_matrix(summa2d_spgemm(dist_from(ta, g), dist_from(tb, g), PlusTimes<double>{}));
            CHECK(triples_equal(got, want));
        });
    }
    SUBCASE("random 16x16 on a 2x2 grid matches the dense oracle") {
        auto ta = random_global<double>(rng, 16, 16, 0.25, oracle::small_double);
        auto tb = random_global<double>(rng, 16, 16, 0.25, oracle::small_double);
        auto want = oracle_product(canonical64(ta, firstd), canonical64(tb, firstd));
        run_world(4, [&](Comm& c) {
            auto g = make_square_grid2d(c);
            auto got = gather_matrix(summa2d_spgemm(dist_from(ta, g), dist_from(tb, g), PlusTimes<double>{}));
            CHECK(triples_equal(got, want));
        });
    }
    SUBCASE("2x2 grid runs exactly 2 stages with 2 broadcasts per row and column group") {
        auto ta = random_global<double>(rng, 8, 8, 0.3, oracle::small_double);
        run_world(4, [&](Comm& c) {
            auto g = make_square_grid2d(c);
            auto a = dist_from(ta, g);
            auto before = c.counters();
            DistKernelStats st;
            (void)summa2d_spgemm(a, a, PlusTimes<double>{}, SpGemmAlg::hybrid, 1, &st);
            auto after = c.counters();
            CHECK(st.stages == 2);
            CHECK(after.kind_label(Coll::broadcast, GroupLabel::grid_row).calls -
                      before.kind_label(Coll::broadcast, GroupLabel::grid_row).calls == 2);
            CHECK(after.kind_label(Coll::broadcast, GroupLabel::grid_col).calls -
                      before.kind_label(Coll::broadcast, GroupLabel::grid_col).calls == 2);
        });
    }
    SUBCASE("non-square grids are rejected") {
        auto ta = random_global<double>(rng, 8, 8, 0.3, oracle::small_double);
        CHECK_THROWS_AS(run_world(8,
                                  [&](Comm& c) {
                                      auto g = make_grid2d(c, 2, 4);
                                      auto a = dist_from(ta, g);
                                      (void)summa2d_spgemm(a, a, PlusTimes<double>{});
                                  }),
                        ShapeError);
    }
}

TEST_CASE("summa2d over or_and and min_plus semirings") {
    Rng rng(150);
    SUBCASE("boolean reachability product") {
        auto ta = dist_support::random_global<std::uint8_t>(rng, 14, 14, 0.2, [](Rng&) { return std::uint8_t{1}; });
        auto tb = dist_support::random_global<std::uint8_t>(rng, 14, 14, 0.2, [](Rng&) { return std::uint8_t{1}; });
        auto want = oracle::spgemm(
            [&] {
                Triples<std::int32_t, std::uint8_t> x;
                x.nrows = x.ncols = 14;
                auto cc = canonical64(ta, [](const std::uint8_t& a, const std::uint8_t&) { return a; });
                for (std::size_t k = 0; k < cc.size(); ++k)
                    x.push_back(static_cast<std::int32_t>(cc.rows[k]), static_cast<std::int32_t>(cc.cols[k]), cc.vals[k]);
                return x;
            }(),
            [&] {
                Triples<std::int32_t, std::uint8_t> x;
                x.nrows = x.ncols = 14;
                auto cc = canonical64(tb, [](const std::uint8_t& a, const std::uint8_t&) { return a; });
                for (std::size_t k = 0; k < cc.size(); ++k)
                    x.push_back(static_cast<std::int32_t>(cc.rows[k]), static_cast<std::int32_t>(cc.cols[k]), cc.vals[k]);
                return x;
            }(),
            OrAnd{});
        run_world(4, [&](Comm& c) {
            auto g = make_square_grid2d(c);
            auto got = gather_matrix(summa2d_spgemm(dist_from(ta, g), dist_from(tb, g), OrAnd{}));
            REQUIRE(got.size() == want.size());
            for (std::size_t k = 0; k < got.size(); ++k) {
                CHECK(got.rows[k] == want.rows[k]);
                CHECK(got.cols[k] == want.cols[k]);
                CHECK(got.vals[k] == want.vals[k]);
            }
        });
    }
    SUBCASE("tropical shortest-path step") {
        auto ta = dist_support::random_global<double>(rng, 12, 12, 0.25, oracle::small_double);
        auto want = oracle::spgemm(
            [&] {
                Triples<std::int32_t, double> x;
                x.nrows = x.ncols = 12;
                auto cc = canonical64(ta, firstd);
                for (std::size_t k = 0; k < cc.size(); ++k)
                    x.push_back(static_cast<std::int32_t>(cc.rows[k]), static_cast<std::int32_t>(cc.cols[k]), cc.vals[k]);
                return x;
            }(),
            [&] {
                Triples<std::int32_t, double> x;
                x.nrows = x.ncols = 12;
                auto cc = canonical64(ta, firstd);
                for (std::size_t k = 0; k < cc.size(); ++k)
                    x.push_back(static_cast<std::int32_t>(cc.rows[k]), static_cast<std::int32_t>(cc.cols[k]), cc.vals[k]);
                return x;
            }(),
            MinPlusF64{});
        run_world(9, [&](Comm& c) {
            auto g = make_square_grid2d(c);
            auto a = dist_from(ta, g);
            auto got = gather_matrix(summa2d_spgemm(a, a, MinPlusF64{}));
            REQUIRE(got.size() == want.size());
            for (std::size_t k = 0; k < got.size(); ++k) {
                CHECK(got.rows[k] == want.rows[k]);
                CHECK(got.cols[k] == want.cols[k]);
                CHECK(got.vals[k] == want.vals[k]); // min/plus on exact doubles
            }
        });
    }
}

TEST_CASE("ca3d equals summa2d and the oracle") {
    Rng rng(200);
    SUBCASE("c = 1 gives the 2D result") {
        auto ta = random_global<double>(rng, 12, 12, 0.25, oracle::small_double);
        auto tb = random_global<double>(rng, 12, 12, 0.25, oracle::small_double);
        run_world(4, [&](Comm& c) {
            auto g = make_square_grid2d(c);
            auto a = dist_from(ta, g);
            auto b = dist_from(tb, g);
            auto flat = gather_matrix(summa2d_spgemm(a, b, PlusTimes<double>{}));
            auto g3 = make_grid3d(c, 1);
            auto c3 = ca3d_spgemm(redistribute_3d(a, g3, SplitDim::cols), redistribute_3d(b, g3, SplitDim::rows),
                                  PlusTimes<double>{});
            CHECK(triples_equal(gather_matrix(c3), flat));
        });
    }
    SUBCASE("p = 8, c = 2 on random 16x16 matches the dense oracle") {
        auto ta = random_global<double>(rng, 16, 16, 0.25, oracle::small_double);
        auto tb = random_global<double>(rng, 16, 16, 0.25, oracle::small_double);
        auto want = oracle_product(canonical64(ta, firstd), canonical64(tb, firstd));
        run_world(8, [&](Comm& c) {
            auto g = make_grid2d(c, 2, 4); // feeder grid for I/O-style 2D distribution
            auto a = dist_from(ta, g);
            auto b = dist_from(tb, g);
            auto g3 = make_grid3d(c, 2);
            auto c3 = ca3d_spgemm(redistribute_3d(a, g3, SplitDim::cols), redistribute_3d(b, g3, SplitDim::rows),
                                  PlusTimes<double>{});
            CHECK(triples_equal(gather_matrix(c3), want));
        });
    }
    SUBCASE("output is column-split like A and the exchange stays on fibers") {
        auto ta = random_global<double>(rng, 24, 24, 0.2, oracle::small_double);
        run_world(16, [&](Comm& c) {
            auto g = make_square_grid2d(c);
            auto a = dist_from(ta, g);
            auto g3 = make_grid3d(c, 4);
            auto a3 = redistribute_3d(a, g3, SplitDim::cols);
            auto b3 = redistribute_3d(a, g3, SplitDim::rows);
            auto before = c.counters();
            auto c3 = ca3d_spgemm(a3, b3, PlusTimes<double>{});
            auto after = c.counters();
            CHECK(c3.split == SplitDim::cols);
            // the only alltoallv inside ca3d is the inter-layer exchange on
            // a group of exactly c ranks
            CHECK(after.kind(Coll::alltoallv).calls - before.kind(Coll::alltoallv).calls == 1);
            CHECK(after.kind_groupsize(Coll::alltoallv, 4).calls -
                      before.kind_groupsize(Coll::alltoallv, 4).calls == 1);
            CHECK(after.kind_label(Coll::alltoallv, GroupLabel::fiber).calls -
                      before.kind_label(Coll::alltoallv, GroupLabel::fiber).calls == 1);
        });
    }
    SUBCASE("layer-count guideline only warns") {
        auto ta = random_global<double>(rng, 8, 8, 0.3, oracle::small_double);
        run_world(4, [&](Comm& c) {
            auto g = make_square_grid2d(c);
            auto a = dist_from(ta, g);
            auto g3 = make_grid3d(c, 4); // c=4 > cbrt(4), still legal
            DistKernelStats st;
            auto c3 = ca3d_spgemm(redistribute_3d(a, g3, SplitDim::cols), redistribute_3d(a, g3, SplitDim::rows),
                                  PlusTimes<double>{}, SpGemmAlg::hybrid, 1, &st);
            CHECK(st.layer_warning);
            CHECK(gather_matrix(c3).size() > 0);
        });
    }
}

TEST_CASE("batched spgemm concatenates to the unbatched product") {
    Rng rng(300);
    auto ta = random_global<double>(rng, 20, 20, 0.25, oracle::small_double);
    auto tb = random_global<double>(rng, 20, 20, 0.25, oracle::small_double);
    run_world(4, [&](Comm& c) {
        auto g = make_square_grid2d(c);
        auto a = dist_from(ta, g);
        auto b = dist_from(tb, g);
        auto unbatched = gather_matrix(summa2d_spgemm(a, b, PlusTimes<double>{}));
        for (int bcount : {1, 2, 4, 8}) {
            auto plan = plan_batches_by_count(b.ncols, bcount);
            Triples<GlobalIdx, double> all;
            all.nrows = a.nrows;
            all.ncols = b.ncols;
            int calls = 0;
            batched_spgemm(a, b, plan, PlusTimes<double>{}, SpGemmAlg::hybrid, 1,
                           [&](int idx, GlobalIdx s, GlobalIdx e, const DistSparseMat2D<double>& cr) {
                               CHECK(idx == calls);
                               ++calls;
                               CHECK(e >= s);
                               auto part = gather_matrix(cr);
                               for (std::size_t k = 0; k < part.size(); ++k)
                                   all.push_back(part.rows[k], part.cols[k] + s, part.vals[k]);
                           });
            CHECK(calls == bcount);
            CHECK(triples_equal(canonical64(all, plusd), unbatched));
        }
    });
}

TEST_CASE("budget-driven batch planning") {
    Rng rng(301);
    auto ta = random_global<double>(rng, 24, 24, 0.3, oracle::small_double);
    run_world(4, [&](Comm& c) {
        auto g = make_square_grid2d(c);
        auto a = dist_from(ta, g);
        auto counts = dist_symbolic_col_nnz(a, a);
        std::int64_t maxcol = 0, total = 0;
        for (auto v : counts) {
            maxcol = std::max(maxcol, v);
            total += v;
        }
        const std::int64_t budget = std::max<std::int64_t>(maxcol * kBatchEntryBytes, 1) * 2;
        auto plan = plan_batches_by_budget(a, a, budget);
        CHECK(plan.batches() >= 1);
        GlobalIdx covered = 0;
        for (int r = 0; r < plan.batches(); ++r) {
            CHECK(plan.est_entries[static_cast<std::size_t>(r)] * kBatchEntryBytes <= budget);
            covered += plan.col_ranges[static_cast<std::size_t>(r)].second -
                       plan.col_ranges[static_cast<std::size_t>(r)].first;
        }
        CHECK(covered == a.ncols);
        // verify the plan against the unbatched product
        auto unbatched = gather_matrix(summa2d_spgemm(a, a, PlusTimes<double>{}));
        Triples<GlobalIdx, double> all;
        all.nrows = a.nrows;
        all.ncols = a.ncols;
        batched_spgemm(a, a, plan, PlusTimes<double>{}, SpGemmAlg::hash, 1,
                       [&](int, GlobalIdx s, GlobalIdx, const DistSparseMat2D<double>& cr) {
                           auto part = gather_matrix(cr);
                           for (std::size_t k = 0; k < part.size(); ++k)
                               all.push_back(part.rows[k], part.cols[k] + s, part.vals[k]);
                       });
        CHECK(triples_equal(canonical64(all, plusd), unbatched));
        // a budget below the largest single column is impossible
        if (maxcol > 0)
            CHECK_THROWS_AS((void)plan_batches_by_budget(a, a, maxcol * kBatchEntryBytes - 1), BudgetError);
    });
}

TEST_CASE("dist_spmv") {
    Rng rng(400);
    SUBCASE("p = 1 equals local_spmv; random 24x24 on 2x2 matches the oracle") {
        auto ta = random_global<double>(rng, 24, 24, 0.2, oracle::small_double);
        std::vector<double> xg(24);
        for (auto& v : xg) v = oracle::small_double(rng);
        auto want = oracle::spmv(
            [&] {
                Triples<std::int32_t, double> t32;
                t32.nrows = 24;
                t32.ncols = 24;
                auto canon = canonical64(ta, firstd);
                for (std::size_t k = 0; k < canon.size(); ++k)
                    t32.push_back(static_cast<std::int32_t>(canon.rows[k]), static_cast<std::int32_t>(canon.cols[k]),
                                  canon.vals[k]);
                return t32;
            }(),
            xg, PlusTimes<double>{});
        for (int p : {1, 4}) {
            run_world(p, [&](Comm& c) {
                auto g = make_square_grid2d(c);
                auto a = dist_from(ta, g);
                auto x = make_dist_vec<double>(g, 24, [&](GlobalIdx i) { return xg[static_cast<std::size_t>(i)]; });
                auto y = gather_vec(dist_spmv(a, x, PlusTimes<double>{}));
                REQUIRE(y.size() == want.size());
                for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == doctest::Approx(want[i]).epsilon(1e-12));
            });
        }
    }
    SUBCASE("permutation consistency") {
        auto ta = random_global<double>(rng, 20, 20, 0.25, oracle::small_double);
        std::vector<double> xg(20);
        for (auto& v : xg) v = oracle::small_double(rng);
        run_world(4, [&](Comm& c) {
            auto g = make_square_grid2d(c);
            auto a = dist_from(ta, g);
            auto perm = random_permute(a, 9);
            auto colp = gather_vec(perm.col_perm);
            auto rowp = gather_vec(perm.row_perm);
            // x'( colperm(j) ) = x(j)
            std::vector<double> xp(20);
            for (std::size_t j = 0; j < 20; ++j) xp[static_cast<std::size_t>(colp[j])] = xg[j];
            auto x = make_dist_vec<double>(g, 20, [&](GlobalIdx i) { return xg[static_cast<std::size_t>(i)]; });
            auto xpv = make_dist_vec<double>(g, 20, [&](GlobalIdx i) { return xp[static_cast<std::size_t>(i)]; });
            auto y = gather_vec(dist_spmv(a, x, PlusTimes<double>{}));
            auto yp = gather_vec(dist_spmv(perm.matrix, xpv, PlusTimes<double>{}));
            for (std::size_t i = 0; i < 20; ++i)
                CHECK(yp[static_cast<std::size_t>(rowp[i])] == doctest::Approx(y[i]).epsilon(1e-12));
        });
    }
}

TEST_CASE("dist_spmspv") {
    Rng rng(500);
    auto ta = random_global<double>(rng, 24, 24, 0.2, oracle::small_double);
    SUBCASE("empty input gives an empty output") {
        run_world(4, [&](Comm& c) {
            auto g = make_square_grid2d(c);
            auto a = dist_from(ta, g);
            DistSparseVec<double> x;
            x.grid = g;
            x.n = 24;
            x.local.n = static_cast<LocalIdx>(vector_layout(24, g).sub_len(g.myrow, g.mycol));
            auto y = dist_spmspv(a, x, PlusTimes<double>{});
            CHECK(dist_nnz(y) == 0);
        });
    }
    SUBCASE("matches dist_spmv on the densified vector at f in {0.01, 0.1}") {
        for (double f : {0.01, 0.1}) {
            std::vector<double> xg(24, 0.0);
            Rng vr(rng.next_u64());
            for (auto& v : xg)
                if (vr.next_double() < f) v = oracle::small_double(vr);
            run_world(4, [&](Comm& c) {
                auto g = make_square_grid2d(c);
                auto a = dist_from(ta, g);
                auto xd = make_dist_vec<double>(g, 24, [&](GlobalIdx i) { return xg[static_cast<std::size_t>(i)]; });
                auto xs = sparsify_dist(xd, 0.0);
                for (auto alg : {SpMSpVAlg::heap, SpMSpVAlg::spa, SpMSpVAlg::bucket}) {
                    auto ys = gather_sparse_vec(dist_spmspv(a, xs, PlusTimes<double>{}, alg));
                    auto yd = gather_vec(dist_spmv(a, xd, PlusTimes<double>{}));
                    for (const auto& [idx, val] : ys)
                        CHECK(val == doctest::Approx(yd[static_cast<std::size_t>(idx)]).epsilon(1e-12));
                }
            });
        }
    }
    SUBCASE("a single nonzero selects one global column") {
        run_world(4, [&](Comm& c) {
            auto g = make_square_grid2d(c);
            auto a = dist_from(ta, g);
            const GlobalIdx j = 17;
            DistSparseVec<double> x;
            x.grid = g;
            x.n = 24;
            auto lay = vector_layout(24, g);
            x.local.n = static_cast<LocalIdx>(lay.sub_len(g.myrow, g.mycol));
            auto o = lay.owner(j);
            if (o.row == g.myrow && o.col == g.mycol) {
                x.local.idx.push_back(static_cast<LocalIdx>(o.offset));
                x.local.vals.push_back(2.0);
            }
            auto y = gather_sparse_vec(dist_spmspv(a, x, PlusTimes<double>{}));
            auto canon = canonical64(ta, firstd);
            std::vector<std::pair<GlobalIdx, double>> want;
            for (std::size_t k = 0; k < canon.size(); ++k)
                if (canon.cols[k] == j) want.emplace_back(canon.rows[k], canon.vals[k] * 2.0);
            REQUIRE(y.size() == want.size());
            for (std::size_t k = 0; k < y.size(); ++k) {
                CHECK(y[k].first == want[k].first);
                CHECK(y[k].second == doctest::Approx(want[k].second).epsilon(1e-12));
            }
        });
    }
}

TEST_CASE("dist_spmm") {
    Rng rng(600);
    auto ta = random_global<double>(rng, 16, 16, 0.25, oracle::small_double);
    LocalDenseMat<double> xg = LocalDenseMat<double>::zeros(16, 3);
    for (auto& v : xg.vals) v = oracle::small_double(rng);
    run_world(4, [&](Comm& c) {
        auto g = make_square_grid2d(c);
        auto a = dist_from(ta, g);

        // k = 1 agrees with dist_spmv
        auto x1 = make_dist_dense<double>(g, DenseLayout::rowsplit, 16, 1, [&](GlobalIdx i, GlobalIdx) {
            return xg.at(i, 0);
        });
        auto xv = make_dist_vec<double>(g, 16, [&](GlobalIdx i) { return xg.at(i, 0); });
        auto y1 = gather_dense(dist_spmm(a, x1, PlusTimes<double>{}));
        auto yv = gather_vec(dist_spmv(a, xv, PlusTimes<double>{}));
        for (std::size_t i = 0; i < 16; ++i)
            CHECK(y1.at(static_cast<std::int64_t>(i), 0) == doctest::Approx(yv[i]).epsilon(1e-12));

        // k = 3 against the column-by-column oracle, with zero sparse bytes moved
        auto x3 = make_dist_dense<double>(g, DenseLayout::rowsplit, 16, 3, [&](GlobalIdx i, GlobalIdx j) {
            return xg.at(i, j);
        });
        auto before = c.counters().tag_bytes(PayloadTag::sparse_matrix);
        auto y3 = gather_dense(dist_spmm(a, x3, PlusTimes<double>{}));
        auto after = c.counters().tag_bytes(PayloadTag::sparse_matrix);
        CHECK(after - before == 0);
        for (std::int64_t col = 0; col < 3; ++col) {
            auto xc = make_dist_vec<double>(g, 16, [&](GlobalIdx i) { return xg.at(i, col); });
            auto yc = gather_vec(dist_spmv(a, xc, PlusTimes<double>{}));
            for (std::size_t i = 0; i < 16; ++i)
                CHECK(y3.at(static_cast<std::int64_t>(i), col) == doctest::Approx(yc[i]).epsilon(1e-12));
        }
    });
}

TEST_CASE("vec_assign and vec_extract") {
    SUBCASE("worked examples") {
        run_world(4, [&](Comm& c) {
            auto g = make_square_grid2d(c);
            // scatter x=[9,7] to ind=[3,0] in a length-4 zero vector
            auto y = make_const_vec<double>(g, 4, 0.0);
            auto ind = make_dist_vec<GlobalIdx>(g, 2, [](GlobalIdx k) { return k == 0 ? 3 : 0; });
            auto x = make_dist_vec<double>(g, 2, [](GlobalIdx k) { return k == 0 ? 9.0 : 7.0; });
            vec_assign(y, ind, x);
            CHECK(gather_vec(y) == std::vector<double>{7.0, 0.0, 0.0, 9.0});

            // extract with identity indices copies x
            auto idn = make_iota_vec(g, 2);
            auto r = vec_extract(x, idn);
            CHECK(gather_vec(r) == std::vector<double>{9.0, 7.0});

            // assign over the full range with identity turns y into x
            auto y2 = make_const_vec<double>(g, 2, 0.0);
            vec_assign(y2, idn, x);
            CHECK(gather_vec(y2) == std::vector<double>{9.0, 7.0});
        });
    }
    SUBCASE("assign runs in one alltoallv round, extract in two") {
        run_world(4, [&](Comm& c) {
            auto g = make_square_grid2d(c);
            auto y = make_const_vec<double>(g, 12, 0.0);
            auto ind = make_iota_vec(g, 12);
            auto x = make_const_vec<double>(g, 12, 1.0);
            auto before = c.counters().kind(Coll::alltoallv).calls;
            vec_assign(y, ind, x);
            auto mid = c.counters().kind(Coll::alltoallv).calls;
            CHECK(mid - before == 1);
            (void)vec_extract(x, ind);
            auto after = c.counters().kind(Coll::alltoallv).calls;
            CHECK(after - mid == 2); // request plus reply
        });
    }
    SUBCASE("duplicate assign targets resolve by (rank, position) order") {
        run_world(1, [&](Comm& c) {
            auto g = make_square_grid2d(c);
            auto y = make_const_vec<double>(g, 3, 0.0);
            auto ind = make_dist_vec<GlobalIdx>(g, 3, [](GlobalIdx) { return 1; });
            auto x = make_dist_vec<double>(g, 3, [](GlobalIdx k) { return static_cast<double>(k + 1); });
            vec_assign(y, ind, x);
            CHECK(gather_vec(y) == std::vector<double>{0.0, 3.0, 0.0}); // last writer
        });
    }
    SUBCASE("out-of-range indices throw IndexError") {
        CHECK_THROWS_AS(run_world(1,
                                  [&](Comm& c) {
                                      auto g = make_square_grid2d(c);
                                      auto y = make_const_vec<double>(g, 2, 0.0);
                                      auto ind = make_dist_vec<GlobalIdx>(g, 1, [](GlobalIdx) { return 5; });
                                      auto x = make_const_vec<double>(g, 1, 1.0);
                                      vec_assign(y, ind, x);
                                  }),
                        IndexError);
    }
}
