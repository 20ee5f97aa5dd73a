#include <doctest.h>

#include <map>

#include "dist_support.hpp"
#include "slap/algorithms.hpp"

using namespace slap;
using dist_support::canonical64;
using dist_support::dist_from;
using dist_support::random_global;
using dist_support::triples_equal;

namespace {

Triples<GlobalIdx, double> path_graph(GlobalIdx n) {
    Triples<GlobalIdx, double> t;
    t.nrows = t.ncols = n;
    for (GlobalIdx i = 0; i + 1 < n; ++i) {
        t.push_back(i, i + 1, 1.0);
        t.push_back(i + 1, i, 1.0);
    }
    return t;
}

Triples<GlobalIdx, double> random_sym_graph(Rng& rng, GlobalIdx n, double density) {
    auto t = random_global<double>(rng, n, n, density, [](Rng&) { return 1.0; });
    Triples<GlobalIdx, double> sym;
    sym.nrows = sym.ncols = n;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t.rows[k] == t.cols[k]) continue;
        sym.push_back(t.rows[k], t.cols[k], 1.0);
        sym.push_back(t.cols[k], t.rows[k], 1.0);
    }
    return sym;
}

bool same_partition(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
    if (a.size() != b.size()) return false;
    std::map<std::int64_t, std::int64_t> fwd, rev;
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto f = fwd.emplace(a[i], b[i]);
        if (!f.second && f.first->second != b[i]) return false;
        auto r = rev.emplace(b[i], a[i]);
        if (!r.second && r.first->second != a[i]) return false;
    }
    return true;
}

} // namespace

TEST_CASE("gen_rmat") {
    SUBCASE("deterministic per seed, size matches the scale") {
        std::vector<Triples<GlobalIdx, double>> gathered;
        for (int rep = 0; rep < 2; ++rep) {
            run_world(4, [&](Comm& c) {
                auto g = make_square_grid2d(c);
                RmatParams p;
                p.scale = 7;
                p.edge_factor = 8;
                p.seed = 42;
                auto a = gen_rmat(p, g);
                if (c.rank() == 0)
                    gathered.push_back(gather_matrix(a));
                else
                    (void)gather_matrix(a);
            });
        }
        CHECK(gathered[0].nrows == 128);
        CHECK(triples_equal(gathered[0], gathered[1]));
    }
    SUBCASE("identical matrices across rank counts") {
        std::vector<Triples<GlobalIdx, double>> gathered;
        for (int p : {1, 4}) {
            run_world(p, [&](Comm& c) {
                auto g = make_square_grid2d(c);
                RmatParams params;
                params.scale = 6;
                params.seed = 5;
                auto a = gen_rmat(params, g);
                if (c.rank() == 0)
                    gathered.push_back(gather_matrix(a));
                else
                    (void)gather_matrix(a);
            });
        }
        CHECK(triples_equal(gathered[0], gathered[1]));
    }
    SUBCASE("scale 10 with edge factor 16 dedups into the expected band") {
        for (std::uint64_t seed : {1, 2, 3}) {
            run_world(1, [&](Comm& c) {
                auto g = make_square_grid2d(c);
                RmatParams p;
                p.scale = 10;
                p.edge_factor = 16;
                p.seed = seed;
                auto a = gen_rmat(p, g);
                const auto nnz = dist_nnz(a);
                const double full = 2.0 * 16.0 * 1024.0;
                CHECK(nnz >= static_cast<std::int64_t>(0.5 * full));
                CHECK(nnz <= static_cast<std::int64_t>(1.0 * full));
            });
        }
    }
    SUBCASE("probabilities must sum to one") {
        CHECK_THROWS_AS(run_world(1,
                                  [&](Comm& c) {
                                      auto g = make_square_grid2d(c);
                                      RmatParams p;
                                      p.a = 0.9;
                                      (void)gen_rmat(p, g);
                                  }),
                        ShapeError);
    }
}

TEST_CASE("bfs") {
    SUBCASE("single vertex, no edges") {
        Triples<GlobalIdx, double> t;
        t.nrows = t.ncols = 1;
        run_world(1, [&](Comm& c) {
            auto g = make_square_grid2d(c);
            auto levels = gather_vec(bfs(dist_from(t, g), 0));
            CHECK(levels == std::vector<std::int64_t>{0});
        });
    }
    SUBCASE("path 0-1-2 with an isolated vertex") {
        auto t = path_graph(3);
        t.nrows = t.ncols = 4; // vertex 3 is isolated
        run_world(4, [&](Comm& c) {
            auto g = make_square_grid2d(c);
            auto levels = gather_vec(bfs(dist_from(t, g), 0));
            CHECK(levels == std::vector<std::int64_t>{0, 1, 2, -1});
        });
    }
    SUBCASE("root out of range") {
        CHECK_THROWS_AS(run_world(1,
                                  [&](Comm& c) {
                                      auto g = make_square_grid2d(c);
                                      (void)bfs(dist_from(path_graph(3), g), 5);
                                  }),
                        IndexError);
    }
    SUBCASE("levels match the queue oracle and differ by at most 1 across edges") {
        Rng rng(20202);
        for (int trial = 0; trial < 6; ++trial) {
            auto t = random_sym_graph(rng, 40 + 10 * trial, 0.04);
            auto want = oracle::bfs_levels(t, 0);
            run_world(4, [&](Comm& c) {
                auto g = make_square_grid2d(c);
                for (auto alg : {SpMSpVAlg::heap, SpMSpVAlg::spa, SpMSpVAlg::bucket}) {
                    auto levels = gather_vec(bfs(dist_from(t, g), 0, alg));
                    CHECK(levels == want);
                }
            });
            for (std::size_t k = 0; k < t.size(); ++k) {
                const auto lu = want[static_cast<std::size_t>(t.rows[k])];
                const auto lv = want[static_cast<std::size_t>(t.cols[k])];
                if (lu >= 0 && lv >= 0) CHECK(std::abs(lu - lv) <= 1);
            }
        }
    }
}

TEST_CASE("fastsv_cc") {
    SUBCASE("empty graph has n singleton components") {
        Triples<GlobalIdx, double> t;
        t.nrows = t.ncols = 6;
        run_world(4, [&](Comm& c) {
            auto g = make_square_grid2d(c);
            auto res = fastsv_cc(dist_from(t, g));
            CHECK(res.components == 6);
            auto labels = gather_vec(res.labels);
            for (std::int64_t v = 0; v < 6; ++v) CHECK(labels[static_cast<std::size_t>(v)] == v);
        });
    }
    SUBCASE("path graph collapses to label 0") {
        run_world(4, [&](Comm& c) {
            auto g = make_square_grid2d(c);
            auto res = fastsv_cc(dist_from(path_graph(5), g));
            CHECK(res.components == 1);
            auto labels = gather_vec(res.labels);
            for (auto l : labels) CHECK(l == 0);
        });
    }
    SUBCASE("random graphs match union-find and terminate fast") {
        Rng rng(74);
        for (int trial = 0; trial < 20; ++trial) {
            const GlobalIdx n = 16 + static_cast<GlobalIdx>(rng.next_below(120));
            auto t = random_sym_graph(rng, n, 1.5 / static_cast<double>(n));
            auto want = oracle::components(t);
            run_world(4, [&](Comm& c) {
                auto g = make_square_grid2d(c);
                auto res = fastsv_cc(dist_from(t, g));
                auto labels = gather_vec(res.labels);
                CHECK(same_partition(labels, want));
                // with min-hooking, labels are exactly the component minima
                CHECK(labels == want);
                std::int64_t bound = 2;
                for (GlobalIdx x = 1; x < n; x *= 2) bound += 2;
                CHECK(res.iterations <= bound); // 2*ceil(log2 n) + 2
            });
        }
    }
    SUBCASE("labels are fixed points and nonincreasing across iterations") {
        Rng rng(75);
        auto t = random_sym_graph(rng, 64, 0.05);
        run_world(4, [&](Comm& c) {
            auto g = make_square_grid2d(c);
            auto res = fastsv_cc(dist_from(t, g));
            auto labels = gather_vec(res.labels);
            for (std::size_t v = 0; v < labels.size(); ++v)
                CHECK(labels[static_cast<std::size_t>(labels[v])] == labels[v]);
        });
    }
}

TEST_CASE("cc and bfs results are identical for p in {1,4,9,16} and any thread count") {
    Rng rng(313);
    auto t = random_sym_graph(rng, 60, 0.05);
    std::vector<std::vector<std::int64_t>> cc_runs, bfs_runs;
    for (int p : {1, 4, 9, 16}) {
        for (int threads : {1, 3}) {
            run_world(p, [&](Comm& c) {
                auto g = make_square_grid2d(c);
                auto a = dist_from(t, g);
                auto labels = gather_vec(fastsv_cc(a, threads).labels);
                auto levels = gather_vec(bfs(a, 0, SpMSpVAlg::bucket, threads));
                if (c.rank() == 0) {
                    cc_runs.push_back(std::move(labels));
                    bfs_runs.push_back(std::move(levels));
                }
            });
        }
    }
    for (std::size_t i = 1; i < cc_runs.size(); ++i) {
        CHECK(cc_runs[i] == cc_runs[0]);
        CHECK(bfs_runs[i] == bfs_runs[0]);
    }
}

TEST_CASE("pagerank") {
    SUBCASE("single vertex gets all the mass") {
        Triples<GlobalIdx, double> t;
        t.nrows = t.ncols = 1;
        run_world(1, [&](Comm& c) {
            auto g = make_square_grid2d(c);
            auto x = gather_vec(pagerank(dist_from(t, g), 0.85, 1e-12, 100));
            REQUIRE(x.size() == 1);
            CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-12));
        });
    }
    SUBCASE("two-vertex cycle splits evenly") {
        Triples<GlobalIdx, double> t;
        t.nrows = t.ncols = 2;
        t.push_back(0, 1, 1.0);
        t.push_back(1, 0, 1.0);
        run_world(1, [&](Comm& c) {
            auto g = make_square_grid2d(c);
            auto x = gather_vec(pagerank(dist_from(t, g), 0.85, 1e-12, 200));
            CHECK(x[0] == doctest::Approx(0.5).epsilon(1e-10));
            CHECK(x[1] == doctest::Approx(0.5).epsilon(1e-10));
        });
    }
    SUBCASE("directed chain matches the dense oracle within 1e-8 and sums to 1") {
        Triples<GlobalIdx, double> t;
        t.nrows = t.ncols = 3;
        t.push_back(0, 1, 1.0);
        t.push_back(1, 2, 1.0);
        Triples<std::int32_t, double> t32;
        t32.nrows = t32.ncols = 3;
        for (std::size_t k = 0; k < t.size(); ++k)
            t32.push_back(static_cast<std::int32_t>(t.rows[k]), static_cast<std::int32_t>(t.cols[k]), t.vals[k]);
        auto want = oracle::pagerank(t32, 0.85, 1e-13, 300);
        run_world(4, [&](Comm& c) {
            auto g = make_square_grid2d(c);
            auto x = gather_vec(pagerank(dist_from(t, g), 0.85, 1e-13, 300));
            double sum = 0;
            for (std::size_t i = 0; i < 3; ++i) {
                CHECK(std::abs(x[i] - want[i]) < 1e-8);
                sum += x[i];
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        });
    }
    SUBCASE("damping must be in (0,1)") {
        CHECK_THROWS_AS(run_world(1,
                                  [&](Comm& c) {
                                      auto g = make_square_grid2d(c);
                                      Triples<GlobalIdx, double> t;
                                      t.nrows = t.ncols = 2;
                                      (void)pagerank(dist_from(t, g), 1.5, 1e-9, 10);
                                  }),
                        ShapeError);
    }
}

TEST_CASE("mcl_step") {
    auto firstd = [](const double& a, const double&) { return a; };
    SUBCASE("identity is a fixed point") {
        Triples<GlobalIdx, double> t;
        t.nrows = t.ncols = 4;
        for (GlobalIdx i = 0; i < 4; ++i) t.push_back(i, i, 1.0);
        run_world(4, [&](Comm& c) {
            auto g = make_square_grid2d(c);
            MclOptions opt;
            opt.inflation = 2.0;
            opt.prune_threshold = 1e-8;
            auto out = mcl_step(dist_from(t, g), opt);
            CHECK(triples_equal(gather_matrix(out), canonical64(t, firstd)));
        });
    }
    SUBCASE("block-diagonal two-clique matrix stays block-diagonal") {
        // two 2-cliques, columns normalized to sum 1
        Triples<GlobalIdx, double> t;
        t.nrows = t.ncols = 4;
        for (GlobalIdx b : {0, 2}) {
            t.push_back(b, b, 0.5);
            t.push_back(b + 1, b, 0.5);
            t.push_back(b, b + 1, 0.5);
            t.push_back(b + 1, b + 1, 0.5);
        }
        run_world(1, [&](Comm& c) {
            auto g = make_square_grid2d(c);
            MclOptions opt;
            auto out = gather_matrix(mcl_step(dist_from(t, g), opt));
            for (std::size_t k = 0; k < out.size(); ++k)
                CHECK(out.rows[k] / 2 == out.cols[k] / 2); // never crosses blocks
        });
    }
    SUBCASE("4-vertex example matches the dense oracle per entry") {
        Triples<GlobalIdx, double> t;
        t.nrows = t.ncols = 4;
        // column-stochastic by construction
        t.push_back(0, 0, 0.5);
        t.push_back(1, 0, 0.5);
        t.push_back(1, 1, 0.25);
        t.push_back(2, 1, 0.75);
        t.push_back(2, 2, 1.0);
        t.push_back(3, 3, 0.4);
        t.push_back(0, 3, 0.6);
        Triples<std::int32_t, double> t32;
        t32.nrows = t32.ncols = 4;
        for (std::size_t k = 0; k < t.size(); ++k)
            t32.push_back(static_cast<std::int32_t>(t.rows[k]), static_cast<std::int32_t>(t.cols[k]), t.vals[k]);
        auto want = oracle::mcl_step_dense(t32, 2.0, 1e-4);
        for (int layers : {1, 2}) {
            run_world(layers == 1 ? 4 : 8, [&](Comm& c) {
                auto g = layers == 1 ? make_square_grid2d(c) : make_grid2d(c, 2, 4);
                MclOptions opt;
                opt.layers = layers;
                auto out = gather_matrix(mcl_step(dist_from(t, g), opt));
                std::vector<double> dense(16, 0.0);
                for (std::size_t k = 0; k < out.size(); ++k)
                    dense[static_cast<std::size_t>(out.rows[k] * 4 + out.cols[k])] = out.vals[k];
                for (std::size_t i = 0; i < 16; ++i) CHECK(std::abs(dense[i] - want[i]) <= 1e-12);
            });
        }
    }
    SUBCASE("output columns stay stochastic within 1e-9") {
        Rng rng(31);
        // build a random column-stochastic matrix
        Triples<GlobalIdx, double> t;
        t.nrows = t.ncols = 12;
        std::vector<double> colsum(12, 0.0);
        for (GlobalIdx j = 0; j < 12; ++j) {
            const int nout = 1 + static_cast<int>(rng.next_below(4));
            for (int e = 0; e < nout; ++e) {
                t.push_back(static_cast<GlobalIdx>(rng.next_below(12)), j, rng.next_double() + 0.1);
            }
        }
        // normalize per column (duplicates combined by add first)
        auto canon = canonical64(t, [](const double& a, const double& b) { return a + b; });
        for (std::size_t k = 0; k < canon.size(); ++k) colsum[static_cast<std::size_t>(canon.cols[k])] += canon.vals[k];
        for (std::size_t k = 0; k < canon.size(); ++k) canon.vals[k] /= colsum[static_cast<std::size_t>(canon.cols[k])];
        run_world(4, [&](Comm& c) {
            auto g = make_square_grid2d(c);
            MclOptions opt;
            opt.prune_threshold = 1e-6;
            auto out = gather_matrix(mcl_step(dist_from(canon, g), opt));
            std::vector<double> sums(12, 0.0);
            for (std::size_t k = 0; k < out.size(); ++k) sums[static_cast<std::size_t>(out.cols[k])] += out.vals[k];
            for (auto s : sums) CHECK(std::abs(s - 1.0) <= 1e-9);
        });
    }
    SUBCASE("non-stochastic input is rejected") {
        Triples<GlobalIdx, double> t;
        t.nrows = t.ncols = 2;
        t.push_back(0, 0, 0.7);
        t.push_back(1, 1, 1.0);
        CHECK_THROWS_AS(run_world(1,
                                  [&](Comm& c) {
                                      auto g = make_square_grid2d(c);
                                      (void)mcl_step(dist_from(t, g), MclOptions{});
                                  }),
                        StochasticityError);
    }
}
