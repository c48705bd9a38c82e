#include "napmg/solve.hpp"
#include "napmg/stencil.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <stdexcept>

#include <cmath>

using namespace napmg;

namespace {

PartitionedMatrix dist(const CsrMatrix& a, int procs) {
    return distribute(a, RowPartition::balanced(a.n_rows, procs));
}

CsrMatrix tridiag(index_t n) {
    std::vector<std::tuple<index_t, index_t, double>> t;
    for (index_t i = 0; i < n; ++i) {
        t.emplace_back(i, i, 2.0);
        if (i > 0) t.emplace_back(i, i - 1, -1.0);
        if (i + 1 < n) t.emplace_back(i, i + 1, -1.0);
    }
    return CsrMatrix::from_triplets(n, n, std::move(t));
}

struct Ctx {
    PartitionedMatrix a;
    CommPattern pattern;
    CommSchedule schedule;
};

Ctx make_ctx(const CsrMatrix& m, const Topology& topo, Strategy s = Strategy::standard) {
    Ctx ctx{dist(m, topo.num_procs), {}, {}};
    ctx.pattern = comm_pattern(ctx.a, topo);
    ctx.schedule = build_schedule(s, ctx.pattern, topo);
    return ctx;
}

} // namespace

TEST_CASE("jacobi on the identity solves in one unweighted sweep") {
    const Topology topo(2, 2);
    Ctx ctx = make_ctx(CsrMatrix::identity(6), topo);
    PartitionedVector x = PartitionedVector::zeros(ctx.a.rows);
    const PartitionedVector b =
        PartitionedVector::from_global({1, 2, 3, 4, 5, 6}, ctx.a.rows);
    relax_jacobi(ctx.a, ctx.pattern, ctx.schedule, x, b, 1, 1.0);
    CHECK(x.gather() == b.gather());
}

TEST_CASE("one weighted jacobi sweep from zero is omega * D^-1 b") {
    const Topology topo(3, 1);
    Ctx ctx = make_ctx(tridiag(6), topo);
    PartitionedVector x = PartitionedVector::zeros(ctx.a.rows);
    Vector bg{1, 2, 3, 4, 5, 6};
    const PartitionedVector b = PartitionedVector::from_global(bg, ctx.a.rows);
    relax_jacobi(ctx.a, ctx.pattern, ctx.schedule, x, b, 1, 2.0 / 3.0);
    const Vector got = x.gather();
    for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(got[i] == (2.0 / 3.0) * (bg[i] - 0.0) / 2.0);
}

TEST_CASE("jacobi output is bitwise identical across strategies") {
    const Topology topo(6, 2);
    const CsrMatrix m = laplace2d_5pt(6, 6);
    Vector bg(static_cast<std::size_t>(m.n_rows));
    for (std::size_t i = 0; i < bg.size(); ++i) bg[i] = std::sin(static_cast<double>(i));

    Vector reference;
    for (Strategy s : {Strategy::standard, Strategy::nap2, Strategy::nap3}) {
        Ctx ctx = make_ctx(m, topo, s);
        PartitionedVector x = PartitionedVector::zeros(ctx.a.rows);
        const PartitionedVector b = PartitionedVector::from_global(bg, ctx.a.rows);
        relax_jacobi(ctx.a, ctx.pattern, ctx.schedule, x, b, 3, 2.0 / 3.0);
        if (reference.empty())
            reference = x.gather();
        else
            CHECK(x.gather() == reference);
    }
}

TEST_CASE("jacobi rejects zero diagonals") {
    const Topology topo(1, 1);
    Ctx ctx = make_ctx(CsrMatrix::from_triplets(2, 2, {{0, 1, 1.0}, {1, 0, 1.0}}), topo);
    PartitionedVector x = PartitionedVector::zeros(ctx.a.rows);
    const PartitionedVector b = PartitionedVector::from_global({1, 1}, ctx.a.rows);
    CHECK_THROWS_AS(relax_jacobi(ctx.a, ctx.pattern, ctx.schedule, x, b, 1, 1.0),
                    std::runtime_error);
}

TEST_CASE("residual basics") {
    const Topology topo(4, 2);
    const CsrMatrix m = laplace2d_5pt(4, 4);
    Ctx ctx = make_ctx(m, topo);
    Vector bg(static_cast<std::size_t>(m.n_rows), 1.0);
    const PartitionedVector b = PartitionedVector::from_global(bg, ctx.a.rows);

    SUBCASE("x = 0 gives r = b") {
        const PartitionedVector x = PartitionedVector::zeros(ctx.a.rows);
        CHECK(residual(ctx.a, ctx.pattern, ctx.schedule, x, b).gather() == bg);
    }
    SUBCASE("exact solution gives r = 0") {
        const Vector xg = dense_solve(m, bg);
        const PartitionedVector x = PartitionedVector::from_global(xg, ctx.a.rows);
        const Vector r = residual(ctx.a, ctx.pattern, ctx.schedule, x, b).gather();
        for (double v : r) CHECK(std::abs(v) <= 1e-12);
    }
    SUBCASE("matches the dense oracle") {
        Vector xg(static_cast<std::size_t>(m.n_rows));
        for (std::size_t i = 0; i < xg.size(); ++i) xg[i] = std::cos(static_cast<double>(i));
        const PartitionedVector x = PartitionedVector::from_global(xg, ctx.a.rows);
        const Vector got = residual(ctx.a, ctx.pattern, ctx.schedule, x, b).gather();
        const Vector ax = oracles::dense_matvec(oracles::dense_from_csr(m), xg);
        for (std::size_t i = 0; i < got.size(); ++i)
            CHECK(std::abs(got[i] - (bg[i] - ax[i])) <= 1e-12);
    }
}

TEST_CASE("restriction and interpolation with the identity are identity maps") {
    const Topology topo(2, 2);
    const CsrMatrix eye = CsrMatrix::identity(6);
    const PartitionedMatrix p = distribute(eye, RowPartition::balanced(6, 2),
                                           RowPartition::balanced(6, 2));
    const CommPattern pat = comm_pattern(p, topo);
    const CommPattern mir = pat.mirrored();
    const CommSchedule fwd = build_schedule(Strategy::standard, pat, topo);
    const CommSchedule rev = build_schedule(Strategy::standard, mir, topo);
    const Vector vg{1, 2, 3, 4, 5, 6};
    const PartitionedVector v = PartitionedVector::from_global(vg, p.rows);
    CHECK(restrict_residual(p, mir, rev, v).gather() == vg);
    CHECK(interpolate_error(p, pat, fwd, v).gather() == vg);
}

TEST_CASE("restricting ones through a tentative prolongator gives sqrt(aggregate sizes)") {
    // two aggregates of sizes 2 and 3; columns normalized to unit norm
    StrengthMatrix s;
    s.strong = {{1}, {0}, {3, 4}, {2, 4}, {2, 3}};
    const RowPartition rows = RowPartition::balanced(5, 2);
    const Splitting split = split_aggregation(s, rows);
    REQUIRE(split.num_coarse == 2);
    const Topology topo(2, 1);
    const CsrMatrix a = tridiag(5);
    const PartitionedMatrix p =
        tentative_prolongator(distribute(a, rows), split, topo, Strategy::standard, Vector(5, 1.0));
    const CommPattern pat = comm_pattern(p, topo);
    const CommPattern mir = pat.mirrored();
    const CommSchedule rev = build_schedule(Strategy::standard, mir, topo);
    const Vector rc =
        restrict_residual(p, mir, rev, PartitionedVector::from_global(Vector(5, 1.0), p.rows))
            .gather();
    // aggregate of n members contributes n / sqrt(n) = sqrt(n)
    std::vector<double> sizes(2, 0.0);
    for (index_t i = 0; i < 5; ++i) sizes[split.coarse_index[split.aggregate_root[i]]] += 1.0;
    for (std::size_t j = 0; j < 2; ++j)
        CHECK(rc[j] == doctest::Approx(std::sqrt(sizes[j])).epsilon(1e-14));
}

TEST_CASE("restriction and interpolation match dense oracles") {
    const Topology topo(5, 2);
    const CsrMatrix a = laplace2d_5pt(5, 5);
    const PartitionedMatrix am = dist(a, 5);
    const StrengthMatrix s = strength(am, 0.25, StrengthKind::classical);
    const Splitting split = split_classical(s, am.rows);
    const PartitionedMatrix p = interp_classical(am, s, split, topo, Strategy::standard);
    const CommPattern pat = comm_pattern(p, topo);
    const CommPattern mir = pat.mirrored();
    const CommSchedule fwd = build_schedule(Strategy::standard, pat, topo);
    const CommSchedule rev = build_schedule(Strategy::standard, mir, topo);

    Vector rg(static_cast<std::size_t>(a.n_rows));
    for (std::size_t i = 0; i < rg.size(); ++i) rg[i] = std::sin(0.3 * static_cast<double>(i));
    const Vector got_rc =
        restrict_residual(p, mir, rev, PartitionedVector::from_global(rg, p.rows)).gather();
    const oracles::Dense pd = oracles::dense_from_csr(p.gather());
    const Vector want_rc = oracles::dense_matvec(oracles::dense_transpose(pd), rg);
    REQUIRE(got_rc.size() == want_rc.size());
    for (std::size_t i = 0; i < got_rc.size(); ++i)
        CHECK(std::abs(got_rc[i] - want_rc[i]) <= 1e-12);

    Vector eg(static_cast<std::size_t>(split.num_coarse));
    for (std::size_t i = 0; i < eg.size(); ++i) eg[i] = std::cos(0.2 * static_cast<double>(i));
    const Vector got_e =
        interpolate_error(p, pat, fwd, PartitionedVector::from_global(eg, p.cols)).gather();
    const Vector want_e = oracles::dense_matvec(pd, eg);
    for (std::size_t i = 0; i < got_e.size(); ++i)
        CHECK(std::abs(got_e[i] - want_e[i]) <= 1e-12);
}

TEST_CASE("coarse solve") {
    SUBCASE("identity") {
        const PartitionedMatrix a = dist(CsrMatrix::identity(3), 2);
        const PartitionedVector b = PartitionedVector::from_global({1, 2, 3}, a.rows);
        CHECK(coarse_solve(a, b).gather() == Vector{1, 2, 3});
    }
    SUBCASE("2x2 hand solve") {
        const CsrMatrix m =
            CsrMatrix::from_triplets(2, 2, {{0, 0, 2.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 2.0}});
        const PartitionedMatrix a = dist(m, 1);
        const Vector x = coarse_solve(a, PartitionedVector::from_global({3, 3}, a.rows)).gather();
        CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("compatible singular system") {
        // zero-row-sum 1d laplacian with free ends; b orthogonal to constants
        std::vector<std::tuple<index_t, index_t, double>> t;
        const index_t n = 6;
        for (index_t i = 0; i < n; ++i) {
            double diag = 0.0;
            if (i > 0) {
                t.emplace_back(i, i - 1, -1.0);
                diag += 1.0;
            }
            if (i + 1 < n) {
                t.emplace_back(i, i + 1, -1.0);
                diag += 1.0;
            }
            t.emplace_back(i, i, diag);
        }
        const CsrMatrix m = CsrMatrix::from_triplets(n, n, std::move(t));
        Vector bg(static_cast<std::size_t>(n), 0.0);
        bg[0] = 1.0;
        bg[n - 1] = -1.0;
        const Vector x = dense_solve(m, bg);
        const Vector ax = oracles::dense_matvec(oracles::dense_from_csr(m), x);
        for (index_t i = 0; i < n; ++i) CHECK(std::abs(ax[i] - bg[i]) <= 1e-10);
    }
}

TEST_CASE("single-level hierarchy solves exactly in one iteration") {
    const CsrMatrix a = tridiag(12);
    SetupConfig cfg;
    cfg.max_coarse = 50;
    const Topology topo(3, 2);
    const Hierarchy h = setup(dist(a, 3), cfg, topo, ModelParams::defaults());
    REQUIRE(h.num_levels() == 1);

    PartitionedVector x = PartitionedVector::zeros(h.levels[0].a.rows);
    const PartitionedVector b =
        PartitionedVector::from_global(Vector(12, 1.0), h.levels[0].a.rows);
    const SolveResult res = solve(h, b, x, SolveOptions{});
    CHECK(res.status == SolveStatus::converged);
    CHECK(res.iterations <= 1);
}

TEST_CASE("v-cycles converge on the 32x32 laplacian") {
    const CsrMatrix a = laplace2d_5pt(32, 32);
    SetupConfig cfg;
    const Topology topo(8, 4);
    const Hierarchy h = setup(dist(a, 8), cfg, topo, ModelParams::defaults());
    REQUIRE(h.num_levels() >= 2);

    PartitionedVector x = PartitionedVector::zeros(h.levels[0].a.rows);
    const PartitionedVector b = PartitionedVector::from_global(
        Vector(static_cast<std::size_t>(a.n_rows), 1.0), h.levels[0].a.rows);
    SolveOptions opts;
    opts.max_iters = 50;
    const SolveResult res = solve(h, b, x, opts);
    CHECK(res.status == SolveStatus::converged);
    // monotone decrease after the first iteration
    for (std::size_t i = 2; i < res.residual_history.size(); ++i)
        CHECK(res.residual_history[i] <= res.residual_history[i - 1]);
}

TEST_CASE("residual history is bitwise identical across strategies") {
    const CsrMatrix a = laplace2d_5pt(10, 10);
    const Topology topo(5, 2);
    const PartitionedMatrix am = dist(a, 5);
    SetupConfig cfg;
    cfg.max_coarse = 20;
    SolveOptions opts;
    opts.max_iters = 8;
    opts.rtol = 1e-30; // run all iterations

    std::vector<std::vector<double>> histories;
    for (Strategy s : {Strategy::standard, Strategy::nap2, Strategy::nap3}) {
        SetupConfig forced = cfg;
        forced.strategy_override = s;
        const Hierarchy h = setup(am, forced, topo, ModelParams::defaults());
        PartitionedVector x = PartitionedVector::zeros(am.rows);
        const PartitionedVector b = PartitionedVector::from_global(
            Vector(static_cast<std::size_t>(a.n_rows), 1.0), am.rows);
        histories.push_back(solve(h, b, x, opts).residual_history);
    }
    CHECK(histories[0] == histories[1]);
    CHECK(histories[0] == histories[2]);
}

TEST_CASE("diagonal operators survive the all-fine splitting") {
    // no strong connections at all: every point is F, the prolongator has
    // zero columns and the cycle reduces to relaxation
    std::vector<std::tuple<index_t, index_t, double>> t;
    for (index_t i = 0; i < 10; ++i) t.emplace_back(i, i, 3.0);
    const CsrMatrix a = CsrMatrix::from_triplets(10, 10, std::move(t));
    SetupConfig cfg;
    cfg.max_coarse = 5;
    const Topology topo(2, 2);
    const Hierarchy h = setup(dist(a, 2), cfg, topo, ModelParams::defaults());
    PartitionedVector x = PartitionedVector::zeros(h.levels[0].a.rows);
    const PartitionedVector b = PartitionedVector::from_global(Vector(10, 1.0), h.levels[0].a.rows);
    const SolveResult res = solve(h, b, x, SolveOptions{});
    CHECK(res.status == SolveStatus::converged);
    for (double v : x.gather()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("divergent relaxation is detected") {
    const CsrMatrix a = laplace2d_5pt(8, 8);
    SetupConfig cfg;
    cfg.max_coarse = 5;
    const Topology topo(2, 2);
    const Hierarchy h = setup(dist(a, 2), cfg, topo, ModelParams::defaults());
    PartitionedVector x = PartitionedVector::zeros(h.levels[0].a.rows);
    const PartitionedVector b = PartitionedVector::from_global(
        Vector(static_cast<std::size_t>(a.n_rows), 1.0), h.levels[0].a.rows);
    SolveOptions opts;
    opts.jacobi_weight = 3.0; // far outside the stable range
    opts.max_iters = 100;
    const SolveResult res = solve(h, b, x, opts);
    CHECK(res.status == SolveStatus::diverged);
}
