#include "napmg/csr.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <stdexcept>

#include <random>

using namespace napmg;
using oracles::Dense;

namespace {

CsrMatrix small(index_t rows, index_t cols, std::vector<std::tuple<index_t, index_t, double>> t) {
    return CsrMatrix::from_triplets(rows, cols, std::move(t));
}

bool bitwise_equal(const CsrMatrix& a, const CsrMatrix& b) {
    return a.n_rows == b.n_rows && a.n_cols == b.n_cols && a.row_ptr == b.row_ptr &&
           a.col_idx == b.col_idx && a.values == b.values;
}

} // namespace

TEST_CASE("spmv identity") {
    const CsrMatrix eye = CsrMatrix::identity(3);
    const Vector y = spmv(eye, {1.0, 2.0, 3.0});
    CHECK(y == Vector{1.0, 2.0, 3.0});
}

TEST_CASE("spmv small dense-checked case") {
    const CsrMatrix a = small(2, 2, {{0, 0, 2.0}, {0, 1, 1.0}, {1, 1, 3.0}});
    const Vector y = spmv(a, {1.0, 1.0});
    CHECK(y == Vector{3.0, 3.0});
    CHECK(y == oracles::dense_matvec(oracles::dense_from_csr(a), {1.0, 1.0}));
}

TEST_CASE("spmv matches the dense oracle on random matrices") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const index_t n = 10 + static_cast<index_t>(rng() % 91);
        const CsrMatrix a = oracles::random_csr(n, n, 0.2, rng());
        Vector x(static_cast<std::size_t>(n));
        std::uniform_real_distribution<double> dist(-2.0, 2.0);
        for (double& v : x) v = dist(rng);
        const Vector got = spmv(a, x);
        const Vector want = oracles::dense_matvec(oracles::dense_from_csr(a), x);
        double scale = 0.0, err = 0.0;
        for (std::size_t i = 0; i < got.size(); ++i) {
            scale = std::max(scale, std::abs(want[i]));
            err = std::max(err, std::abs(got[i] - want[i]));
        }
        CHECK(err <= 1e-12 * std::max(scale, 1.0));
    }
}

TEST_CASE("spmv rejects dimension mismatch") {
    CHECK_THROWS_AS(spmv(CsrMatrix::identity(3), Vector{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("spgemm identity and small case") {
    const CsrMatrix a = small(2, 2, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 1, 1.0}});
    CHECK(bitwise_equal(spgemm(a, CsrMatrix::identity(2)), a));

    const CsrMatrix b = small(2, 2, {{0, 0, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}});
    const CsrMatrix c = spgemm(a, b);
    const CsrMatrix want = small(2, 2, {{0, 0, 2.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}});
    CHECK(bitwise_equal(c, want));
    CHECK(oracles::max_abs_diff(oracles::dense_from_csr(c),
                                oracles::dense_matmul(oracles::dense_from_csr(a),
                                                      oracles::dense_from_csr(b))) == 0.0);
}

TEST_CASE("spgemm matches the dense oracle") {
    const CsrMatrix a = oracles::random_csr(10, 10, 0.3, 11);
    const CsrMatrix b = oracles::random_csr(10, 10, 0.3, 12);
    const CsrMatrix c = spgemm(a, b);
    c.validate();
    const Dense want = oracles::dense_matmul(oracles::dense_from_csr(a), oracles::dense_from_csr(b));
    CHECK(oracles::max_abs_diff(oracles::dense_from_csr(c), want) <= 1e-14);
}

TEST_CASE("spgemm keeps exact cancellations in the pattern") {
    // A row picks two entries of B that cancel: the zero stays stored.
    const CsrMatrix a = small(1, 2, {{0, 0, 1.0}, {0, 1, 1.0}});
    const CsrMatrix b = small(2, 1, {{0, 0, 1.0}, {1, 0, -1.0}});
    const CsrMatrix c = spgemm(a, b);
    REQUIRE(c.nnz() == 1);
    CHECK(c.values[0] == 0.0);
}

TEST_CASE("spgemm associativity at small scale") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 5; ++trial) {
        const CsrMatrix a = oracles::random_csr(20, 20, 0.2, rng());
        const CsrMatrix b = oracles::random_csr(20, 20, 0.2, rng());
        const CsrMatrix c = oracles::random_csr(20, 20, 0.2, rng());
        const Dense left = oracles::dense_from_csr(spgemm(spgemm(a, b), c));
        const Dense right = oracles::dense_from_csr(spgemm(a, spgemm(b, c)));
        CHECK(oracles::max_abs_diff(left, right) <= 1e-10);
    }
}

TEST_CASE("spgemm rejects dimension mismatch") {
    CHECK_THROWS_AS(spgemm(CsrMatrix::identity(3), CsrMatrix::identity(2)), std::invalid_argument);
}

TEST_CASE("transpose basics and involution") {
    CHECK(bitwise_equal(transpose(CsrMatrix::identity(4)), CsrMatrix::identity(4)));

    const CsrMatrix a = small(2, 2, {{0, 1, 5.0}});
    const CsrMatrix want = small(2, 2, {{1, 0, 5.0}});
    CHECK(bitwise_equal(transpose(a), want));

    const CsrMatrix r = oracles::random_csr(20, 7, 0.3, 33);
    CHECK(bitwise_equal(transpose(transpose(r)), r));
}

TEST_CASE("validate flags broken invariants") {
    CsrMatrix bad = CsrMatrix::identity(2);
    bad.col_idx[1] = 5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    CsrMatrix unsorted = small(1, 3, {{0, 0, 1.0}, {0, 2, 1.0}});
    std::swap(unsorted.col_idx[0], unsorted.col_idx[1]);
    CHECK_THROWS_AS(unsorted.validate(), std::invalid_argument);
}

TEST_CASE("from_triplets sums duplicates in input order") {
    const CsrMatrix a = small(1, 1, {{0, 0, 1.5}, {0, 0, 2.5}});
    REQUIRE(a.nnz() == 1);
    CHECK(a.values[0] == 4.0);
}
