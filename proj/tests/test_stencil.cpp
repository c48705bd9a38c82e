#include "napmg/stencil.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <stdexcept>

using namespace napmg;

namespace {

bool exactly_symmetric(const CsrMatrix& a) {
    const CsrMatrix t = transpose(a);
    return a.row_ptr == t.row_ptr && a.col_idx == t.col_idx && a.values == t.values;
}

bool weakly_diagonally_dominant(const CsrMatrix& a) {
    for (index_t i = 0; i < a.n_rows; ++i) {
        double diag = 0.0, off = 0.0;
        for (index_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
            if (a.col_idx[k] == i)
                diag = std::abs(a.values[k]);
            else
                off += std::abs(a.values[k]);
        }
        if (diag + 1e-12 < off) return false;
    }
    return true;
}

} // namespace

TEST_CASE("laplace2d single interior point") {
    const CsrMatrix a = laplace2d_5pt(1, 1);
    REQUIRE(a.n_rows == 1);
    REQUIRE(a.nnz() == 1);
    CHECK(a.values[0] == 4.0);
}

TEST_CASE("laplace2d 3x3 row sums") {
    const CsrMatrix a = laplace2d_5pt(3, 3);
    const Vector sums = spmv(a, Vector(9, 1.0));
    CHECK(sums == Vector{2, 1, 2, 1, 0, 1, 2, 1, 2});
}

TEST_CASE("laplace3d structure") {
    const CsrMatrix a = laplace3d_7pt(2, 2, 2);
    REQUIRE(a.n_rows == 8);
    for (index_t i = 0; i < 8; ++i) {
        CHECK(a.coeff(i, i) == 6.0);
        CHECK(a.row_ptr[i + 1] - a.row_ptr[i] == 4); // diagonal + 3 neighbors
    }
    CHECK(exactly_symmetric(a));
}

TEST_CASE("rotated anisotropic stencil is a symmetric M-matrix") {
    const CsrMatrix a = rotated_aniso_2d(8, 8, 0.001, 0.5235987755982988);
    CHECK(exactly_symmetric(a));
    CHECK(weakly_diagonally_dominant(a));
    // M-matrix: positive diagonal, non-positive off-diagonals
    for (index_t i = 0; i < a.n_rows; ++i)
        for (index_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
            if (a.col_idx[k] == i)
                CHECK(a.values[k] > 0.0);
            else
                CHECK(a.values[k] <= 0.0);
        }
}

TEST_CASE("rotated stencil reduces to the axis-aligned one") {
    const CsrMatrix iso = rotated_aniso_2d(4, 4, 1.0, 0.7);
    const CsrMatrix lap = laplace2d_5pt(4, 4);
    // eps = 1 removes the anisotropy entirely, independent of theta
    REQUIRE(iso.n_rows == lap.n_rows);
    for (index_t i = 0; i < iso.n_rows; ++i)
        for (index_t j = 0; j < iso.n_cols; ++j)
            CHECK(iso.coeff(i, j) == doctest::Approx(lap.coeff(i, j)).epsilon(1e-12));
}

TEST_CASE("all stencils are exactly symmetric") {
    CHECK(exactly_symmetric(laplace2d_5pt(5, 3)));
    CHECK(exactly_symmetric(laplace3d_7pt(3, 4, 2)));
    CHECK(exactly_symmetric(rotated_aniso_2d(6, 5, 0.01, -0.9)));
}

TEST_CASE("stencil validation") {
    CHECK_THROWS_AS(generate_stencil("unknown", 2, 2, 2), std::invalid_argument);
    CHECK_THROWS_AS(laplace2d_5pt(0, 3), std::invalid_argument);
    CHECK_THROWS_AS(laplace3d_7pt(2, 2, 0), std::invalid_argument);
}
