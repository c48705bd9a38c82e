#include "napmg/stencil.hpp"

#include <cmath>
#include <stdexcept>
#include <tuple>

namespace napmg {

namespace {

void check_dims(index_t nx, index_t ny, index_t nz = 1) {
    if (nx < 1 || ny < 1 || nz < 1)
        throw std::invalid_argument("stencil: grid dims must be >= 1");
}

} // namespace

CsrMatrix laplace2d_5pt(index_t nx, index_t ny) {
    check_dims(nx, ny);
    std::vector<std::tuple<index_t, index_t, double>> t;
    t.reserve(static_cast<std::size_t>(5 * nx * ny));
    for (index_t iy = 0; iy < ny; ++iy) {
        for (index_t ix = 0; ix < nx; ++ix) {
            const index_t row = iy * nx + ix;
            t.emplace_back(row, row, 4.0);
            if (ix > 0) t.emplace_back(row, row - 1, -1.0);
            if (ix + 1 < nx) t.emplace_back(row, row + 1, -1.0);
            if (iy > 0) t.emplace_back(row, row - nx, -1.0);
            if (iy + 1 < ny) t.emplace_back(row, row + nx, -1.0);
        }
    }
    return CsrMatrix::from_triplets(nx * ny, nx * ny, std::move(t));
}

CsrMatrix laplace3d_7pt(index_t nx, index_t ny, index_t nz) {
    check_dims(nx, ny, nz);
    const index_t n = nx * ny * nz;
    std::vector<std::tuple<index_t, index_t, double>> t;
    t.reserve(static_cast<std::size_t>(7 * n));
    for (index_t iz = 0; iz < nz; ++iz) {
        for (index_t iy = 0; iy < ny; ++iy) {
            for (index_t ix = 0; ix < nx; ++ix) {
                const index_t row = (iz * ny + iy) * nx + ix;
                t.emplace_back(row, row, 6.0);
                if (ix > 0) t.emplace_back(row, row - 1, -1.0);
                if (ix + 1 < nx) t.emplace_back(row, row + 1, -1.0);
                if (iy > 0) t.emplace_back(row, row - nx, -1.0);
                if (iy + 1 < ny) t.emplace_back(row, row + nx, -1.0);
                if (iz > 0) t.emplace_back(row, row - nx * ny, -1.0);
                if (iz + 1 < nz) t.emplace_back(row, row + nx * ny, -1.0);
            }
        }
    }
    return CsrMatrix::from_triplets(n, n, std::move(t));
}

CsrMatrix rotated_aniso_2d(index_t nx, index_t ny, double eps, double theta) {
    check_dims(nx, ny);
    const double c = std::cos(theta), s = std::sin(theta);
    const double axx = c * c + eps * s * s;
    const double ayy = s * s + eps * c * c;
    const double axy = (1.0 - eps) * c * s;
    // Mixed-derivative coupling, limited so off-diagonals stay non-positive.
    const double diag_coupling = std::min(std::abs(axy), std::min(axx, ayy));
    const double ew = axx - diag_coupling;
    const double ns = ayy - diag_coupling;
    const double center = 2.0 * axx + 2.0 * ayy - 2.0 * diag_coupling;
    const bool positive_cross = axy >= 0.0;

    std::vector<std::tuple<index_t, index_t, double>> t;
    t.reserve(static_cast<std::size_t>(9 * nx * ny));
    for (index_t iy = 0; iy < ny; ++iy) {
        for (index_t ix = 0; ix < nx; ++ix) {
            const index_t row = iy * nx + ix;
            t.emplace_back(row, row, center);
            if (ew != 0.0) {
                if (ix > 0) t.emplace_back(row, row - 1, -ew);
                if (ix + 1 < nx) t.emplace_back(row, row + 1, -ew);
            }
            if (ns != 0.0) {
                if (iy > 0) t.emplace_back(row, row - nx, -ns);
                if (iy + 1 < ny) t.emplace_back(row, row + nx, -ns);
            }
            if (diag_coupling != 0.0) {
                if (positive_cross) {
                    // couple along NE / SW
                    if (ix + 1 < nx && iy + 1 < ny) t.emplace_back(row, row + nx + 1, -diag_coupling);
                    if (ix > 0 && iy > 0) t.emplace_back(row, row - nx - 1, -diag_coupling);
                } else {
                    // couple along NW / SE
                    if (ix > 0 && iy + 1 < ny) t.emplace_back(row, row + nx - 1, -diag_coupling);
                    if (ix + 1 < nx && iy > 0) t.emplace_back(row, row - nx + 1, -diag_coupling);
                }
            }
        }
    }
    return CsrMatrix::from_triplets(nx * ny, nx * ny, std::move(t));
}

CsrMatrix generate_stencil(const std::string& kind, index_t nx, index_t ny, index_t nz,
                           double eps, double theta) {
    if (kind == "laplace2d_5pt") return laplace2d_5pt(nx, ny);
    if (kind == "laplace3d_7pt") return laplace3d_7pt(nx, ny, nz);
    if (kind == "rotated_aniso_2d") return rotated_aniso_2d(nx, ny, eps, theta);
    throw std::invalid_argument("generate_stencil: unknown kind '" + kind + "'");
}

} // namespace napmg
