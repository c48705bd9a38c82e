#pragma once

#include "napmg/csr.hpp"

#include <string>

namespace napmg {

/// 5-point Laplacian on an nx-by-ny grid, Dirichlet boundaries: connections
/// leaving the grid are dropped, the diagonal stays 4.
CsrMatrix laplace2d_5pt(index_t nx, index_t ny);

/// 7-point Laplacian on an nx-by-ny-by-nz grid, Dirichlet boundaries.
CsrMatrix laplace3d_7pt(index_t nx, index_t ny, index_t nz);

/// Rotated anisotropic diffusion on an nx-by-ny grid: diffusion strength 1
/// along the direction at angle theta and eps across it. The cross-derivative
/// coupling is discretized on the diagonal neighbors matching its sign and
/// limited to min(|c|, axial couplings) so the stencil stays a symmetric
/// M-matrix with zero interior row sums.
CsrMatrix rotated_aniso_2d(index_t nx, index_t ny, double eps, double theta);

/// Dispatch by kind name: "laplace2d_5pt" | "laplace3d_7pt" | "rotated_aniso_2d".
/// Unknown kinds throw std::invalid_argument.
CsrMatrix generate_stencil(const std::string& kind, index_t nx, index_t ny, index_t nz,
                           double eps = 0.001, double theta = 0.5235987755982988);

} // namespace napmg
