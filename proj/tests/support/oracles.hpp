#pragma once

// Dense and brute-force reference implementations the tests check the sparse
// and distributed paths against. Everything here is independent of the
// library kernels: plain row-major dense arithmetic and explicit graph
// searches.

#include "napmg/csr.hpp"

#include <cmath>
#include <cstdlib>
#include <queue>
#include <random>
#include <vector>

namespace oracles {

using napmg::CsrMatrix;
using napmg::index_t;
using napmg::Vector;

struct Dense {
    index_t rows = 0, cols = 0;
    std::vector<double> a; // row-major

    double& at(index_t i, index_t j) { return a[static_cast<std::size_t>(i * cols + j)]; }
    double at(index_t i, index_t j) const { return a[static_cast<std::size_t>(i * cols + j)]; }
};

inline Dense dense_from_csr(const CsrMatrix& m) {
    Dense d{m.n_rows, m.n_cols, std::vector<double>(static_cast<std::size_t>(m.n_rows * m.n_cols), 0.0)};
    for (index_t i = 0; i < m.n_rows; ++i)
        for (index_t k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k)
            d.at(i, m.col_idx[k]) += m.values[k];
    return d;
}

inline Vector dense_matvec(const Dense& m, const Vector& x) {
    Vector y(static_cast<std::size_t>(m.rows), 0.0);
    for (index_t i = 0; i < m.rows; ++i)
        for (index_t j = 0; j < m.cols; ++j) y[i] += m.at(i, j) * x[j];
    return y;
}

inline Dense dense_matmul(const Dense& a, const Dense& b) {
    Dense c{a.rows, b.cols, std::vector<double>(static_cast<std::size_t>(a.rows * b.cols), 0.0)};
    for (index_t i = 0; i < a.rows; ++i)
        for (index_t k = 0; k < a.cols; ++k)
            for (index_t j = 0; j < b.cols; ++j) c.at(i, j) += a.at(i, k) * b.at(k, j);
    return c;
}

inline Dense dense_transpose(const Dense& a) {
    Dense t{a.cols, a.rows, std::vector<double>(a.a.size(), 0.0)};
    for (index_t i = 0; i < a.rows; ++i)
        for (index_t j = 0; j < a.cols; ++j) t.at(j, i) = a.at(i, j);
    return t;
}

/// dense P^T * A * P
inline Dense dense_galerkin(const Dense& a, const Dense& p) {
    return dense_matmul(dense_transpose(p), dense_matmul(a, p));
}

inline double max_abs_diff(const Dense& a, const Dense& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.a.size(); ++i) m = std::max(m, std::abs(a.a[i] - b.a[i]));
    return m;
}

inline double max_abs(const Dense& a) {
    double m = 0.0;
    for (double v : a.a) m = std::max(m, std::abs(v));
    return m;
}

/// Random sparse matrix with the given fill fraction (deterministic seed).
inline CsrMatrix random_csr(index_t rows, index_t cols, double density, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> value(-1.0, 1.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::vector<std::tuple<index_t, index_t, double>> t;
    for (index_t i = 0; i < rows; ++i)
        for (index_t j = 0; j < cols; ++j)
            if (coin(rng) < density) t.emplace_back(i, j, value(rng));
    return CsrMatrix::from_triplets(rows, cols, std::move(t));
}

/// Random symmetric-structure, diagonally dominant matrix: well-behaved for
/// splittings and Jacobi.
inline CsrMatrix random_spd_like(index_t n, double density, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> value(0.1, 1.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::vector<std::tuple<index_t, index_t, double>> t;
    std::vector<double> row_sum(static_cast<std::size_t>(n), 0.0);
    for (index_t i = 0; i < n; ++i)
        for (index_t j = i + 1; j < n; ++j)
            if (coin(rng) < density) {
                const double v = -value(rng);
                t.emplace_back(i, j, v);
                t.emplace_back(j, i, v);
                row_sum[i] += std::abs(v);
                row_sum[j] += std::abs(v);
            }
    for (index_t i = 0; i < n; ++i) t.emplace_back(i, i, row_sum[i] + 1.0);
    return CsrMatrix::from_triplets(n, n, std::move(t));
}

/// Graph Laplacian of the 2d grid: zero row sums everywhere (singular).
inline CsrMatrix grid_graph_laplacian(index_t nx, index_t ny) {
    std::vector<std::tuple<index_t, index_t, double>> t;
    for (index_t iy = 0; iy < ny; ++iy)
        for (index_t ix = 0; ix < nx; ++ix) {
            const index_t row = iy * nx + ix;
            double degree = 0.0;
            auto edge = [&](index_t col) {
                t.emplace_back(row, col, -1.0);
                degree += 1.0;
            };
            if (ix > 0) edge(row - 1);
            if (ix + 1 < nx) edge(row + 1);
            if (iy > 0) edge(row - nx);
            if (iy + 1 < ny) edge(row + nx);
            t.emplace_back(row, row, degree);
        }
    return CsrMatrix::from_triplets(nx * ny, nx * ny, std::move(t));
}

/// BFS distances in an undirected adjacency list (-1 = unreachable).
inline std::vector<int> bfs_distances(const std::vector<std::vector<index_t>>& adj, index_t start) {
    std::vector<int> dist(adj.size(), -1);
    std::queue<index_t> queue;
    dist[start] = 0;
    queue.push(start);
    while (!queue.empty()) {
        const index_t u = queue.front();
        queue.pop();
        for (index_t v : adj[u])
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                queue.push(v);
            }
    }
    return dist;
}

} // namespace oracles
