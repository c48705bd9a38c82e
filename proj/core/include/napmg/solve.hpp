#pragma once

#include "napmg/setup.hpp"

namespace napmg {

struct SolveOptions {
    int max_iters = 100;
    double rtol = 1e-8;
    int pre_sweeps = 1;
    int post_sweeps = 1;
    double jacobi_weight = 2.0 / 3.0;
};

enum class SolveStatus { converged, max_iterations, diverged };
const char* to_string(SolveStatus s);

struct SolveResult {
    SolveStatus status = SolveStatus::max_iterations;
    int iterations = 0;
    std::vector<double> residual_history; // ||r||_2 before iterating, then per V-cycle
};

/// Distributed y = A*x using the given schedule for the off-process values.
PartitionedVector dist_spmv(const PartitionedMatrix& a, const CommPattern& pattern,
                            const CommSchedule& schedule, const PartitionedVector& x,
                            MessageLog* log = nullptr);

/// Weighted Jacobi: x <- x + omega D^-1 (b - A x), one vector exchange per
/// sweep. Zero diagonal entries throw.
void relax_jacobi(const PartitionedMatrix& a, const CommPattern& pattern,
                  const CommSchedule& schedule, PartitionedVector& x, const PartitionedVector& b,
                  int sweeps, double omega);

PartitionedVector residual(const PartitionedMatrix& a, const CommPattern& pattern,
                           const CommSchedule& schedule, const PartitionedVector& x,
                           const PartitionedVector& b);

/// r_coarse = P^T r: contributions to remotely owned coarse rows travel over
/// the mirrored P pattern and are summed in contributor-rank order.
PartitionedVector restrict_residual(const PartitionedMatrix& p, const CommPattern& mirror_pattern,
                                    const CommSchedule& reverse_schedule,
                                    const PartitionedVector& r);

/// e = P e_coarse, fetching remote coarse values over P's pattern.
PartitionedVector interpolate_error(const PartitionedMatrix& p, const CommPattern& pattern,
                                    const CommSchedule& forward_schedule,
                                    const PartitionedVector& e_coarse);

/// Dense LU with partial pivoting. Pivots below 1e-14 * max|A| mark dependent
/// rows; the corresponding unknowns are set to zero (elimination proceeds on
/// the nonsingular sub-block), which solves compatible singular systems.
Vector dense_solve(const CsrMatrix& a, const Vector& b);

/// Gathers the coarsest operator to one rank, solves densely, scatters back.
PartitionedVector coarse_solve(const PartitionedMatrix& a, const PartitionedVector& b);

/// Norm with fixed rank-major summation order (bit-reproducible).
double norm2(const PartitionedVector& v);

void vcycle(const Hierarchy& h, std::size_t level, PartitionedVector& x,
            const PartitionedVector& b, const SolveOptions& opts);

/// V-cycle iteration until ||r||_2 / ||b||_2 < rtol or max_iters. Aborts as
/// diverged when the residual exceeds 10x the initial one for three
/// consecutive iterations.
SolveResult solve(const Hierarchy& h, const PartitionedVector& b, PartitionedVector& x,
                  const SolveOptions& opts);

} // namespace napmg
