#include "napmg/solve.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace napmg {

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::max_iterations: return "max_iterations";
        case SolveStatus::diverged: return "diverged";
    }
    return "?";
}

namespace {

std::vector<std::map<index_t, double>> exchange(const CommPattern& pattern,
                                                const CommSchedule& schedule,
                                                const PartitionedVector& x, MessageLog* log) {
    const auto deliveries = execute_vector(
        schedule, pattern,
        [&x](int rank, index_t idx) { return x.local[rank][idx - x.part.first_row(rank)]; }, log);
    std::vector<std::map<index_t, double>> out(deliveries.size());
    for (std::size_t r = 0; r < deliveries.size(); ++r)
        for (const VectorDelivery& d : deliveries[r]) out[r].emplace(d.index, d.value);
    return out;
}

} // namespace

PartitionedVector dist_spmv(const PartitionedMatrix& a, const CommPattern& pattern,
                            const CommSchedule& schedule, const PartitionedVector& x,
                            MessageLog* log) {
    if (x.part != a.cols)
        throw std::invalid_argument("dist_spmv: vector partition mismatch");
    const auto remote = exchange(pattern, schedule, x, log);
    PartitionedVector y = PartitionedVector::zeros(a.rows);
    for (int r = 0; r < a.rows.num_procs(); ++r) {
        const RankBlock& blk = a.blocks[r];
        for (index_t i = 0; i < blk.on_proc.n_rows; ++i) {
            double sum = 0.0;
            for (index_t k = blk.on_proc.row_ptr[i]; k < blk.on_proc.row_ptr[i + 1]; ++k)
                sum += blk.on_proc.values[k] * x.local[r][blk.on_proc.col_idx[k]];
            for (index_t k = blk.off_proc.row_ptr[i]; k < blk.off_proc.row_ptr[i + 1]; ++k)
                sum += blk.off_proc.values[k] * remote[r].at(blk.off_col_map[blk.off_proc.col_idx[k]]);
            y.local[r][i] = sum;
        }
    }
    return y;
}

void relax_jacobi(const PartitionedMatrix& a, const CommPattern& pattern,
                  const CommSchedule& schedule, PartitionedVector& x, const PartitionedVector& b,
                  int sweeps, double omega) {
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        const PartitionedVector ax = dist_spmv(a, pattern, schedule, x);
        for (int r = 0; r < a.rows.num_procs(); ++r) {
            const RankBlock& blk = a.blocks[r];
            const index_t first = a.rows.first_row(r);
            const index_t col0 = a.cols.first_row(r);
            for (index_t i = 0; i < a.rows.local_size(r); ++i) {
                double diag = 0.0;
                for (index_t k = blk.on_proc.row_ptr[i]; k < blk.on_proc.row_ptr[i + 1]; ++k)
                    if (blk.on_proc.col_idx[k] + col0 == first + i) diag = blk.on_proc.values[k];
                if (diag == 0.0)
                    throw std::runtime_error("relax_jacobi: zero diagonal at row " +
                                             std::to_string(first + i));
                x.local[r][i] += omega * (b.local[r][i] - ax.local[r][i]) / diag;
            }
        }
    }
}

PartitionedVector residual(const PartitionedMatrix& a, const CommPattern& pattern,
                           const CommSchedule& schedule, const PartitionedVector& x,
                           const PartitionedVector& b) {
    PartitionedVector r = dist_spmv(a, pattern, schedule, x);
    for (int rank = 0; rank < a.rows.num_procs(); ++rank)
        for (std::size_t i = 0; i < r.local[rank].size(); ++i)
            r.local[rank][i] = b.local[rank][i] - r.local[rank][i];
    return r;
}

PartitionedVector restrict_residual(const PartitionedMatrix& p, const CommPattern& mirror_pattern,
                                    const CommSchedule& reverse_schedule,
                                    const PartitionedVector& r) {
    if (r.part != p.rows)
        throw std::invalid_argument("restrict: vector partition mismatch");
    const int nprocs = p.rows.num_procs();

    // per-rank partial sums for every coarse row touched locally, fine rows
    // processed in ascending order
    std::vector<std::map<index_t, double>> partial(nprocs);
    for (int rank = 0; rank < nprocs; ++rank) {
        const index_t first = p.rows.first_row(rank);
        for (index_t i = 0; i < p.rows.local_size(rank); ++i)
            for (const auto& [jc, v] : p.global_row(rank, first + i)) {
                auto [it, inserted] = partial[rank].try_emplace(jc, 0.0);
                (void)inserted;
                it->second += v * r.local[rank][i];
            }
    }

    const auto deliveries = execute_vector(
        reverse_schedule, mirror_pattern,
        [&partial](int rank, index_t idx) { return partial[rank].at(idx); });

    PartitionedVector rc = PartitionedVector::zeros(p.cols);
    for (int rank = 0; rank < nprocs; ++rank) {
        const index_t cfirst = p.cols.first_row(rank);
        // deliveries are sorted by (source, index); sum per coarse row in
        // contributor-rank order with the local partial at its own position
        std::map<index_t, std::vector<std::pair<int, double>>> incoming;
        for (const VectorDelivery& d : deliveries[rank])
            incoming[d.index].emplace_back(d.source, d.value);
        for (index_t jc = cfirst; jc < p.cols.starts[rank + 1]; ++jc) {
            double sum = 0.0;
            bool own_added = false;
            auto own = partial[rank].find(jc);
            auto it = incoming.find(jc);
            if (it != incoming.end()) {
                for (const auto& [source, value] : it->second) {
                    if (!own_added && source > rank && own != partial[rank].end()) {
                        sum += own->second;
                        own_added = true;
                    }
                    sum += value;
                }
            }
            if (!own_added && own != partial[rank].end()) sum += own->second;
            rc.local[rank][jc - cfirst] = sum;
        }
    }
    return rc;
}

PartitionedVector interpolate_error(const PartitionedMatrix& p, const CommPattern& pattern,
                                    const CommSchedule& forward_schedule,
                                    const PartitionedVector& e_coarse) {
    if (e_coarse.part != p.cols)
        throw std::invalid_argument("interpolate: vector partition mismatch");
    const auto remote = exchange(pattern, forward_schedule, e_coarse, nullptr);
    PartitionedVector e = PartitionedVector::zeros(p.rows);
    for (int rank = 0; rank < p.rows.num_procs(); ++rank) {
        const index_t first = p.rows.first_row(rank);
        for (index_t i = 0; i < p.rows.local_size(rank); ++i) {
            double sum = 0.0;
            for (const auto& [jc, v] : p.global_row(rank, first + i))
                sum += v * (p.cols.owns(rank, jc)
                                ? e_coarse.local[rank][jc - p.cols.first_row(rank)]
                                : remote[rank].at(jc));
            e.local[rank][i] = sum;
        }
    }
    return e;
}

Vector dense_solve(const CsrMatrix& a, const Vector& b) {
    if (a.n_rows != a.n_cols || static_cast<index_t>(b.size()) != a.n_rows)
        throw std::invalid_argument("dense_solve: dimension mismatch");
    const index_t n = a.n_rows;
    std::vector<double> m(static_cast<std::size_t>(n) * n, 0.0);
    for (index_t i = 0; i < n; ++i)
        for (index_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
            m[i * n + a.col_idx[k]] = a.values[k];

    double max_abs = 0.0;
    for (double v : m) max_abs = std::max(max_abs, std::abs(v));
    const double pivot_tol = 1e-14 * max_abs;

    Vector rhs = b;
    std::vector<index_t> perm(n);
    for (index_t i = 0; i < n; ++i) perm[i] = i;
    std::vector<char> dependent(n, 0);

    for (index_t k = 0; k < n; ++k) {
        index_t pivot_row = k;
        double pivot_val = std::abs(m[perm[k] * n + k]);
        for (index_t i = k + 1; i < n; ++i) {
            const double v = std::abs(m[perm[i] * n + k]);
            if (v > pivot_val) {
                pivot_val = v;
                pivot_row = i;
            }
        }
        if (pivot_val <= pivot_tol) {
            dependent[k] = 1;
            continue;
        }
        std::swap(perm[k], perm[pivot_row]);
        const double pivot = m[perm[k] * n + k];
        for (index_t i = k + 1; i < n; ++i) {
            const double factor = m[perm[i] * n + k] / pivot;
            if (factor == 0.0) continue;
            m[perm[i] * n + k] = 0.0;
            for (index_t j = k + 1; j < n; ++j) m[perm[i] * n + j] -= factor * m[perm[k] * n + j];
            rhs[perm[i]] -= factor * rhs[perm[k]];
        }
    }

    Vector x(static_cast<std::size_t>(n), 0.0);
    for (index_t k = n; k-- > 0;) {
        if (dependent[k]) {
            x[k] = 0.0; // free unknown of a singular system
            continue;
        }
        double sum = rhs[perm[k]];
        for (index_t j = k + 1; j < n; ++j) sum -= m[perm[k] * n + j] * x[j];
        x[k] = sum / m[perm[k] * n + k];
    }
    return x;
}

PartitionedVector coarse_solve(const PartitionedMatrix& a, const PartitionedVector& b) {
    const CsrMatrix gathered = a.gather();
    const Vector x = dense_solve(gathered, b.gather());
    return PartitionedVector::from_global(x, a.rows);
}

double norm2(const PartitionedVector& v) {
    double sum = 0.0;
    for (const auto& block : v.local)
        for (double val : block) sum += val * val;
    return std::sqrt(sum);
}

void vcycle(const Hierarchy& h, std::size_t level, PartitionedVector& x,
            const PartitionedVector& b, const SolveOptions& opts) {
    const Level& lvl = h.levels[level];
    if (level + 1 == h.levels.size() || !lvl.p.has_value()) {
        x = coarse_solve(lvl.a, b);
        return;
    }
    relax_jacobi(lvl.a, lvl.pattern, lvl.spmv_schedule, x, b, opts.pre_sweeps, opts.jacobi_weight);
    const PartitionedVector r = residual(lvl.a, lvl.pattern, lvl.spmv_schedule, x, b);
    const PartitionedVector rc =
        restrict_residual(*lvl.p, *lvl.p_pattern_mirror, *lvl.p_reverse, r);
    PartitionedVector ec = PartitionedVector::zeros(lvl.p->cols);
    vcycle(h, level + 1, ec, rc, opts);
    const PartitionedVector e = interpolate_error(*lvl.p, *lvl.p_pattern, *lvl.p_forward, ec);
    for (int rank = 0; rank < lvl.a.rows.num_procs(); ++rank)
        for (std::size_t i = 0; i < x.local[rank].size(); ++i)
            x.local[rank][i] += e.local[rank][i];
    relax_jacobi(lvl.a, lvl.pattern, lvl.spmv_schedule, x, b, opts.post_sweeps, opts.jacobi_weight);
}

SolveResult solve(const Hierarchy& h, const PartitionedVector& b, PartitionedVector& x,
                  const SolveOptions& opts) {
    if (opts.rtol <= 0) throw std::invalid_argument("solve: rtol must be positive");
    if (opts.pre_sweeps < 0 || opts.post_sweeps < 0)
        throw std::invalid_argument("solve: sweeps must be >= 0");

    const Level& fine = h.levels.front();
    SolveResult result;
    const double bnorm = norm2(b);
    const double target = opts.rtol * bnorm;

    PartitionedVector r = residual(fine.a, fine.pattern, fine.spmv_schedule, x, b);
    result.residual_history.push_back(norm2(r));
    if (result.residual_history.back() <= target) {
        result.status = SolveStatus::converged;
        return result;
    }

    int grew = 0;
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        vcycle(h, 0, x, b, opts);
        r = residual(fine.a, fine.pattern, fine.spmv_schedule, x, b);
        const double rnorm = norm2(r);
        result.residual_history.push_back(rnorm);
        result.iterations = iter + 1;
        if (!std::isfinite(rnorm)) {
            result.status = SolveStatus::diverged;
            return result;
        }
        if (rnorm <= target) {
            result.status = SolveStatus::converged;
            return result;
        }
        grew = rnorm > 10.0 * result.residual_history.front() ? grew + 1 : 0;
        if (grew >= 3) {
            result.status = SolveStatus::diverged;
            return result;
        }
    }
    result.status = SolveStatus::max_iterations;
    return result;
}

} // namespace napmg
