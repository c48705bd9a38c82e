#pragma once

#include "napmg/csr.hpp"

#include <utility>
#include <vector>

namespace napmg {

/// Contiguous row ownership: rank r owns global rows [starts[r], starts[r+1]).
struct RowPartition {
    index_t global_rows = 0;
    std::vector<index_t> starts{0};

    /// Balanced contiguous blocks: row i belongs to rank floor(i*P/N).
    static RowPartition balanced(index_t global_rows, int num_procs);
    static RowPartition from_counts(const std::vector<index_t>& counts);

    int num_procs() const { return static_cast<int>(starts.size()) - 1; }
    index_t first_row(int rank) const { return starts[rank]; }
    index_t local_size(int rank) const { return starts[rank + 1] - starts[rank]; }
    int owner_of(index_t row) const;
    bool owns(int rank, index_t row) const {
        return row >= starts[rank] && row < starts[rank + 1];
    }
    bool operator==(const RowPartition&) const = default;
};

/// Row-wise distributed vector; local[r] holds the values of rank r's rows.
struct PartitionedVector {
    RowPartition part;
    std::vector<Vector> local;

    static PartitionedVector zeros(const RowPartition& part);
    static PartitionedVector from_global(const Vector& x, const RowPartition& part);
    Vector gather() const;
    double& at_global(index_t i);
    double at_global(index_t i) const;
};

/// One rank's slice of a distributed matrix: the on-process block indexes the
/// rank's own columns locally, the off-process block indexes compressed
/// columns through off_col_map (sorted global column ids owned elsewhere).
struct RankBlock {
    CsrMatrix on_proc;
    CsrMatrix off_proc;
    std::vector<index_t> off_col_map;
};

/// Row-wise distributed matrix. Square operators share one partition for rows
/// and columns; rectangular ones (interpolation) carry a separate column
/// partition.
struct PartitionedMatrix {
    RowPartition rows;
    RowPartition cols;
    std::vector<RankBlock> blocks;

    index_t global_rows() const { return rows.global_rows; }
    index_t global_cols() const { return cols.global_rows; }
    index_t global_nnz() const;

    /// Reassembles the global matrix exactly (bitwise round trip with
    /// distribute()).
    CsrMatrix gather() const;

    /// Row of the global matrix held by `rank`, as (global column, value)
    /// pairs in ascending column order.
    std::vector<std::pair<index_t, double>> global_row(int rank, index_t global_row) const;

    /// Per-rank needed global columns: the off_col_maps.
    std::vector<std::vector<index_t>> column_needs() const;
};

PartitionedMatrix distribute(const CsrMatrix& a, const RowPartition& rows, const RowPartition& cols);
PartitionedMatrix distribute(const CsrMatrix& a, const RowPartition& rows);

/// Builds a PartitionedMatrix from per-rank rows given with global column
/// indices (ascending, duplicate-free within each row).
PartitionedMatrix from_local_rows(const RowPartition& rows, const RowPartition& cols,
                                  const std::vector<std::vector<std::vector<std::pair<index_t, double>>>>& local_rows);

} // namespace napmg
