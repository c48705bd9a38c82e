#include "napmg/partition.hpp"

#include <algorithm>
#include <stdexcept>

namespace napmg {

RowPartition RowPartition::balanced(index_t global_rows, int num_procs) {
    if (global_rows < 0 || num_procs < 1)
        throw std::invalid_argument("partition: bad sizes");
    RowPartition p;
    p.global_rows = global_rows;
    p.starts.resize(num_procs + 1);
    for (int r = 0; r <= num_procs; ++r)
        p.starts[r] = (static_cast<index_t>(r) * global_rows + num_procs - 1) / num_procs;
    p.starts[0] = 0;
    p.starts[num_procs] = global_rows;
    return p;
}

RowPartition RowPartition::from_counts(const std::vector<index_t>& counts) {
    RowPartition p;
    p.starts.assign(1, 0);
    for (index_t c : counts) {
        if (c < 0) throw std::invalid_argument("partition: negative count");
        p.starts.push_back(p.starts.back() + c);
    }
    p.global_rows = p.starts.back();
    return p;
}

int RowPartition::owner_of(index_t row) const {
    if (row < 0 || row >= global_rows)
        throw std::out_of_range("partition: row out of range");
    auto it = std::upper_bound(starts.begin(), starts.end(), row);
    return static_cast<int>(it - starts.begin()) - 1;
}

PartitionedVector PartitionedVector::zeros(const RowPartition& part) {
    PartitionedVector v;
    v.part = part;
    v.local.resize(part.num_procs());
    for (int r = 0; r < part.num_procs(); ++r)
        v.local[r].assign(static_cast<std::size_t>(part.local_size(r)), 0.0);
    return v;
}

PartitionedVector PartitionedVector::from_global(const Vector& x, const RowPartition& part) {
    if (static_cast<index_t>(x.size()) != part.global_rows)
        throw std::invalid_argument("partitioned vector: size mismatch");
    PartitionedVector v = zeros(part);
    for (int r = 0; r < part.num_procs(); ++r)
        for (index_t i = 0; i < part.local_size(r); ++i)
            v.local[r][i] = x[part.first_row(r) + i];
    return v;
}

Vector PartitionedVector::gather() const {
    Vector x;
    x.reserve(static_cast<std::size_t>(part.global_rows));
    for (const auto& block : local) x.insert(x.end(), block.begin(), block.end());
    return x;
}

double& PartitionedVector::at_global(index_t i) {
    const int r = part.owner_of(i);
    return local[r][static_cast<std::size_t>(i - part.first_row(r))];
}

double PartitionedVector::at_global(index_t i) const {
    const int r = part.owner_of(i);
    return local[r][static_cast<std::size_t>(i - part.first_row(r))];
}

index_t PartitionedMatrix::global_nnz() const {
    index_t n = 0;
    for (const auto& b : blocks) n += b.on_proc.nnz() + b.off_proc.nnz();
    return n;
}

CsrMatrix PartitionedMatrix::gather() const {
    CsrMatrix a;
    a.n_rows = rows.global_rows;
    a.n_cols = cols.global_rows;
    a.row_ptr.assign(a.n_rows + 1, 0);
    for (int r = 0; r < rows.num_procs(); ++r) {
        const RankBlock& b = blocks[r];
        const index_t col0 = cols.first_row(r);
        for (index_t i = 0; i < b.on_proc.n_rows; ++i) {
            index_t kon = b.on_proc.row_ptr[i], kon_end = b.on_proc.row_ptr[i + 1];
            index_t koff = b.off_proc.row_ptr[i], koff_end = b.off_proc.row_ptr[i + 1];
            while (kon < kon_end || koff < koff_end) {
                index_t on_col = kon < kon_end ? b.on_proc.col_idx[kon] + col0 : a.n_cols;
                index_t off_col = koff < koff_end ? b.off_col_map[b.off_proc.col_idx[koff]] : a.n_cols;
                if (on_col < off_col) {
                    a.col_idx.push_back(on_col);
                    a.values.push_back(b.on_proc.values[kon++]);
                } else {
                    a.col_idx.push_back(off_col);
                    a.values.push_back(b.off_proc.values[koff++]);
                }
            }
            a.row_ptr[rows.first_row(r) + i + 1] = a.nnz();
        }
    }
    for (index_t i = 0; i < a.n_rows; ++i)
        if (a.row_ptr[i + 1] < a.row_ptr[i]) a.row_ptr[i + 1] = a.row_ptr[i];
    return a;
}

std::vector<std::pair<index_t, double>> PartitionedMatrix::global_row(int rank, index_t grow) const {
    const RankBlock& b = blocks[rank];
    const index_t i = grow - rows.first_row(rank);
    if (i < 0 || i >= b.on_proc.n_rows)
        throw std::out_of_range("global_row: row not owned by rank");
    const index_t col0 = cols.first_row(rank);
    std::vector<std::pair<index_t, double>> out;
    index_t kon = b.on_proc.row_ptr[i], kon_end = b.on_proc.row_ptr[i + 1];
    index_t koff = b.off_proc.row_ptr[i], koff_end = b.off_proc.row_ptr[i + 1];
    while (kon < kon_end || koff < koff_end) {
        index_t on_col = kon < kon_end ? b.on_proc.col_idx[kon] + col0 : cols.global_rows;
        index_t off_col = koff < koff_end ? b.off_col_map[b.off_proc.col_idx[koff]] : cols.global_rows;
        if (on_col < off_col)
            out.emplace_back(on_col, b.on_proc.values[kon++]);
        else
            out.emplace_back(off_col, b.off_proc.values[koff++]);
    }
    return out;
}

std::vector<std::vector<index_t>> PartitionedMatrix::column_needs() const {
    std::vector<std::vector<index_t>> needs(blocks.size());
    for (std::size_t r = 0; r < blocks.size(); ++r) needs[r] = blocks[r].off_col_map;
    return needs;
}

PartitionedMatrix distribute(const CsrMatrix& a, const RowPartition& rows, const RowPartition& cols) {
    if (rows.global_rows != a.n_rows || cols.global_rows != a.n_cols)
        throw std::invalid_argument("distribute: partition/matrix size mismatch");
    PartitionedMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.blocks.resize(rows.num_procs());
    for (int r = 0; r < rows.num_procs(); ++r) {
        RankBlock& b = m.blocks[r];
        const index_t row0 = rows.first_row(r);
        const index_t nloc = rows.local_size(r);
        const index_t c0 = cols.first_row(r), c1 = cols.starts[r + 1];

        // collect off-process columns
        for (index_t i = 0; i < nloc; ++i)
            for (index_t k = a.row_ptr[row0 + i]; k < a.row_ptr[row0 + i + 1]; ++k) {
                const index_t j = a.col_idx[k];
                if (j < c0 || j >= c1) b.off_col_map.push_back(j);
            }
        std::sort(b.off_col_map.begin(), b.off_col_map.end());
        b.off_col_map.erase(std::unique(b.off_col_map.begin(), b.off_col_map.end()),
                            b.off_col_map.end());

        b.on_proc.n_rows = nloc;
        b.on_proc.n_cols = c1 - c0;
        b.on_proc.row_ptr.assign(nloc + 1, 0);
        b.off_proc.n_rows = nloc;
        b.off_proc.n_cols = static_cast<index_t>(b.off_col_map.size());
        b.off_proc.row_ptr.assign(nloc + 1, 0);
        for (index_t i = 0; i < nloc; ++i) {
            for (index_t k = a.row_ptr[row0 + i]; k < a.row_ptr[row0 + i + 1]; ++k) {
                const index_t j = a.col_idx[k];
                if (j >= c0 && j < c1) {
                    b.on_proc.col_idx.push_back(j - c0);
                    b.on_proc.values.push_back(a.values[k]);
                } else {
                    auto it = std::lower_bound(b.off_col_map.begin(), b.off_col_map.end(), j);
                    b.off_proc.col_idx.push_back(it - b.off_col_map.begin());
                    b.off_proc.values.push_back(a.values[k]);
                }
            }
            b.on_proc.row_ptr[i + 1] = b.on_proc.nnz();
            b.off_proc.row_ptr[i + 1] = b.off_proc.nnz();
        }
    }
    return m;
}

PartitionedMatrix distribute(const CsrMatrix& a, const RowPartition& rows) {
    if (a.n_rows != a.n_cols)
        throw std::invalid_argument("distribute: square overload requires a square matrix");
    return distribute(a, rows, rows);
}

PartitionedMatrix from_local_rows(
    const RowPartition& rows, const RowPartition& cols,
    const std::vector<std::vector<std::vector<std::pair<index_t, double>>>>& local_rows) {
    PartitionedMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.blocks.resize(rows.num_procs());
    for (int r = 0; r < rows.num_procs(); ++r) {
        RankBlock& b = m.blocks[r];
        const index_t nloc = rows.local_size(r);
        if (static_cast<index_t>(local_rows[r].size()) != nloc)
            throw std::invalid_argument("from_local_rows: row count mismatch");
        const index_t c0 = cols.first_row(r), c1 = cols.starts[r + 1];
        for (const auto& row : local_rows[r])
            for (const auto& [j, v] : row) {
                (void)v;
                if (j < c0 || j >= c1) b.off_col_map.push_back(j);
            }
        std::sort(b.off_col_map.begin(), b.off_col_map.end());
        b.off_col_map.erase(std::unique(b.off_col_map.begin(), b.off_col_map.end()),
                            b.off_col_map.end());
        b.on_proc.n_rows = b.off_proc.n_rows = nloc;
        b.on_proc.n_cols = c1 - c0;
        b.off_proc.n_cols = static_cast<index_t>(b.off_col_map.size());
        b.on_proc.row_ptr.assign(nloc + 1, 0);
        b.off_proc.row_ptr.assign(nloc + 1, 0);
        for (index_t i = 0; i < nloc; ++i) {
            for (const auto& [j, v] : local_rows[r][i]) {
                if (j >= c0 && j < c1) {
                    b.on_proc.col_idx.push_back(j - c0);
                    b.on_proc.values.push_back(v);
                } else {
                    auto it = std::lower_bound(b.off_col_map.begin(), b.off_col_map.end(), j);
                    b.off_proc.col_idx.push_back(it - b.off_col_map.begin());
                    b.off_proc.values.push_back(v);
                }
            }
            b.on_proc.row_ptr[i + 1] = b.on_proc.nnz();
            b.off_proc.row_ptr[i + 1] = b.off_proc.nnz();
        }
    }
    return m;
}

} // namespace napmg
