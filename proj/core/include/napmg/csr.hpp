#pragma once

#include <cstdint>
#include <tuple>
#include <vector>

namespace napmg {

using index_t = std::int64_t;

/// Dense vector of 64-bit floats.
using Vector = std::vector<double>;

/// Sparse matrix in canonical CSR form: within each row, column indices are
/// strictly increasing and duplicate-free. All values are 64-bit floats.
struct CsrMatrix {
    index_t n_rows = 0;
    index_t n_cols = 0;
    std::vector<index_t> row_ptr{0};
    std::vector<index_t> col_idx;
    std::vector<double> values;

    index_t nnz() const { return static_cast<index_t>(col_idx.size()); }

    /// Entry lookup; returns 0 for positions outside the pattern.
    double coeff(index_t i, index_t j) const;

    /// Throws std::invalid_argument if any CSR invariant is violated.
    void validate() const;

    static CsrMatrix identity(index_t n);

    /// Builds a canonical CSR matrix from unordered (row, col, value)
    /// triplets. Duplicate positions are summed in input order.
    static CsrMatrix from_triplets(index_t n_rows, index_t n_cols,
                                   std::vector<std::tuple<index_t, index_t, double>> triplets);
};

/// y = A * x, accumulated in ascending column order within each row.
Vector spmv(const CsrMatrix& a, const Vector& x);

/// C = A * B in canonical form. Entries that cancel to exactly zero are
/// retained; there is no drop tolerance.
CsrMatrix spgemm(const CsrMatrix& a, const CsrMatrix& b);

/// Exact transpose; transpose(transpose(A)) == A bitwise.
CsrMatrix transpose(const CsrMatrix& a);

} // namespace napmg
