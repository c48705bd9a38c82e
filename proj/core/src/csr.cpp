#include "napmg/csr.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <tuple>

namespace napmg {

double CsrMatrix::coeff(index_t i, index_t j) const {
    if (i < 0 || i >= n_rows || j < 0 || j >= n_cols) return 0.0;
    auto begin = col_idx.begin() + row_ptr[i];
    auto end = col_idx.begin() + row_ptr[i + 1];
    auto it = std::lower_bound(begin, end, j);
    if (it == end || *it != j) return 0.0;
    return values[static_cast<std::size_t>(it - col_idx.begin())];
}

void CsrMatrix::validate() const {
    if (n_rows < 0 || n_cols < 0)
        throw std::invalid_argument("csr: negative dimensions");
    if (row_ptr.size() != static_cast<std::size_t>(n_rows) + 1)
        throw std::invalid_argument("csr: row_ptr length != n_rows + 1");
    if (row_ptr.front() != 0)
        throw std::invalid_argument("csr: row_ptr[0] != 0");
    if (row_ptr.back() != nnz() || col_idx.size() != values.size())
        throw std::invalid_argument("csr: row_ptr[n_rows] does not match nnz");
    for (index_t i = 0; i < n_rows; ++i) {
        if (row_ptr[i] > row_ptr[i + 1])
            throw std::invalid_argument("csr: row_ptr not non-decreasing at row " + std::to_string(i));
        for (index_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
            if (col_idx[k] < 0 || col_idx[k] >= n_cols)
                throw std::invalid_argument("csr: column out of range in row " + std::to_string(i));
            if (k > row_ptr[i] && col_idx[k - 1] >= col_idx[k])
                throw std::invalid_argument("csr: columns not strictly increasing in row " + std::to_string(i));
        }
    }
}

CsrMatrix CsrMatrix::identity(index_t n) {
    CsrMatrix a;
    a.n_rows = a.n_cols = n;
    a.row_ptr.resize(n + 1);
    a.col_idx.resize(n);
    a.values.assign(n, 1.0);
    for (index_t i = 0; i <= n; ++i) a.row_ptr[i] = i;
    for (index_t i = 0; i < n; ++i) a.col_idx[i] = i;
    return a;
}

CsrMatrix CsrMatrix::from_triplets(index_t n_rows, index_t n_cols,
                                   std::vector<std::tuple<index_t, index_t, double>> triplets) {
    for (const auto& [i, j, v] : triplets) {
        (void)v;
        if (i < 0 || i >= n_rows || j < 0 || j >= n_cols)
            throw std::invalid_argument("from_triplets: index out of range");
    }
    std::stable_sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
        return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });
    CsrMatrix a;
    a.n_rows = n_rows;
    a.n_cols = n_cols;
    a.row_ptr.assign(n_rows + 1, 0);
    for (std::size_t k = 0; k < triplets.size();) {
        auto [i, j, v] = triplets[k];
        double sum = v;
        std::size_t next = k + 1;
        while (next < triplets.size() && std::get<0>(triplets[next]) == i &&
               std::get<1>(triplets[next]) == j) {
            sum += std::get<2>(triplets[next]);
            ++next;
        }
        a.col_idx.push_back(j);
        a.values.push_back(sum);
        a.row_ptr[i + 1]++;
        k = next;
    }
    for (index_t i = 0; i < n_rows; ++i) a.row_ptr[i + 1] += a.row_ptr[i];
    return a;
}

Vector spmv(const CsrMatrix& a, const Vector& x) {
    if (a.n_cols != static_cast<index_t>(x.size()))
        throw std::invalid_argument("spmv: dimension mismatch");
    Vector y(a.n_rows, 0.0);
    for (index_t i = 0; i < a.n_rows; ++i) {
        double sum = 0.0;
        for (index_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
            sum += a.values[k] * x[a.col_idx[k]];
        y[i] = sum;
    }
    return y;
}

CsrMatrix spgemm(const CsrMatrix& a, const CsrMatrix& b) {
    if (a.n_cols != b.n_rows)
        throw std::invalid_argument("spgemm: dimension mismatch");
    CsrMatrix c;
    c.n_rows = a.n_rows;
    c.n_cols = b.n_cols;
    c.row_ptr.assign(a.n_rows + 1, 0);

    std::vector<double> sums(b.n_cols, 0.0);
    std::vector<char> touched(b.n_cols, 0);
    std::vector<index_t> cols;
    for (index_t i = 0; i < a.n_rows; ++i) {
        cols.clear();
        for (index_t ka = a.row_ptr[i]; ka < a.row_ptr[i + 1]; ++ka) {
            const index_t j = a.col_idx[ka];
            const double av = a.values[ka];
            for (index_t kb = b.row_ptr[j]; kb < b.row_ptr[j + 1]; ++kb) {
                const index_t col = b.col_idx[kb];
                sums[col] += av * b.values[kb];
                if (!touched[col]) {
                    touched[col] = 1;
                    cols.push_back(col);
                }
            }
        }
        std::sort(cols.begin(), cols.end());
        for (index_t col : cols) {
            c.col_idx.push_back(col);
            c.values.push_back(sums[col]);
            sums[col] = 0.0;
            touched[col] = 0;
        }
        c.row_ptr[i + 1] = c.nnz();
    }
    return c;
}

CsrMatrix transpose(const CsrMatrix& a) {
    CsrMatrix t;
    t.n_rows = a.n_cols;
    t.n_cols = a.n_rows;
    t.row_ptr.assign(a.n_cols + 1, 0);
    t.col_idx.resize(a.nnz());
    t.values.resize(a.nnz());
    for (index_t k = 0; k < a.nnz(); ++k) t.row_ptr[a.col_idx[k] + 1]++;
    for (index_t j = 0; j < a.n_cols; ++j) t.row_ptr[j + 1] += t.row_ptr[j];
    std::vector<index_t> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
    for (index_t i = 0; i < a.n_rows; ++i) {
        for (index_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
            const index_t pos = next[a.col_idx[k]]++;
            t.col_idx[pos] = i;
            t.values[pos] = a.values[k];
        }
    }
    return t;
}

} // namespace napmg
