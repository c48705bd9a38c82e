#include "napmg/matrix_market.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace napmg {

namespace {

[[noreturn]] void fail(const std::string& path, long line, const std::string& msg) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + msg);
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

} // namespace

CsrMatrix read_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open file");

    std::string line;
    long lineno = 0;

    if (!std::getline(in, line)) fail(path, 1, "empty file");
    ++lineno;
    std::istringstream banner(line);
    std::string tag, object, format, field, symmetry;
    banner >> tag >> object >> format >> field >> symmetry;
    if (tag != "%%MatrixMarket" || lower(object) != "matrix" || lower(format) != "coordinate" ||
        lower(field) != "real")
        fail(path, lineno, "malformed header, expected '%%MatrixMarket matrix coordinate real ...'");
    symmetry = lower(symmetry);
    if (symmetry != "general" && symmetry != "symmetric")
        fail(path, lineno, "unsupported symmetry '" + symmetry + "'");
    const bool symmetric = symmetry == "symmetric";

    index_t n_rows = -1, n_cols = -1;
    long declared_nnz = -1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '%') continue;
        std::istringstream sizes(line);
        if (!(sizes >> n_rows >> n_cols >> declared_nnz))
            fail(path, lineno, "malformed size line");
        if (n_rows < 0 || n_cols < 0 || declared_nnz < 0)
            fail(path, lineno, "negative sizes");
        break;
    }
    if (n_rows < 0) fail(path, lineno, "missing size line");

    std::vector<std::tuple<index_t, index_t, double>> t;
    t.reserve(static_cast<std::size_t>(declared_nnz));
    long seen = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '%') continue;
        std::istringstream entry(line);
        index_t i, j;
        double v;
        if (!(entry >> i >> j >> v)) fail(path, lineno, "malformed entry");
        if (i < 1 || i > n_rows || j < 1 || j > n_cols)
            fail(path, lineno, "index out of range");
        ++seen;
        t.emplace_back(i - 1, j - 1, v);
        if (symmetric && i != j) t.emplace_back(j - 1, i - 1, v);
    }
    if (seen != declared_nnz)
        fail(path, lineno, "entry count " + std::to_string(seen) + " does not match declared " +
                               std::to_string(declared_nnz));
    return CsrMatrix::from_triplets(n_rows, n_cols, std::move(t));
}

void write_matrix_market(const CsrMatrix& a, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open file for writing");
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << a.n_rows << " " << a.n_cols << " " << a.nnz() << "\n";
    char buf[64];
    for (index_t i = 0; i < a.n_rows; ++i) {
        for (index_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
            std::snprintf(buf, sizeof(buf), "%.17g", a.values[k]);
            out << (i + 1) << " " << (a.col_idx[k] + 1) << " " << buf << "\n";
        }
    }
    if (!out) throw std::runtime_error(path + ": write failed");
}

} // namespace napmg
