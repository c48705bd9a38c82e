#pragma once

#include "napmg/csr.hpp"

#include <string>

namespace napmg {

/// Reads a Matrix Market coordinate file (real, general or symmetric).
/// Symmetric storage is expanded to general form. Indices are 1-based on
/// disk, 0-based in memory. Malformed input throws std::runtime_error with
/// the offending line number.
CsrMatrix read_matrix_market(const std::string& path);

/// Writes coordinate format with a `general` banner and 17 significant
/// digits, so read(write(A)) reproduces A exactly.
void write_matrix_market(const CsrMatrix& a, const std::string& path);

} // namespace napmg
