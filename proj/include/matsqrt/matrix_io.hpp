#pragma once

#include <filesystem>
#include <iosfwd>

#include "matsqrt/linalg.hpp"

namespace matsqrt::io {

// Plain-text matrix format:
//   line 1: n
//   next n lines: n whitespace-separated decimal numbers (row i)
// Lines starting with '#' and blank lines are skipped anywhere in the file.
linalg::Matrix read_matrix(std::istream& in);
linalg::Matrix read_matrix_file(const std::filesystem::path& path);

// Writes with 17 significant digits so a round trip is exact.
void write_matrix(std::ostream& out, const linalg::Matrix& m);
void write_matrix_file(const std::filesystem::path& path, const linalg::Matrix& m);

} // namespace matsqrt::io
