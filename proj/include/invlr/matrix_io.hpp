#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "invlr/linalg.hpp"

namespace invlr {

/// Text matrix format: a "rows cols" header line, then one line per row with
/// space-separated values at 17 significant digits. Reading back a written
/// file reproduces every double bit for bit.
std::string format_matrix(const Matrix& m);
Matrix parse_matrix(std::string_view text);

void write_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix(const std::filesystem::path& path);

/// Shortest-form-independent 17 significant digit rendering used by every
/// text output (matrix files and CSV).
std::string format_double(double v);

}  // namespace invlr
