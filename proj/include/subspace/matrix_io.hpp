#pragma once

#include "subspace/spectral.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace subspace {

/// Matrix CSV format: first line `rows,cols`, then `rows` lines of `cols`
/// comma-separated decimals. Values are written with 17 significant digits
/// so a write/read round trip is bit-stable.
Matrix read_matrix_csv(const std::filesystem::path &path);
void write_matrix_csv(const std::filesystem::path &path, const Matrix &m);

/// Grayscale heatmap of |entries|, plain PGM (P2, 255 levels, value =
/// round(255*|entry|/max)). An all-zero matrix maps to all-black.
void write_pgm_heatmap(const std::filesystem::path &path, const Matrix &m);

/// Non-empty lines of a text file, with trailing CR and surrounding
/// whitespace stripped. Used for label-name and query files.
std::vector<std::string> read_lines(const std::filesystem::path &path);

} // namespace subspace
