#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bevkit/grid.hpp"

namespace bevkit {

/// Shortest round-trip decimal representation.
std::string format_double(double value);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Binary PGM (P5), 0 for off, 255 for on.
void write_pgm(const std::filesystem::path& path, const BinaryGrid& grid);
BinaryGrid read_pgm(const std::filesystem::path& path);

/// Grayscale PGM of a real-valued grid normalized to [min, max] of its finite
/// cells. Non-finite cells are written as 0.
void write_pgm_normalized(const std::filesystem::path& path, const Grid<double>& grid);

}  // namespace bevkit
