#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hcn::io {

/// Reads a whole file. Throws DataError if it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Reads a file line by line, stripping a trailing '\r' from each line.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace hcn::io
