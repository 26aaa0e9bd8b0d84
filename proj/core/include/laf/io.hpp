#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace laf::io {

/// Writes `contents` to a sibling temp file and renames it over `path`.
/// Throws IoError on failure.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

/// Whole-file read; throws IoError if the file is missing or unreadable.
std::string read_file(const std::filesystem::path& path);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace laf::io
