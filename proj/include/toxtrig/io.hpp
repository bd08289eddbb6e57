#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace toxtrig {

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file, then renames over `path`. Parent directories are created.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string sha256_hex(std::string_view data);
std::string file_sha256(const std::filesystem::path& path);

/// RFC 4180 field quoting.
std::string csv_field(std::string_view s);
std::string csv_row(const std::vector<std::string>& fields);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace toxtrig
