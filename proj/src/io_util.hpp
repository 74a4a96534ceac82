#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace spim::detail {

// Shortest text that round-trips the double exactly.
std::string format_double(double v);
double parse_double(std::string_view text, const std::filesystem::path& source);

// Write to a sibling temporary file and rename over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace spim::detail
