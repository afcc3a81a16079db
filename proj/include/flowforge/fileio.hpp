#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace flowforge {

std::string read_text_file(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, std::string_view content);

/// Writes to a sibling temporary file and renames it into place.
void write_text_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Splits on '\n', dropping a trailing '\r' and blank lines.
std::vector<std::string> nonblank_lines(std::string_view text);

}  // namespace flowforge
