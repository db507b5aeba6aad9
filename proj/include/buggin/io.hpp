#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace buggin {

// Throws IoError when the file cannot be read.
std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file then renames it over the target, creating
// parent directories as needed. Throws IoError on failure.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace buggin
