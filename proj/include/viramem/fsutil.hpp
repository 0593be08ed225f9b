#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace viramem {

/// Whole-file read; throws DataError if the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Writes to "<path>.tmp-<pid>" then renames over `path`, so readers never
/// observe a torn file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace viramem
