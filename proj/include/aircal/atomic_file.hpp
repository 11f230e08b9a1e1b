#pragma once

#include <filesystem>
#include <string>

namespace aircal {

// Writes to a sibling temp file and renames into place, so readers never
// observe a half-written file.
void write_file_atomic(const std::filesystem::path& file,
                       const std::string& content);

}  // namespace aircal
