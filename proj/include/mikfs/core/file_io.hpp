#pragma once

#include <filesystem>
#include <string>

#include "mikfs/core/status.hpp"

namespace mikfs::core {

// Writes path.tmp, fsyncs it and renames it over path, so readers see the
// old bytes or the new ones and never a mix.
Status write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

// Whole file; NotFound when it cannot be opened.
Result<std::string> read_file(const std::filesystem::path& path);

}  // namespace mikfs::core
