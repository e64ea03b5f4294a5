#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "mikfs/core/ownership.hpp"
#include "mikfs/core/path.hpp"
#include "mikfs/core/status.hpp"
#include "mikfs/core/tree.hpp"

namespace mikfs::core {

struct DirectoryArchive {
    std::string bytes;
    std::uint32_t entries = 0;
    // Files or directories the caller could not read; an omitted directory
    // counts once and is not descended.
    std::uint32_t omitted = 0;
};

// Zips the directory at path as seen by caller. The caller needs list rights
// on path; each entry is included only when authorize() grants read (files)
// or list (directories) for it.
Result<DirectoryArchive> zip_directory(const Tree& tree, const Path& path, const Ownership& caller);

struct UnpackedDirectory {
    std::unique_ptr<Node> root;
    // Nodes created below root (root itself excluded).
    std::uint32_t created = 0;
};

// Builds a detached directory from an archive, stamping every node with
// owner, permissions and now. Missing parent directories are implied.
// InvalidArgument for a malformed archive, an invalid entry name, or
// duplicate / conflicting entries; nothing is produced in that case.
Result<UnpackedDirectory> unpack_archive(std::string_view archive, const Ownership& owner,
                                         PermissionsMask permissions, Timestamp now);

}  // namespace mikfs::core
