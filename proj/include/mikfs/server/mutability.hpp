#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "mikfs/core/status.hpp"

namespace mikfs::server {

enum class Mode { read_write, read_only, append_only };

std::string_view mode_name(Mode mode);
// Accepts "rw", "ro", "ao" and the long names.
std::optional<Mode> parse_mode(std::string_view text);

// The mutability gate for method number `method`. target_exists says
// whether the node the call would create or replace already exists.
//
//   method                          ReadOnly   AppendOnly
//   3  GetHostWriteHandle           reject     allow
//   6  PutFile                      reject     allow iff target absent
//   7  PutFileInChunks              reject     allow iff target absent
//   8  CreateDirectory              reject     allow iff target absent
//   10 MoveFile, 12 MoveDirectory   reject     reject
//   11 CopyFile, 13 CopyDirectory   reject     allow iff target absent
//   14 DeleteFile, 15 DeleteDir     reject     reject
//   18 CreateDirectoryUnzip         reject     allow iff target absent
//   19 CreateDirectoryUnzipInChunks reject     allow iff target absent
//   20 SetPermissions               reject     reject
//   22 UpdateAttributes             reject     reject
//   everything else                 allow      allow
//
// ReadOnly rejections are ReadOnlyFilesystem, AppendOnly rejections are
// AppendOnlyViolation. ReadWrite allows everything.
core::Status mutability_gate(Mode mode, std::uint32_t method, bool target_exists);

// True for the methods that change the tree or hand out the write handle.
bool is_mutating(std::uint32_t method);

}  // namespace mikfs::server
