#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "mikfs/core/status.hpp"
#include "mikfs/core/tree.hpp"

namespace mikfs::server {

// Layout: "MIKFS001", u64 payload length, payload, u32 CRC-32 of payload.
// All integers big-endian. The payload is the root node, encoded as
//   u8 kind (0 file, 1 directory), u64 mtime, u32 permissions,
//   u8 host key length + bytes, u8 user key length + bytes,
//   u32 attribute count, then (u32 length + name, u32 length + value) each,
//   file: u64 length + content
//   directory: u32 child count, then (u16 name length + name, node) each.
std::string encode_snapshot(const core::Tree& tree);

// InvalidArgument for a bad magic, a length or checksum mismatch, trailing
// bytes, or a tree that fails check_invariants.
core::Result<core::Tree> decode_snapshot(std::string_view bytes);

// Writes a sibling temp file, fsyncs it, then renames it over path.
core::Status write_snapshot_file(const std::filesystem::path& path, const std::string& bytes);

core::Result<core::Tree> load_snapshot_file(const std::filesystem::path& path);

}  // namespace mikfs::server
